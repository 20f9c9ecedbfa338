#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "decoyrate/core_model.hpp"
#include "decoyrate/counts.hpp"

namespace decoyrate {

struct ChannelInstance {
    double distanceKm = 0;
    double transmittance = 1;
    std::array<double, 2> etaEff{};  // by measured basis
};

ChannelInstance make_channel(const SystemModel& sys, double distanceKm);

struct Gains {
    double gain = 0;
    double errGain = 0;
};

// Detection and error probability per pulse of intensity mu, before dead-time.
Gains expected_yields(const SystemModel& sys, const ChannelInstance& ch, double mu, Basis basis, bool sameBasis);

struct ExpectedCounts {
    std::array<std::array<double, 2>, kNumSources> mean{};
    std::array<std::array<double, 2>, kNumSources> meanErr{};
    bool hasVacuum = false;
    CountsMetadata meta;
};

// The symmetric 3-intensity variant runs with the Z detector attenuated to the X efficiency.
SystemModel effective_system(const SystemModel& sys, Variant v);

ExpectedCounts expected_counts(const SystemModel& sys, const ProtocolConfig& cfg, double distanceKm);

// Expected values as a counts table (errors kept for matched and vacuum cells).
CountsTable to_counts_table(const ExpectedCounts& ec);

// One Poisson realization per cell, errors binomial given the sampled total.
CountsTable sample_counts(const ExpectedCounts& ec, std::uint64_t seed);

// std::poisson_distribution and friends differ between standard libraries, so the
// variates are drawn here from the raw engine output.
namespace sampling {
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t cell_seed(std::uint64_t seed, int cell);
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();  // in (0,1)

private:
    std::mt19937_64 eng_;
};
std::uint64_t poisson(Rng& rng, double mean);
std::uint64_t binomial(Rng& rng, std::uint64_t n, double p);
}  // namespace sampling

}  // namespace decoyrate
