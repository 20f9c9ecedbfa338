#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "decoyrate/keyrate.hpp"

namespace decoyrate {

struct SearchSpace {
    Variant variant = Variant::FourIntensity;
    double muMin = 1e-3, muMax = 1.0;
    double pMin = 1e-3;
    double qMin = 0.01, qMax = 0.99;
    double pulses = 1e10;

    int dimension() const { return is_three_intensity(variant) ? 4 : 8; }
    // Unconstrained coordinates to a valid configuration.
    ProtocolConfig decode(const std::vector<double>& x) const;
};

struct OptimOptions {
    int starts = 32;
    double initialStep = 0.5;
    double minStep = 1e-4;
    double growth = 2.0;  // step multiplier after a successful move, capped at initialStep
    int maxEvaluationsPerStart = 20000;
    // Grid used while searching; every candidate is re-scored on analysis.grid.
    int searchGrid = 9;
    AnalysisOptions analysis;
    // Extra starting points tried after the Latin-hypercube ones.
    std::vector<std::vector<double>> warmStarts;
};

struct OptimResult {
    ProtocolConfig best;
    std::vector<double> bestCoords;
    double bestR = 0;
    std::vector<std::pair<int, double>> trace;  // (restart, best R reached by that restart)
    int restarts = 0;
    bool converged = true;
    long evaluations = 0;
};

// Worst-case rate of the expected counts at this distance; invalid configurations score 0.
double objective(const SystemModel& sys, double distanceKm, const ProtocolConfig& cfg,
                 const AnalysisOptions& opts = {});

OptimResult optimize(const SystemModel& sys, double distanceKm, Variant variant, std::uint64_t seed,
                     const OptimOptions& opts = {});

struct SweepRow {
    double distanceKm = 0;
    Variant variant = Variant::FourIntensity;
    double R = 0;
    double bps = 0;
};

// Optimizes every variant at from, from+step, ..., to. Each point also starts from the
// previous distance's optimum of the same variant. `onRow` sees rows as they finish.
std::vector<SweepRow> sweep(const SystemModel& sys, double from, double to, double step,
                            const std::vector<Variant>& variants, std::uint64_t seed, const OptimOptions& opts,
                            const std::function<void(const SweepRow&)>& onRow = {});

}  // namespace decoyrate
