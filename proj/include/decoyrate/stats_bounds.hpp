#pragma once

#include <cstdint>

namespace decoyrate {

// Which quantity feeds the Chernoff deviation for an observed cell.
enum class ChernoffArg : std::uint8_t {
    Product,  // N * S = counts^2 / denom
    Counts,        // counts
};

struct YieldObservation {
    double counts = 0;
    double errCounts = 0;
    double denom = 0;  // p * q * N_t
    double S() const { return counts / denom; }
    double T() const { return errCounts / denom; }
};

struct ChernoffInterval {
    double lower = 0;
    double upper = 0;
    double delta = 0;
    bool unbounded = false;  // delta >= 1, upper is +inf
};

// Multiplicative Chernoff deviation for scale x > 0 at failure probability eps.
double chernoff_delta(double x, double eps);

// Argument handed to chernoff_delta for an observation.
double chernoff_argument(const YieldObservation& obs, ChernoffArg arg);

// Interval on the mean yield; zero counts give [0, -ln(eps/2)/denom].
ChernoffInterval yield_interval(const YieldObservation& obs, double eps,
                                ChernoffArg arg = ChernoffArg::Product);

// S/(1-delta), +inf once delta reaches 1.
double upper_from_delta(double value, double delta);

}  // namespace decoyrate
