#include "decoyrate/stats_bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace decoyrate {

double chernoff_delta(double x, double eps) {
    if (!(x > 0) || !std::isfinite(x)) throw std::domain_error("chernoff_delta: x must be > 0");
    if (!(eps > 0 && eps < 1)) throw std::domain_error("chernoff_delta: eps must lie in (0,1)");
    const double l = std::log(eps / 2);
    return (-l + std::sqrt(l * l - 8 * l * x)) / (2 * x);
}

double chernoff_argument(const YieldObservation& obs, ChernoffArg arg) {
    return arg == ChernoffArg::Counts ? obs.counts : obs.counts * obs.S();
}

double upper_from_delta(double value, double delta) {
    if (delta >= 1) return std::numeric_limits<double>::infinity();
    return value / (1 - delta);
}

ChernoffInterval yield_interval(const YieldObservation& obs, double eps, ChernoffArg arg) {
    if (!(obs.denom > 0)) throw std::domain_error("yield_interval: denominator must be > 0");
    if (!(obs.counts >= 0)) throw std::domain_error("yield_interval: counts must be >= 0");
    ChernoffInterval iv;
    if (obs.counts == 0) {
        iv.lower = 0;
        iv.upper = -std::log(eps / 2) / obs.denom;
        iv.delta = std::numeric_limits<double>::infinity();
        return iv;
    }
    const double s = obs.S();
    iv.delta = chernoff_delta(chernoff_argument(obs, arg), eps);
    iv.lower = s / (1 + iv.delta);
    iv.upper = upper_from_delta(s, iv.delta);
    iv.unbounded = iv.delta >= 1;
    return iv;
}

}  // namespace decoyrate
