#pragma once

#include <string>

#include "decoyrate/decoy_estimator.hpp"

namespace decoyrate {

struct KeyRateReport {
    Variant variant = Variant::FourIntensity;
    double R = 0;          // floored at zero
    double signedMin = 0;  // minimum before flooring; -inf when the rectangle is infeasible
    double Rz = 0, Rx = 0;
    double s0ZStar = 0, s0XStar = 0;
    double bps = 0;
    bool feasible = true;
    std::string reason;
    VacuumRectangle rect;
    SinglePhotonBounds bounds;
    int clampEvents = 0;
    double epsBudget = 0;
    int evaluations = 0;
    AnalysisOptions opts;
};

// Signed R_Z + R_X at one point of the vacuum-yield rectangle.
double rate_at(const BoundSet& bs, double s0Z, double s0X);
double rate_at(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys, double s0Z,
               double s0X, const AnalysisOptions& opts = {});

// Per-basis contributions and the bounds behind them.
struct RatePoint {
    double Rz = 0, Rx = 0;
    SinglePhotonBounds bounds;
    double total() const { return Rz + Rx; }
};
RatePoint rate_point(const BoundSet& bs, double s0Z, double s0X, ClampLog* log = nullptr);

// Worst case over the rectangle: opts.grid^2 grid, then golden-section passes along each axis.
KeyRateReport minimize_over(const BoundSet& bs, const VacuumRectangle& rect, double clockRate);

KeyRateReport worst_case_rate(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                              const AnalysisOptions& opts = {});
KeyRateReport rate_3intensity(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                              const AnalysisOptions& opts = {});
// Dispatches on cfg.variant.
KeyRateReport analyze(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                      const AnalysisOptions& opts = {});

}  // namespace decoyrate
