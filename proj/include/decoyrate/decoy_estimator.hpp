#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "decoyrate/core_model.hpp"
#include "decoyrate/counts.hpp"
#include "decoyrate/stats_bounds.hpp"

namespace decoyrate {

enum class LogBase : std::uint8_t { E, Two, Ten };

// Deviation used for the error-yield upper bound T/(1-delta).
enum class ErrorDelta : std::uint8_t {
    Cell,    // delta of the cell's total count
    Errors,  // delta computed from the error count itself
};

// What n_X, n_Z mean in the random-sampling correction.
enum class ThetaCounts : std::uint8_t {
    Pulses,      // expected single-photon pulses N_1
    Detections,  // N_1 times the single-photon yield bound
};

struct AnalysisOptions {
    ChernoffArg chernoffArg = ChernoffArg::Counts;
    LogBase thetaLogBase = LogBase::E;
    ErrorDelta errorDelta = ErrorDelta::Cell;
    ThetaCounts thetaCounts = ThetaCounts::Detections;
    int grid = 33;
};

std::string_view to_string(LogBase b);
std::string_view to_string(ChernoffArg a);
std::string_view to_string(ErrorDelta d);
std::string_view to_string(ThetaCounts t);
double log_base_value(LogBase b);

struct ClampLog {
    int events = 0;
    double clamp(double v, double lo, double hi) {
        if (v < lo) { ++events; return lo; }
        if (v > hi) { ++events; return hi; }
        return v;
    }
};

struct CellBounds {
    bool present = false;
    YieldObservation obs;
    ChernoffInterval s;
    double tUpper = 0;  // matched-basis cells with error counts only
};

// Everything derived from the observed counts before the worst-case search.
struct BoundSet {
    ProtocolConfig cfg;
    double eps = 1e-10;
    double f = 1.14;
    AnalysisOptions opts;
    std::array<std::array<double, 3>, kNumSources> a{};  // a_k for k = 0,1,2
    std::array<std::array<CellBounds, 2>, kNumSources> cells{};
    std::array<double, 2> costTerm{};  // f * S * H(E) of the signal cell, per key basis
    std::array<double, 2> signalErrorRate{};
    std::array<bool, 2> signalPresent{};
    int epsUses = 0;

    const CellBounds& at(Source s, Basis b) const { return cells[index(s)][index(b)]; }
    double ak(int k, Source s) const { return a[index(s)][static_cast<std::size_t>(k)]; }
    // a_{i,s1} a_{j,s2} - a_{i,s2} a_{j,s1} for the weak/strong pair of basis b
    double det(int i, int j, Basis b) const;
    // N_{k,src}^{basis}
    double photon_count(int k, Source s, Basis b) const;
};

BoundSet make_bound_set(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                        const AnalysisOptions& opts = {});

struct VacuumRectangle {
    double s0ZL = 0, s0ZU = 0, s0XL = 0, s0XU = 0;
    bool feasible = true;
    std::string reason;

    double lower(Basis b) const { return b == Basis::Z ? s0ZL : s0XL; }
    double upper(Basis b) const { return b == Basis::Z ? s0ZU : s0XU; }
};

struct SinglePhotonBounds {
    std::array<double, 2> s1MeanL{};           // by measured basis
    std::array<double, 4> s1L{};               // by non-vacuum source, in its own basis
    std::array<double, 2> e1U{};               // by decoy basis: [X] is e_{1,X1}^{X,U}
    std::array<double, 2> theta{};             // by key basis
    std::array<double, 2> e1PhaseU{};          // by key basis
    std::array<double, 2> nWeak{}, nStrong{};  // sampling-correction counts by basis
};

double s1_mean_lower(const BoundSet& bs, Basis basis, double s0Mean, ClampLog* log = nullptr);
double s1_lower(const BoundSet& bs, Source src, Basis basis, double s1Mean, ClampLog* log = nullptr);
// Upper bound on the single-photon error rate of the weak source of `basis`.
// Returns 0.5 when s1WeakL is 0.
double e1_upper(const BoundSet& bs, Basis basis, double s0Mean, double s1WeakL, ClampLog* log = nullptr);
double theta_correction(double nX, double nZ, double e1, double eps, LogBase base = LogBase::E);

VacuumRectangle vacuum_rectangle(const BoundSet& bs);
VacuumRectangle vacuum_rectangle_3int(const BoundSet& bs);

// Convenience forms taking the raw inputs.
double s1_mean_lower(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                     Basis basis, double s0Mean, const AnalysisOptions& opts = {});
VacuumRectangle vacuum_rectangle(const CountsTable& counts, const ProtocolConfig& cfg,
                                 const SystemModel& sys, const AnalysisOptions& opts = {});
VacuumRectangle vacuum_rectangle_3int(const CountsTable& counts, const ProtocolConfig& cfg,
                                      const SystemModel& sys, const AnalysisOptions& opts = {});

// Per-basis quantities that depend only on that basis' vacuum yield.
struct AxisState {
    double s0 = 0;
    double s1Mean = 0;
    double s1LWeak = 0;
    double s1LStrong = 0;
    double e1 = 0.5;
    double nWeak = 0;    // sampling-correction count for the weak source
    double nStrong = 0;  // and for the strong source
};

AxisState evaluate_axis(const BoundSet& bs, Basis basis, double s0, ClampLog* log = nullptr);

// Phase-error bound for the key in `keyBasis`, built from the two axis states.
struct PhaseBound {
    double theta = 0.5;
    double e1Phase = 0.5;
};
PhaseBound phase_error_bound(const BoundSet& bs, const AxisState& keyAxis, const AxisState& testAxis,
                             ClampLog* log = nullptr);

}  // namespace decoyrate
