#include "decoyrate/decoy_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "decoyrate/errors.hpp"

namespace decoyrate {

std::string_view to_string(LogBase b) {
    switch (b) {
        case LogBase::E: return "e";
        case LogBase::Two: return "2";
        case LogBase::Ten: return "10";
    }
    return "?";
}

std::string_view to_string(ChernoffArg a) {
    return a == ChernoffArg::Counts ? "counts" : "paper-literal";
}

std::string_view to_string(ErrorDelta d) { return d == ErrorDelta::Cell ? "cell" : "errors"; }

std::string_view to_string(ThetaCounts t) {
    return t == ThetaCounts::Pulses ? "pulses" : "detections";
}

double log_base_value(LogBase b) {
    switch (b) {
        case LogBase::E: return 1.0;
        case LogBase::Two: return std::log(2.0);
        case LogBase::Ten: return std::log(10.0);
    }
    return 1.0;
}

double BoundSet::det(int i, int j, Basis b) const {
    const Source s1 = weak(b), s2 = strong(b);
    return ak(i, s1) * ak(j, s2) - ak(i, s2) * ak(j, s1);
}

double BoundSet::photon_count(int k, Source s, Basis b) const {
    return ak(k, s) * cfg.p_of(s) * cfg.q(b) * cfg.pulses;
}

BoundSet make_bound_set(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                        const AnalysisOptions& opts) {
    cfg.validate();
    sys.validate();
    counts.validate(cfg.variant);
    if (counts.meta.variant && *counts.meta.variant != cfg.variant)
        throw DataError("counts are labelled " + std::string(to_string(*counts.meta.variant)) +
                        " but the config is " + std::string(to_string(cfg.variant)));

    BoundSet bs;
    bs.cfg = cfg;
    bs.eps = sys.eps;
    bs.f = sys.f;
    bs.opts = opts;
    for (Source s : kAllSources)
        for (int k = 0; k <= 2; ++k)
            bs.a[index(s)][static_cast<std::size_t>(k)] = poisson_coeff(cfg.mu_of(s), k);

    auto fill = [&](Source s, Basis b) {
        const CountCell& c = counts.cell(s, b);
        CellBounds& cb = bs.cells[index(s)][index(b)];
        cb.present = true;
        cb.obs.counts = c.total;
        cb.obs.errCounts = c.error.value_or(0.0);
        cb.obs.denom = cfg.p_of(s) * cfg.q(b) * cfg.pulses;
        if (!(cb.obs.denom > 0)) throw DataError("no pulses sent for cell " + cell_name(s, b));
        cb.s = yield_interval(cb.obs, sys.eps, opts.chernoffArg);
        ++bs.epsUses;
    };
    for (Source s : kSignalSources)
        for (Basis b : kBases) fill(s, b);
    if (cfg.has_vacuum())
        for (Basis b : kBases) fill(Source::Vac, b);

    // Error-yield upper bounds for the weak sources, which feed the vacuum and phase-error bounds.
    for (Basis b : kBases) {
        CellBounds& cb = bs.cells[index(weak(b))][index(b)];
        const double m = cb.obs.errCounts;
        const double t = cb.obs.T();
        if (opts.errorDelta == ErrorDelta::Cell) {
            cb.tUpper = m > 0 ? upper_from_delta(t, cb.s.delta) : 0.0;
        } else {
            YieldObservation eo{m, m, cb.obs.denom};
            cb.tUpper = yield_interval(eo, sys.eps, opts.chernoffArg).upper;
        }
        ++bs.epsUses;
    }

    for (Basis b : kBases) {
        const CellBounds& sig = bs.at(strong(b), b);
        const double n = sig.obs.counts;
        bs.signalPresent[index(b)] = n > 0;
        const double e = n > 0 ? sig.obs.errCounts / n : 0.0;
        bs.signalErrorRate[index(b)] = e;
        bs.costTerm[index(b)] = sys.f * sig.obs.S() * binary_entropy(e);
    }
    // single-photon corrections (4), vacuum-detection corrections (2), sampling corrections (2)
    bs.epsUses += 8;
    return bs;
}

double s1_mean_lower(const BoundSet& bs, Basis w, double s0Mean, ClampLog* log) {
    double best = -std::numeric_limits<double>::infinity();
    for (Basis al : kBases) {
        const Source s1 = weak(al), s2 = strong(al);
        const double v = (bs.ak(2, s2) * bs.at(s1, w).s.lower - bs.ak(2, s1) * bs.at(s2, w).s.upper -
                          bs.det(0, 2, al) * s0Mean) /
                         bs.det(1, 2, al);
        best = std::max(best, v);
    }
    ClampLog local;
    return (log ? *log : local).clamp(best, 0.0, 1.0);
}

double s1_lower(const BoundSet& bs, Source src, Basis basis, double s1Mean, ClampLog* log) {
    const double x = bs.photon_count(1, src, basis) * s1Mean;
    if (!(x > 0)) return 0.0;
    const double d = chernoff_delta(x, bs.eps);
    ClampLog local;
    return (log ? *log : local).clamp(s1Mean * (1 - d), 0.0, 1.0);
}

double e1_upper(const BoundSet& bs, Basis basis, double s0Mean, double s1WeakL, ClampLog* log) {
    ClampLog local;
    ClampLog& lg = log ? *log : local;
    if (!(s1WeakL > 0)) {
        ++lg.events;
        return 0.5;
    }
    const Source s = weak(basis);
    const double x0 = bs.photon_count(0, s, basis) * s0Mean;
    const double keep = x0 > 0 ? std::max(0.0, 1 - chernoff_delta(x0, bs.eps)) : 0.0;
    const double num = bs.at(s, basis).tUpper - bs.ak(0, s) * s0Mean * keep / 2;
    return lg.clamp(num / (bs.ak(1, s) * s1WeakL), 0.0, 0.5);
}

double theta_correction(double nX, double nZ, double e1, double eps, LogBase base) {
    if (!(nX > 0) || !(nZ > 0)) throw std::domain_error("theta_correction: counts must be > 0");
    if (!(e1 > 0 && e1 < 1)) throw std::domain_error("theta_correction: e1 must lie in (0,1)");
    if (!(eps > 0 && eps < 1)) throw std::domain_error("theta_correction: eps must lie in (0,1)");
    const double n = nX + nZ;
    const double g = nX / n;
    const double d = (1 - g) * g * std::log(2.0) / (2 * (1 - e1) * e1);
    const double inner = eps * std::sqrt(e1 * (1 - e1) * nX * nZ / n);
    const double num = -std::log(inner) / log_base_value(base) / n;
    if (!(num > 0)) return 0.0;
    return std::sqrt(num / d);
}

VacuumRectangle vacuum_rectangle(const BoundSet& bs) {
    if (bs.cfg.has_vacuum()) throw DataError("vacuum_rectangle applies to the 4-intensity variant");
    VacuumRectangle r;
    for (Basis w : kBases) {
        double lo = 0.0;
        for (Basis al : kBases) {
            const Source s1 = weak(al), s2 = strong(al);
            const double v =
                (bs.ak(1, s2) * bs.at(s1, w).s.lower - bs.ak(1, s1) * bs.at(s2, w).s.upper) / bs.det(0, 1, al);
            lo = std::max(lo, v);
        }
        double hi = 2 * bs.at(weak(w), w).tUpper / bs.ak(0, weak(w));
        hi = std::min(hi, bs.at(Source::Z1, w).s.upper / bs.ak(0, Source::Z1));
        hi = std::min(hi, bs.at(Source::X1, w).s.upper / bs.ak(0, Source::X1));
        hi = std::min(hi, 1.0);
        if (w == Basis::Z) {
            r.s0ZL = lo;
            r.s0ZU = hi;
        } else {
            r.s0XL = lo;
            r.s0XU = hi;
        }
        if (lo > hi && r.feasible) {
            r.feasible = false;
            r.reason = "vacuum-yield bounds cross in basis " + std::string(to_string(w));
        }
    }
    return r;
}

VacuumRectangle vacuum_rectangle_3int(const BoundSet& bs) {
    if (!bs.cfg.has_vacuum()) throw DataError("vacuum_rectangle_3int needs vacuum-source counts");
    VacuumRectangle r;
    for (Basis w : kBases) {
        const CellBounds& c = bs.at(Source::Vac, w);
        if (!c.present) throw DataError("missing count cell " + cell_name(Source::Vac, w));
        const double lo = c.s.lower;
        const double hi = std::min(c.s.upper, 1.0);
        if (w == Basis::Z) {
            r.s0ZL = lo;
            r.s0ZU = hi;
        } else {
            r.s0XL = lo;
            r.s0XU = hi;
        }
    }
    return r;
}

double s1_mean_lower(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys, Basis basis,
                     double s0Mean, const AnalysisOptions& opts) {
    return s1_mean_lower(make_bound_set(counts, cfg, sys, opts), basis, s0Mean);
}

VacuumRectangle vacuum_rectangle(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                                 const AnalysisOptions& opts) {
    return vacuum_rectangle(make_bound_set(counts, cfg, sys, opts));
}

VacuumRectangle vacuum_rectangle_3int(const CountsTable& counts, const ProtocolConfig& cfg,
                                      const SystemModel& sys, const AnalysisOptions& opts) {
    return vacuum_rectangle_3int(make_bound_set(counts, cfg, sys, opts));
}

AxisState evaluate_axis(const BoundSet& bs, Basis basis, double s0, ClampLog* log) {
    AxisState ax;
    ax.s0 = s0;
    ax.s1Mean = s1_mean_lower(bs, basis, s0, log);
    ax.s1LWeak = s1_lower(bs, weak(basis), basis, ax.s1Mean, log);
    ax.s1LStrong = s1_lower(bs, strong(basis), basis, ax.s1Mean, log);
    ax.e1 = e1_upper(bs, basis, s0, ax.s1LWeak, log);
    ax.nWeak = bs.photon_count(1, weak(basis), basis);
    ax.nStrong = bs.photon_count(1, strong(basis), basis);
    if (bs.opts.thetaCounts == ThetaCounts::Detections) {
        ax.nWeak *= ax.s1LWeak;
        ax.nStrong *= ax.s1LStrong;
    }
    return ax;
}

PhaseBound phase_error_bound(const BoundSet& bs, const AxisState& keyAxis, const AxisState& testAxis,
                             ClampLog* log) {
    PhaseBound pb;
    if (!(testAxis.nWeak > 0) || !(keyAxis.nStrong > 0)) return pb;
    const double e1 = std::clamp(testAxis.e1, 1e-12, 0.5);
    pb.theta = theta_correction(testAxis.nWeak, keyAxis.nStrong, e1, bs.eps, bs.opts.thetaLogBase);
    ClampLog local;
    pb.e1Phase = (log ? *log : local).clamp(testAxis.e1 + pb.theta, 0.0, 0.5);
    return pb;
}

}  // namespace decoyrate
