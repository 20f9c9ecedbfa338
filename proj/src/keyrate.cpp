#include "decoyrate/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "decoyrate/errors.hpp"

namespace decoyrate {

namespace {

double basis_rate(const BoundSet& bs, Basis al, const AxisState& key, const PhaseBound& pb) {
    if (!bs.signalPresent[index(al)]) return -0.0;
    const Source s2 = strong(al);
    const double gain = bs.ak(1, s2) * key.s1LStrong * (1 - binary_entropy(pb.e1Phase));
    return bs.cfg.p_of(s2) * bs.cfg.q(al) * (gain - bs.costTerm[index(al)]);
}

double combine(const BoundSet& bs, const AxisState& z, const AxisState& x) {
    const PhaseBound pz = phase_error_bound(bs, z, x);
    const PhaseBound px = phase_error_bound(bs, x, z);
    return basis_rate(bs, Basis::Z, z, pz) + basis_rate(bs, Basis::X, x, px);
}

std::vector<double> axis_points(double lo, double hi, int n) {
    if (!(hi > lo) || n < 2) return {lo};
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

// Golden-section search for the minimum of f on [a, b].
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, int& evals) {
    constexpr double kInvPhi = 0.6180339887498949;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    evals += 2;
    for (int it = 0; it < 60 && (b - a) > 1e-9 * std::max(std::abs(a) + std::abs(b), 1e-300); ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

RatePoint rate_point(const BoundSet& bs, double s0Z, double s0X, ClampLog* log) {
    const AxisState z = evaluate_axis(bs, Basis::Z, s0Z, log);
    const AxisState x = evaluate_axis(bs, Basis::X, s0X, log);
    const PhaseBound pz = phase_error_bound(bs, z, x, log);
    const PhaseBound px = phase_error_bound(bs, x, z, log);
    RatePoint rp;
    rp.Rz = basis_rate(bs, Basis::Z, z, pz);
    rp.Rx = basis_rate(bs, Basis::X, x, px);
    SinglePhotonBounds& b = rp.bounds;
    for (const AxisState* ax : {&z, &x}) {
        const Basis w = ax == &z ? Basis::Z : Basis::X;
        b.s1MeanL[index(w)] = ax->s1Mean;
        b.s1L[index(weak(w))] = ax->s1LWeak;
        b.s1L[index(strong(w))] = ax->s1LStrong;
        b.e1U[index(w)] = ax->e1;
        b.nWeak[index(w)] = ax->nWeak;
        b.nStrong[index(w)] = ax->nStrong;
    }
    b.theta = {pz.theta, px.theta};
    b.e1PhaseU = {pz.e1Phase, px.e1Phase};
    return rp;
}

double rate_at(const BoundSet& bs, double s0Z, double s0X) {
    return combine(bs, evaluate_axis(bs, Basis::Z, s0Z), evaluate_axis(bs, Basis::X, s0X));
}

double rate_at(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys, double s0Z,
               double s0X, const AnalysisOptions& opts) {
    return rate_at(make_bound_set(counts, cfg, sys, opts), s0Z, s0X);
}

KeyRateReport minimize_over(const BoundSet& bs, const VacuumRectangle& rect, double clockRate) {
    KeyRateReport rep;
    rep.variant = bs.cfg.variant;
    rep.rect = rect;
    rep.opts = bs.opts;
    rep.epsBudget = bs.epsUses * bs.eps;
    if (!rect.feasible) {
        rep.feasible = false;
        rep.reason = rect.reason;
        rep.signedMin = -std::numeric_limits<double>::infinity();
        return rep;
    }

    const auto zs = axis_points(rect.s0ZL, rect.s0ZU, bs.opts.grid);
    const auto xs = axis_points(rect.s0XL, rect.s0XU, bs.opts.grid);
    std::vector<AxisState> za, xa;
    za.reserve(zs.size());
    xa.reserve(xs.size());
    for (double s : zs) za.push_back(evaluate_axis(bs, Basis::Z, s));
    for (double s : xs) xa.push_back(evaluate_axis(bs, Basis::X, s));

    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < za.size(); ++i) {
        for (std::size_t j = 0; j < xa.size(); ++j) {
            const double r = combine(bs, za[i], xa[j]);
            if (r < best) {
                best = r;
                bi = i;
                bj = j;
            }
        }
    }
    int evals = static_cast<int>(za.size() * xa.size());
    double bz = zs[bi], bx = xs[bj];

    // Refine along Z with X fixed, then along X with the refined Z.
    if (zs.size() > 1) {
        const double lo = zs[bi > 0 ? bi - 1 : 0], hi = zs[std::min(bi + 1, zs.size() - 1)];
        const AxisState xFixed = evaluate_axis(bs, Basis::X, bx);
        auto f = [&](double s) { return combine(bs, evaluate_axis(bs, Basis::Z, s), xFixed); };
        auto [s, v] = golden_min(f, lo, hi, evals);
        if (v < best) {
            best = v;
            bz = s;
        }
    }
    if (xs.size() > 1) {
        std::size_t j = bj;
        const double lo = xs[j > 0 ? j - 1 : 0], hi = xs[std::min(j + 1, xs.size() - 1)];
        const AxisState zFixed = evaluate_axis(bs, Basis::Z, bz);
        auto f = [&](double s) { return combine(bs, zFixed, evaluate_axis(bs, Basis::X, s)); };
        auto [s, v] = golden_min(f, lo, hi, evals);
        if (v < best) {
            best = v;
            bx = s;
        }
    }

    ClampLog log;
    const RatePoint rp = rate_point(bs, bz, bx, &log);
    rep.evaluations = evals;
    rep.signedMin = best;
    rep.R = std::max(0.0, best);
    rep.Rz = rp.Rz;
    rep.Rx = rp.Rx;
    rep.s0ZStar = bz;
    rep.s0XStar = bx;
    rep.bounds = rp.bounds;
    rep.clampEvents = log.events;
    rep.bps = rep.R * clockRate;
    if (rep.R == 0) rep.reason = "worst-case rate is not positive";
    return rep;
}

KeyRateReport worst_case_rate(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                              const AnalysisOptions& opts) {
    if (cfg.has_vacuum()) throw DataError("worst_case_rate expects the 4-intensity variant");
    const BoundSet bs = make_bound_set(counts, cfg, sys, opts);
    return minimize_over(bs, vacuum_rectangle(bs), sys.clockRate);
}

KeyRateReport rate_3intensity(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                              const AnalysisOptions& opts) {
    if (!cfg.has_vacuum()) throw DataError("rate_3intensity expects a 3-intensity variant");
    const BoundSet bs = make_bound_set(counts, cfg, sys, opts);
    return minimize_over(bs, vacuum_rectangle_3int(bs), sys.clockRate);
}

KeyRateReport analyze(const CountsTable& counts, const ProtocolConfig& cfg, const SystemModel& sys,
                      const AnalysisOptions& opts) {
    return cfg.has_vacuum() ? rate_3intensity(counts, cfg, sys, opts) : worst_case_rate(counts, cfg, sys, opts);
}

}  // namespace decoyrate
