#include "decoyrate/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "decoyrate/channel.hpp"
#include "decoyrate/errors.hpp"

namespace decoyrate {

namespace {

double sigmoid(double t) { return 1 / (1 + std::exp(-t)); }

template <std::size_t N>
std::array<double, N> floored_softmax(const std::array<double, N>& z, const std::array<double, N>& floor) {
    const double mx = *std::max_element(z.begin(), z.end());
    std::array<double, N> w{};
    double sum = 0;
    for (std::size_t i = 0; i < N; ++i) sum += (w[i] = std::exp(z[i] - mx));
    const double spare = 1 - std::accumulate(floor.begin(), floor.end(), 0.0);
    for (std::size_t i = 0; i < N; ++i) w[i] = floor[i] + spare * w[i] / sum;
    // Put the rounding residue on the largest share so the simplex sums to 1.
    const std::size_t big = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    double rest = 0;
    for (std::size_t i = 0; i < N; ++i)
        if (i != big) rest += w[i];
    w[big] = 1 - rest;
    return w;
}

struct Pair {
    double weak, strong;
};

// log for the strong intensity, logit for the weak/strong ratio
Pair decode_intensities(const SearchSpace& sp, double logStrong, double ratioLogit) {
    const double lo = std::log(2 * sp.muMin), hi = std::log(sp.muMax);
    const double strong = std::exp(std::clamp(logStrong, lo, hi));
    const double weak = sp.muMin + (strong - sp.muMin) * sigmoid(ratioLogit);
    return {weak, std::max(weak, std::min(strong, sp.muMax))};
}

struct Score {
    double R;
    double signedMin;
    bool operator>(const Score& o) const { return R > o.R || (R == o.R && signedMin > o.signedMin); }
};

// Moves gaining less than this (relative) only crawl along flat ridges.
bool clearly_better(const Score& s, const Score& cur) {
    constexpr double kRel = 1e-6;
    if (s.R > 0 || cur.R > 0) return s.R > cur.R + kRel * std::abs(cur.R);
    return s.signedMin > cur.signedMin + kRel * std::abs(cur.signedMin);
}

Score evaluate(const SystemModel& sys, double d, const ProtocolConfig& cfg, const AnalysisOptions& opts) {
    KeyRateReport rep;
    try {
        cfg.validate();
        const ExpectedCounts ec = expected_counts(sys, cfg, d);
        rep = analyze(to_counts_table(ec), cfg, sys, opts);
    } catch (const DataError&) {
        return {0, -std::numeric_limits<double>::max()};
    }
    double sm = rep.signedMin;
    if (!rep.feasible) sm = -1e3;  // below any attainable signed rate
    return {rep.R, sm};
}

std::vector<std::vector<double>> latin_hypercube(int n, int dim, std::uint64_t seed,
                                                 const std::vector<std::pair<double, double>>& box) {
    std::mt19937_64 eng(seed);
    auto uniform = [&] { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; };
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(dim)));
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int j = 0; j < dim; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            const auto k = static_cast<int>(eng() % static_cast<std::uint64_t>(i + 1));
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(k)]);
        }
        const auto [lo, hi] = box[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) {
            const double u = (perm[static_cast<std::size_t>(i)] + uniform()) / n;
            pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = lo + (hi - lo) * u;
        }
    }
    return pts;
}

std::vector<std::pair<double, double>> start_box(Variant v) {
    // strong log-intensity, weak/strong ratio logit, then probability/basis logits
    std::vector<std::pair<double, double>> box{{std::log(0.05), 0.0}, {-4.0, 0.5}};
    if (is_three_intensity(v)) {
        box.insert(box.end(), {{-3.0, 3.0}, {-3.0, 3.0}});
    } else {
        box.insert(box.end(), {{std::log(0.05), 0.0}, {-4.0, 0.5}, {-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}});
    }
    return box;
}

}  // namespace

ProtocolConfig SearchSpace::decode(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dimension()) throw std::invalid_argument("SearchSpace::decode: bad dimension");
    ProtocolConfig cfg;
    cfg.variant = variant;
    cfg.pulses = pulses;
    if (is_three_intensity(variant)) {
        const Pair m = decode_intensities(*this, x[0], x[1]);
        // shares of the weak pair, the strong pair and the vacuum source
        const auto w = floored_softmax<3>({x[2], x[3], 0.0}, {2 * pMin, 2 * pMin, pMin});
        for (Basis b : kBases) {
            cfg.mu[index(weak(b))] = m.weak;
            cfg.mu[index(strong(b))] = m.strong;
            cfg.p[index(weak(b))] = w[0] / 2;
            cfg.p[index(strong(b))] = w[1] / 2;
        }
        cfg.p[index(Source::Vac)] = 1 - 2 * (w[0] / 2) - 2 * (w[1] / 2);
        cfg.qZ = cfg.qX = 0.5;
    } else {
        const Pair mz = decode_intensities(*this, x[0], x[1]);
        const Pair mx = decode_intensities(*this, x[2], x[3]);
        cfg.mu[index(Source::Z1)] = mz.weak;
        cfg.mu[index(Source::Z2)] = mz.strong;
        cfg.mu[index(Source::X1)] = mx.weak;
        cfg.mu[index(Source::X2)] = mx.strong;
        const auto w = floored_softmax<4>({x[4], x[5], x[6], 0.0}, {pMin, pMin, pMin, pMin});
        for (Source s : kSignalSources) cfg.p[index(s)] = w[static_cast<std::size_t>(index(s))];
        cfg.qX = qMin + (qMax - qMin) * sigmoid(x[7]);
        cfg.qZ = 1 - cfg.qX;
    }
    return cfg;
}

double objective(const SystemModel& sys, double distanceKm, const ProtocolConfig& cfg, const AnalysisOptions& opts) {
    return evaluate(sys, distanceKm, cfg, opts).R;
}

OptimResult optimize(const SystemModel& sys, double distanceKm, Variant variant, std::uint64_t seed,
                     const OptimOptions& opts) {
    SearchSpace sp;
    sp.variant = variant;
    const int dim = sp.dimension();
    auto starts = latin_hypercube(opts.starts, dim, seed, start_box(variant));
    for (const auto& w : opts.warmStarts)
        if (static_cast<int>(w.size()) == dim) starts.push_back(w);

    AnalysisOptions searchOpts = opts.analysis;
    searchOpts.grid = opts.searchGrid;

    OptimResult res;
    Score best{-1, -std::numeric_limits<double>::infinity()};
    // Start and end point of every restart compete on the full objective, so the
    // result is never worse than the best initial point.
    auto consider = [&](const std::vector<double>& x) {
        const Score s = evaluate(sys, distanceKm, sp.decode(x), opts.analysis);
        ++res.evaluations;
        if (s > best) {  // strict: ties keep the earlier candidate
            best = s;
            res.bestCoords = x;
        }
        return s;
    };
    for (std::size_t r = 0; r < starts.size(); ++r) {
        std::vector<double> x = starts[r];
        consider(x);
        Score cur = evaluate(sys, distanceKm, sp.decode(x), searchOpts);
        long evals = 1;
        std::vector<double> step(static_cast<std::size_t>(dim), opts.initialStep);
        for (;;) {
            if (std::all_of(step.begin(), step.end(), [&](double h) { return h < opts.minStep; })) break;
            if (evals >= opts.maxEvaluationsPerStart) {
                res.converged = false;
                break;
            }
            for (std::size_t i = 0; i < static_cast<std::size_t>(dim); ++i) {
                if (step[i] < opts.minStep) continue;
                bool moved = false;
                for (double sgn : {1.0, -1.0}) {
                    std::vector<double> y = x;
                    y[i] += sgn * step[i];
                    const Score s = evaluate(sys, distanceKm, sp.decode(y), searchOpts);
                    ++evals;
                    if (clearly_better(s, cur)) {
                        x = std::move(y);
                        cur = s;
                        moved = true;
                        break;
                    }
                }
                step[i] = moved ? std::min(step[i] * opts.growth, opts.initialStep) : step[i] * 0.5;
            }
        }
        res.evaluations += evals;
        res.trace.emplace_back(static_cast<int>(r), std::max(0.0, consider(x).R));
    }
    res.restarts = static_cast<int>(starts.size());
    res.best = sp.decode(res.bestCoords);
    res.bestR = objective(sys, distanceKm, res.best, opts.analysis);
    return res;
}

std::vector<SweepRow> sweep(const SystemModel& sys, double from, double to, double step,
                            const std::vector<Variant>& variants, std::uint64_t seed, const OptimOptions& opts,
                            const std::function<void(const SweepRow&)>& onRow) {
    if (!(step > 0)) throw DataError("sweep step must be positive");
    if (to < from) throw DataError("sweep range is empty: to < from");
    std::vector<SweepRow> rows;
    std::map<Variant, std::vector<double>> warm;
    const long n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
        const double d = from + static_cast<double>(i) * step;
        for (Variant v : variants) {
            OptimOptions local = opts;
            if (auto it = warm.find(v); it != warm.end()) local.warmStarts.push_back(it->second);
            const OptimResult res = optimize(sys, d, v, seed, local);
            if (res.bestR > 0) warm[v] = res.bestCoords;
            rows.push_back({d, v, res.bestR, res.bestR * sys.clockRate});
            if (onRow) onRow(rows.back());
        }
    }
    return rows;
}

}  // namespace decoyrate
