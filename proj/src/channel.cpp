#include "decoyrate/channel.hpp"

#include <algorithm>
#include <cmath>

namespace decoyrate {

ChannelInstance make_channel(const SystemModel& sys, double distanceKm) {
    if (!(distanceKm >= 0) || !std::isfinite(distanceKm))
        throw std::domain_error("distance must be a finite non-negative length");
    ChannelInstance ch;
    ch.distanceKm = distanceKm;
    ch.transmittance = std::pow(10.0, -(sys.lossCoeff * distanceKm + sys.extraBobLoss) / 10.0);
    for (Basis b : kBases) ch.etaEff[index(b)] = ch.transmittance * sys.eta(b);
    return ch;
}

Gains expected_yields(const SystemModel& sys, const ChannelInstance& ch, double mu, Basis basis, bool sameBasis) {
    const double y0 = 2 * sys.darkRate * (1 - sys.darkRate);
    const double click = -std::expm1(-ch.etaEff[index(basis)] * mu);  // 1 - e^{-eta mu}
    Gains g;
    g.gain = y0 + (1 - y0) * click;
    g.errGain = sameBasis ? 0.5 * y0 + sys.eMis(basis) * click : g.gain / 2;
    if (sys.afterpulseModel == AfterpulseModel::Multiplicative) {
        g.errGain += sys.afterPulse * g.gain / 2;
        g.gain *= 1 + sys.afterPulse;
    }
    g.errGain = std::min(g.errGain, g.gain);
    return g;
}

SystemModel effective_system(const SystemModel& sys, Variant v) {
    SystemModel out = sys;
    if (v == Variant::ThreeIntensitySym) out.etaZ = out.etaX = std::min(sys.etaZ, sys.etaX);
    return out;
}

ExpectedCounts expected_counts(const SystemModel& sysIn, const ProtocolConfig& cfg, double distanceKm) {
    const SystemModel sys = effective_system(sysIn, cfg.variant);
    const ChannelInstance ch = make_channel(sys, distanceKm);
    ExpectedCounts ec;
    ec.hasVacuum = cfg.has_vacuum();
    ec.meta.distanceKm = distanceKm;
    ec.meta.variant = cfg.variant;
    ec.meta.etaZ = sysIn.etaZ;
    ec.meta.etaX = sysIn.etaX;

    std::array<double, 2> clicksPerPulse{};  // per detector, two detectors per basis
    for (Source s : kAllSources) {
        if (s == Source::Vac && !ec.hasVacuum) continue;
        for (Basis b : kBases) {
            const bool same = s != Source::Vac && basis_of(s) == b;
            const Gains g = expected_yields(sys, ch, cfg.mu_of(s), b, same || s == Source::Vac);
            const double n = cfg.p_of(s) * cfg.q(b) * cfg.pulses;
            ec.mean[index(s)][index(b)] = g.gain * n;
            ec.meanErr[index(s)][index(b)] = g.errGain * n;
            clicksPerPulse[index(b)] += cfg.p_of(s) * cfg.q(b) * g.gain / 2;
        }
    }
    // Non-paralysable dead time; close to 1 at these click rates.
    for (Basis b : kBases) {
        const double factor = 1 / (1 + clicksPerPulse[index(b)] * sys.clockRate * sys.deadTime);
        for (Source s : kAllSources) {
            ec.mean[index(s)][index(b)] *= factor;
            ec.meanErr[index(s)][index(b)] *= factor;
        }
    }
    return ec;
}

CountsTable to_counts_table(const ExpectedCounts& ec) {
    CountsTable t;
    t.meta = ec.meta;
    for (Source s : kAllSources) {
        if (s == Source::Vac && !ec.hasVacuum) continue;
        for (Basis b : kBases) {
            const bool keepErr = s == Source::Vac || basis_of(s) == b;
            std::optional<double> err;
            if (keepErr) err = ec.meanErr[index(s)][index(b)];
            t.set(s, b, ec.mean[index(s)][index(b)], err);
        }
    }
    return t;
}

CountsTable sample_counts(const ExpectedCounts& ec, std::uint64_t seed) {
    CountsTable t;
    t.meta = ec.meta;
    for (Source s : kAllSources) {
        if (s == Source::Vac && !ec.hasVacuum) continue;
        for (Basis b : kBases) {
            const int cell = 2 * index(s) + index(b);
            sampling::Rng rng(sampling::cell_seed(seed, cell));
            const double mean = ec.mean[index(s)][index(b)];
            const std::uint64_t n = sampling::poisson(rng, mean);
            std::optional<double> err;
            if (s == Source::Vac || basis_of(s) == b) {
                const double ratio = mean > 0 ? std::clamp(ec.meanErr[index(s)][index(b)] / mean, 0.0, 1.0) : 0.0;
                err = static_cast<double>(sampling::binomial(rng, n, ratio));
            }
            t.set(s, b, static_cast<double>(n), err);
        }
    }
    return t;
}

namespace sampling {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t seed, int cell) {
    return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(cell + 1)));
}

Rng::Rng(std::uint64_t seed) : eng_(seed) {}

double Rng::uniform() {
    // 53 random bits, shifted off zero
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

std::uint64_t poisson_small(Rng& rng, double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = rng.uniform();
    while (prod > limit) {
        ++k;
        prod *= rng.uniform();
    }
    return k;
}

// Transformed rejection with squeeze (Hormann 1993), valid for mean >= 10.
std::uint64_t poisson_ptrs(Rng& rng, double lam) {
    const double slam = std::sqrt(lam);
    const double loglam = std::log(lam);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2 * a / us + b) * u + lam + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <= -lam + k * loglam - std::lgamma(k + 1))
            return static_cast<std::uint64_t>(k);
    }
}

std::uint64_t binomial_inversion(Rng& rng, std::uint64_t n, double p) {
    const double q = 1 - p;
    const double s = p / q;
    double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
    double u = rng.uniform();
    std::uint64_t k = 0;
    while (u > pmf && k < n) {
        u -= pmf;
        pmf *= s * static_cast<double>(n - k) / static_cast<double>(k + 1);
        ++k;
        if (pmf <= 0) break;
    }
    return k;
}

// BTRS (Hormann 1993), valid for n*p >= 10 and p <= 0.5.
std::uint64_t binomial_btrs(Rng& rng, std::uint64_t nInt, double p) {
    const double n = static_cast<double>(nInt);
    const double q = 1 - p;
    const double spq = std::sqrt(n * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = n * p + 0.5;
    const double vr = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const double m = std::floor((n + 1) * p);
    const double h = std::lgamma(m + 1) + std::lgamma(n - m + 1);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2 * a / us + b) * u + c);
        if (k < 0 || k > n) continue;
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        v = std::log(v * alpha / (a / (us * us) + b));
        if (v <= h - std::lgamma(k + 1) - std::lgamma(n - k + 1) + (k - m) * lpq)
            return static_cast<std::uint64_t>(k);
    }
}

}  // namespace

std::uint64_t poisson(Rng& rng, double mean) {
    if (!(mean >= 0) || !std::isfinite(mean)) throw std::domain_error("poisson: mean must be finite and >= 0");
    if (mean == 0) return 0;
    return mean < 10 ? poisson_small(rng, mean) : poisson_ptrs(rng, mean);
}

std::uint64_t binomial(Rng& rng, std::uint64_t n, double p) {
    if (!(p >= 0 && p <= 1)) throw std::domain_error("binomial: p must lie in [0,1]");
    if (n == 0 || p == 0) return 0;
    if (p == 1) return n;
    if (p > 0.5) return n - binomial(rng, n, 1 - p);
    if (static_cast<double>(n) * p < 10) return binomial_inversion(rng, n, p);
    return binomial_btrs(rng, n, p);
}

}  // namespace sampling

}  // namespace decoyrate
