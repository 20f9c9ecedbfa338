#include "decoyrate/core_model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "decoyrate/errors.hpp"

namespace decoyrate {

std::string_view to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

std::string_view to_string(Source s) {
    switch (s) {
        case Source::Z1: return "Z1";
        case Source::Z2: return "Z2";
        case Source::X1: return "X1";
        case Source::X2: return "X2";
        case Source::Vac: return "VAC";
    }
    return "?";
}

std::optional<Basis> parse_basis(std::string_view s) {
    if (s == "Z") return Basis::Z;
    if (s == "X") return Basis::X;
    return std::nullopt;
}

std::optional<Source> parse_source(std::string_view s) {
    for (Source src : kAllSources)
        if (to_string(src) == s) return src;
    return std::nullopt;
}

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::FourIntensity: return "4int";
        case Variant::ThreeIntensityAsym: return "3int-asym";
        case Variant::ThreeIntensitySym: return "3int-sym";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view s) {
    for (Variant v : kVariants)
        if (to_string(v) == s) return v;
    return std::nullopt;
}

namespace {

void require(bool ok, const std::string& rule) {
    if (!ok) throw DataError("invariant violated: " + rule);
}

bool is_prob(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

void ProtocolConfig::validate() const {
    require(std::isfinite(pulses) && pulses > 0, "pulses must be positive");
    for (Source s : kSignalSources) {
        std::string name(to_string(s));
        require(std::isfinite(mu_of(s)) && mu_of(s) > 0, "mu[" + name + "] must be > 0");
        require(is_prob(p_of(s)), "p[" + name + "] must lie in [0,1]");
    }
    for (Basis b : kBases) {
        std::string name(to_string(b));
        require(mu_of(weak(b)) < mu_of(strong(b)), "mu[" + name + "1] < mu[" + name + "2]");
    }
    require(mu_of(Source::Vac) == 0.0, "vacuum intensity must be 0");
    require(is_prob(p_of(Source::Vac)), "p[VAC] must lie in [0,1]");
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    require(std::abs(sum - 1.0) <= 1e-12, "source probabilities must sum to 1 (simplex)");
    require(is_prob(qZ) && is_prob(qX) && std::abs(qZ + qX - 1.0) <= 1e-12, "qZ + qX = 1");
    if (is_three_intensity(variant)) {
        require(p_of(Source::Vac) > 0, "3-intensity variants need a vacuum source (p_vac > 0)");
        require(mu_of(Source::X1) == mu_of(Source::Z1) && mu_of(Source::X2) == mu_of(Source::Z2),
                "3-intensity variants share intensities across bases");
        require(p_of(Source::X1) == p_of(Source::Z1) && p_of(Source::X2) == p_of(Source::Z2),
                "3-intensity variants share probabilities across bases");
        require(qZ == 0.5 && qX == 0.5, "3-intensity variants measure with qZ = qX = 0.5");
    } else {
        require(p_of(Source::Vac) == 0.0, "4-intensity variant has no vacuum source");
    }
}

void SystemModel::validate() const {
    require(is_prob(etaZ) && etaZ > 0, "eta_z must lie in (0,1]");
    require(is_prob(etaX) && etaX > 0, "eta_x must lie in (0,1]");
    require(is_prob(darkRate), "dark_rate must lie in [0,1]");
    require(is_prob(afterPulse), "after_pulse must lie in [0,1]");
    require(is_prob(eMisZ) && is_prob(eMisX), "e_mis must lie in [0,1]");
    require(std::isfinite(deadTime) && deadTime >= 0, "dead_time must be >= 0");
    require(std::isfinite(lossCoeff) && lossCoeff >= 0, "loss_db_per_km must be >= 0");
    require(std::isfinite(extraBobLoss) && extraBobLoss >= 0, "extra_bob_loss_db must be >= 0");
    require(std::isfinite(f) && f >= 1, "f must be >= 1");
    require(eps > 0 && eps < 1, "eps must lie in (0,1)");
    require(std::isfinite(clockRate) && clockRate > 0, "clock_hz must be > 0");
}

double poisson_coeff(double mu, int k) {
    if (!(mu >= 0) || !std::isfinite(mu)) throw std::domain_error("poisson_coeff: mu must be >= 0");
    if (k < 0) throw std::domain_error("poisson_coeff: k must be >= 0");
    if (mu == 0) return k == 0 ? 1.0 : 0.0;
    if (k <= 20) {
        double v = std::exp(-mu);
        for (int i = 1; i <= k; ++i) v *= mu / i;
        return v;
    }
    return std::exp(-mu + k * std::log(mu) - std::lgamma(k + 1.0));
}

double poisson_coeff(double mu, double k) {
    if (!(k >= 0) || std::floor(k) != k || k > 1e9)
        throw std::domain_error("poisson_coeff: k must be a non-negative integer");
    return poisson_coeff(mu, static_cast<int>(k));
}

PoissonCoeffs::PoissonCoeffs(double mu) {
    for (int k = 0; k <= kMaxPhotons; ++k) a[static_cast<std::size_t>(k)] = poisson_coeff(mu, k);
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: x outside [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double expected_photon_count(const ProtocolConfig& cfg, int k, Source src, Basis basis) {
    return poisson_coeff(cfg.mu_of(src), k) * cfg.p_of(src) * cfg.q(basis) * cfg.pulses;
}

}  // namespace decoyrate
