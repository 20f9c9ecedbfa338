#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace decoyrate {

enum class Basis : std::uint8_t { Z = 0, X = 1 };
enum class Rank : std::uint8_t { Weak = 1, Strong = 2 };

inline constexpr std::array<Basis, 2> kBases{Basis::Z, Basis::X};

constexpr Basis other(Basis b) { return b == Basis::Z ? Basis::X : Basis::Z; }
constexpr int index(Basis b) { return static_cast<int>(b); }

// Alice's sources. Vac only exists for the 3-intensity variants.
enum class Source : std::uint8_t { Z1 = 0, Z2 = 1, X1 = 2, X2 = 3, Vac = 4 };

inline constexpr int kNumSources = 5;
inline constexpr std::array<Source, 4> kSignalSources{Source::Z1, Source::Z2, Source::X1, Source::X2};
inline constexpr std::array<Source, 5> kAllSources{Source::Z1, Source::Z2, Source::X1, Source::X2,
                                                   Source::Vac};

constexpr int index(Source s) { return static_cast<int>(s); }
constexpr Source source(Basis b, Rank r) {
    return static_cast<Source>(2 * index(b) + (r == Rank::Strong ? 1 : 0));
}
constexpr Source weak(Basis b) { return source(b, Rank::Weak); }
constexpr Source strong(Basis b) { return source(b, Rank::Strong); }
// Preparation basis of a non-vacuum source.
constexpr Basis basis_of(Source s) { return index(s) >= 2 ? Basis::X : Basis::Z; }

std::string_view to_string(Basis b);
std::string_view to_string(Source s);
std::optional<Basis> parse_basis(std::string_view s);
std::optional<Source> parse_source(std::string_view s);

enum class Variant : std::uint8_t { FourIntensity, ThreeIntensityAsym, ThreeIntensitySym };

inline constexpr std::array<Variant, 3> kVariants{Variant::FourIntensity, Variant::ThreeIntensityAsym,
                                                  Variant::ThreeIntensitySym};

constexpr bool is_three_intensity(Variant v) { return v != Variant::FourIntensity; }
std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

struct ProtocolConfig {
    Variant variant = Variant::FourIntensity;
    std::array<double, kNumSources> mu{};  // indexed by Source; vacuum stays 0
    std::array<double, kNumSources> p{};
    double qZ = 0.5;
    double qX = 0.5;
    double pulses = 1e10;

    double mu_of(Source s) const { return mu[index(s)]; }
    double p_of(Source s) const { return p[index(s)]; }
    double q(Basis b) const { return b == Basis::Z ? qZ : qX; }
    bool has_vacuum() const { return is_three_intensity(variant); }

    // Throws DataError naming the first violated rule.
    void validate() const;
};

enum class AfterpulseModel : std::uint8_t { Off, Multiplicative };

struct SystemModel {
    double etaZ = 0.10;
    double etaX = 0.05;
    double darkRate = 2.5e-7;
    double afterPulse = 0.01;
    AfterpulseModel afterpulseModel = AfterpulseModel::Multiplicative;
    double deadTime = 5e-10;  // seconds
    double eMisZ = 0.015;
    double eMisX = 0.015;
    double lossCoeff = 0.2;       // dB/km
    double extraBobLoss = 2.6;    // dB
    double f = 1.14;
    double eps = 1e-10;
    double clockRate = 625e6;     // Hz

    double eta(Basis b) const { return b == Basis::Z ? etaZ : etaX; }
    double eMis(Basis b) const { return b == Basis::Z ? eMisZ : eMisX; }

    void validate() const;
};

inline constexpr int kMaxPhotons = 40;

// e^{-mu} mu^k / k!, evaluated in log space once k gets large.
double poisson_coeff(double mu, int k);
// Same, for callers holding k as a floating value; rejects non-integral k.
double poisson_coeff(double mu, double k);

// Table of a_k for k = 0..kMaxPhotons, for one intensity.
struct PoissonCoeffs {
    std::array<double, kMaxPhotons + 1> a{};
    explicit PoissonCoeffs(double mu);
    double operator[](int k) const { return a[static_cast<std::size_t>(k)]; }
};

// H(x) in bits, H(0) = H(1) = 0.
double binary_entropy(double x);

// a_k * p_src * q_basis * N_t
double expected_photon_count(const ProtocolConfig& cfg, int k, Source src, Basis basis);

}  // namespace decoyrate
