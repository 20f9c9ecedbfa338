#include <catch_amalgamated.hpp>
#include <cmath>

#include "decoyrate/core_model.hpp"
#include "decoyrate/errors.hpp"
#include "oracles.hpp"

using namespace decoyrate;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ProtocolConfig four_int_87km() {
    ProtocolConfig c;
    c.mu = {0.020, 0.516, 0.170, 0.473, 0.0};
    c.p = {0.094, 0.772, 0.116, 0.018, 0.0};
    c.qX = 0.13;
    c.qZ = 0.87;
    return c;
}

}  // namespace

TEST_CASE("poisson coefficients", "[core]") {
    SECTION("vacuum") {
        REQUIRE(poisson_coeff(0.0, 0) == 1.0);
        REQUIRE(poisson_coeff(0.0, 1) == 0.0);
    }
    SECTION("values from a 40-digit evaluation") {
        REQUIRE_THAT(poisson_coeff(0.473, 0), WithinRel(0.6231300711776578763, 1e-14));
        REQUIRE_THAT(poisson_coeff(0.473, 2), WithinRel(0.0697061338472531095, 1e-14));
    }
    SECTION("matches a long double product for every k up to the cutoff") {
        for (double mu : {1e-3, 0.02, 0.17, 0.473, 0.72, 1.0}) {
            for (int k = 0; k <= kMaxPhotons; ++k) {
                const double ref = static_cast<double>(oracle::poisson_ld(mu, k));
                if (ref < 1e-300) continue;
                REQUIRE_THAT(poisson_coeff(mu, k), WithinRel(ref, 1e-12));
            }
        }
    }
    SECTION("partial sums increase towards 1") {
        for (double mu : {1e-3, 0.1, 0.5, 0.72, 1.0}) {
            PoissonCoeffs pc(mu);
            double sum = 0, prev = -1;
            for (int k = 0; k <= kMaxPhotons; ++k) {
                sum += pc[k];
                REQUIRE(sum >= prev);
                prev = sum;
            }
            REQUIRE(sum > 1 - 1e-9);
            REQUIRE(sum <= 1 + 1e-15);
        }
    }
    SECTION("rejects bad arguments") {
        REQUIRE_THROWS_AS(poisson_coeff(-0.1, 0), std::domain_error);
        REQUIRE_THROWS_AS(poisson_coeff(0.1, -1), std::domain_error);
        REQUIRE_THROWS_AS(poisson_coeff(0.1, 1.5), std::domain_error);
        REQUIRE(poisson_coeff(0.1, 2.0) == poisson_coeff(0.1, 2));
    }
}

TEST_CASE("binary entropy", "[core]") {
    REQUIRE(binary_entropy(0.5) == 1.0);
    REQUIRE(binary_entropy(0.0) == 0.0);
    REQUIRE(binary_entropy(1.0) == 0.0);
    REQUIRE_THAT(binary_entropy(0.11), WithinRel(0.49991595816452799564, 1e-13));
    for (int i = 0; i <= 1000; ++i) {
        const double x = i / 1000.0;
        REQUIRE_THAT(binary_entropy(x), WithinAbs(binary_entropy(1 - x), 1e-14));
    }
    REQUIRE_THROWS_AS(binary_entropy(-1e-9), std::domain_error);
    REQUIRE_THROWS_AS(binary_entropy(1.0 + 1e-9), std::domain_error);
}

TEST_CASE("expected photon counts", "[core]") {
    SECTION("87 km signal source measured in Z") {
        const ProtocolConfig c = four_int_87km();
        REQUIRE_THAT(expected_photon_count(c, 1, Source::Z2, Basis::Z), WithinRel(2068665644.4239580296, 1e-13));
    }
    SECTION("vacuum source, k = 0") {
        ProtocolConfig c;
        c.variant = Variant::ThreeIntensitySym;
        c.mu = {0.127, 0.524, 0.127, 0.524, 0.0};
        c.p = {0.069, 0.421, 0.069, 0.421, 0.020};
        for (Basis b : kBases)
            REQUIRE(expected_photon_count(c, 0, Source::Vac, b) == 0.020 * 0.5 * 1e10);
        REQUIRE(expected_photon_count(c, 1, Source::Vac, Basis::Z) == 0.0);
    }
    SECTION("zero probability gives zero") {
        ProtocolConfig c = four_int_87km();
        c.p[index(Source::X2)] = 0;
        REQUIRE(expected_photon_count(c, 1, Source::X2, Basis::X) == 0.0);
    }
    SECTION("sums to the pulse budget") {
        ProtocolConfig c = four_int_87km();
        double sum = 0;
        for (Source s : kSignalSources)
            for (Basis b : kBases)
                for (int k = 0; k <= kMaxPhotons; ++k) sum += expected_photon_count(c, k, s, b);
        REQUIRE_THAT(sum, WithinRel(c.pulses, 1e-6));
    }
}

TEST_CASE("configuration invariants", "[core]") {
    ProtocolConfig c = four_int_87km();
    // table values are rounded to three digits
    double sum = 0;
    for (double v : c.p) sum += v;
    for (double& v : c.p) v /= sum;
    REQUIRE_NOTHROW(c.validate());

    SECTION("simplex") {
        c.p[0] += 0.1;
        REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("simplex"));
    }
    SECTION("basis probabilities") {
        c.qX = 0.2;
        REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("qZ + qX"));
    }
    SECTION("intensity order") {
        std::swap(c.mu[index(Source::Z1)], c.mu[index(Source::Z2)]);
        REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("mu[Z1] < mu[Z2]"));
    }
    SECTION("no vacuum source in the 4-intensity variant") {
        c.p[index(Source::Vac)] = 0.01;
        c.p[index(Source::Z2)] -= 0.01;
        REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("no vacuum"));
    }
    SECTION("3-intensity ties") {
        ProtocolConfig t;
        t.variant = Variant::ThreeIntensityAsym;
        t.mu = {0.125, 0.521, 0.125, 0.521, 0.0};
        t.p = {0.062, 0.428, 0.062, 0.428, 0.020};
        REQUIRE_NOTHROW(t.validate());
        t.mu[index(Source::X1)] = 0.13;
        REQUIRE_THROWS_WITH(t.validate(), Catch::Matchers::ContainsSubstring("share intensities"));
    }
    SECTION("system model ranges") {
        SystemModel s;
        REQUIRE_NOTHROW(s.validate());
        s.f = 0.9;
        REQUIRE_THROWS_AS(s.validate(), DataError);
        s = SystemModel{};
        s.eps = 1.0;
        REQUIRE_THROWS_AS(s.validate(), DataError);
    }
}
