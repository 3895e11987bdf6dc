#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "wavesim/spectra.hpp"
#include "wavesim/wavelets.hpp"

using namespace wavesim;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("rational_even n=2 correlation values") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    // R(0) = integral of (1+y^4)^-2 = 3 pi / (4 sqrt 2).
    CHECK(correlation(m, 0.0) ==
          doctest::Approx(1.66608110180938734).epsilon(1e-8));
    CHECK(correlation(m, 1.0) ==
          doctest::Approx(1.4097823189911212).epsilon(1e-8));
}

TEST_CASE("correlation is even and maximal at zero") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const double r0 = correlation(m, 0.0);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> lag(0.05, 8.0);
    for (int i = 0; i < 20; ++i) {
        const double tau = lag(gen);
        const double plus = correlation(m, tau);
        const double minus = correlation(m, -tau);
        CHECK(plus == doctest::Approx(minus).epsilon(1e-10));
        CHECK(std::abs(plus) <= r0 * (1.0 + 1e-10));
    }
}

TEST_CASE("lorentz_pow n=2 variance matches 5 pi / 16") {
    const SpectralModel m = make_density("lorentz_pow", {{"n", 2.0}});
    CHECK(correlation(m, 0.0) ==
          doctest::Approx(0.98174770424681035).epsilon(1e-8));
}

TEST_CASE("two_bump m=2 a=3 variance") {
    const SpectralModel m = make_density("two_bump", {{"m", 2.0}, {"a", 3.0}});
    CHECK(correlation(m, 0.0) == doctest::Approx(1.9689931956374).epsilon(1e-7));
}

TEST_CASE("g is the pointwise square root of f") {
    for (const auto& [family, params] :
         std::vector<std::pair<std::string, std::map<std::string, double>>>{
             {"rational_even", {{"n", 2.0}}},
             {"lorentz_pow", {{"n", 3.0}}},
             {"two_bump", {{"m", 2.0}, {"a", 3.0}}}}) {
        const SpectralModel m = make_density(family, params);
        for (double y = -6.0; y <= 6.0; y += 0.37) {
            CHECK(m.g(y) * m.g(y) == doctest::Approx(m.f(y)).epsilon(1e-12));
            CHECK(m.g(y) >= 0.0);
            // Declared derivative against finite differences.
            const double h = 1e-6;
            const double fd = (m.g(y + h) - m.g(y - h)) / (2.0 * h);
            CHECK(m.g_deriv(y) == doctest::Approx(fd).epsilon(5e-5));
        }
    }
}

TEST_CASE("family parameter validation") {
    CHECK_THROWS_AS(make_density("rational_even", {{"n", 1.0}}), DomainError);
    CHECK_THROWS_AS(make_density("lorentz_pow", {{"n", 1.0}}), DomainError);
    CHECK_THROWS_AS(make_density("two_bump", {{"m", 1.0}, {"a", 3.0}}),
                    DomainError);
    CHECK_THROWS_AS(make_density("no_such_family", {}), DomainError);
    CHECK_THROWS_AS(make_density("rational_even", {}), DomainError);
}

TEST_CASE("example constants with the meyer wavelet") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const WaveletTransforms wt = build_meyer();
    const PlanConstants c = plan_constants(m, wt);
    // B = (C2 / sqrt(2 pi)) int g |y| with int g |y| = pi / 2 exactly.
    CHECK(c.B == doctest::Approx(wt.C2 / std::sqrt(2.0 * kPi) * kPi / 2.0)
                     .epsilon(1e-7));
    CHECK(c.A1 == doctest::Approx(0.79788456080286536).epsilon(1e-7));
    CHECK(c.B1 == doctest::Approx(0.87853728004422924).epsilon(1e-7));
    CHECK(c.R0 == doctest::Approx(1.66608110180938734).epsilon(1e-8));
    CHECK(c.A > c.B);  // A adds the |g'| |y| mass on top of the g mass
}

TEST_CASE("admissibility report is all finite for built-in families") {
    const WaveletTransforms wt = build_meyer();
    for (const auto& [family, params] :
         std::vector<std::pair<std::string, std::map<std::string, double>>>{
             {"rational_even", {{"n", 2.0}}},
             {"lorentz_pow", {{"n", 2.0}}},
             {"two_bump", {{"m", 2.0}, {"a", 3.0}}}}) {
        const AdmissibilityReport rep =
            check_admissibility(make_density(family, params), wt);
        CHECK(rep.all_finite);
        CHECK(rep.conditions.size() >= 5);
        for (const auto& cond : rep.conditions) {
            CHECK(cond.finite);
            CHECK(std::isfinite(cond.value));
        }
    }
}

TEST_CASE("slowly decaying tails are flagged as divergent") {
    // f ~ 1/(1+|y|)^1.5: integral of g |y| = |y| / (1+|y|)^0.75 diverges.
    SpectralModel m;
    m.f = [](double y) { return std::pow(1.0 + std::abs(y), -1.5); };
    m.g = [](double y) { return std::pow(1.0 + std::abs(y), -0.75); };
    m.g_deriv = [](double y) {
        const double s = y >= 0.0 ? 1.0 : -1.0;
        return -0.75 * s * std::pow(1.0 + std::abs(y), -1.75);
    };
    // The divergence probe samples shells of the integrand directly; the
    // declared class only needs to be constructible, not tight.
    m.decay_g = DecayClass::polynomial(1.5);
    m.decay_g_deriv = DecayClass::polynomial(1.75);
    m.family_id = "synthetic_slow";
    const AdmissibilityReport rep = check_admissibility(m, build_meyer());
    CHECK_FALSE(rep.all_finite);
    bool saw_divergent = false;
    for (const auto& cond : rep.conditions) saw_divergent |= !cond.finite;
    CHECK(saw_divergent);
}

TEST_CASE("density scaling moves the constants linearly") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const SpectralModel half = scale_density(m, 0.5);
    const WaveletTransforms wt = build_meyer();
    const PlanConstants c = plan_constants(m, wt);
    const PlanConstants ch = plan_constants(half, wt);
    CHECK(ch.A == doctest::Approx(0.5 * c.A).epsilon(1e-7));
    CHECK(ch.B == doctest::Approx(0.5 * c.B).epsilon(1e-7));
    CHECK(ch.A1 == doctest::Approx(0.5 * c.A1).epsilon(1e-7));
    CHECK(ch.B1 == doctest::Approx(0.5 * c.B1).epsilon(1e-7));
    CHECK(ch.R0 == doctest::Approx(0.25 * c.R0).epsilon(1e-7));
}
