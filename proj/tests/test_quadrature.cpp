#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "wavesim/gamma.hpp"
#include "wavesim/quadrature.hpp"

using namespace wavesim;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("line integral of (1+y^4)^-2 matches closed form 3 pi / (4 sqrt 2)") {
    Integrand h;
    h.eval = [](double y) {
        const double q = 1.0 + y * y * y * y;
        return std::complex<double>(1.0 / (q * q), 0.0);
    };
    h.decay = DecayClass::polynomial(8.0);
    const QuadratureResult r = integrate_line(h, 1e-12);
    CHECK(r.value.real() ==
          doctest::Approx(1.66608110180938734).epsilon(1e-12));
    CHECK(std::abs(r.value.imag()) < 1e-14);
    CHECK(r.abs_error_estimate < 1e-9);
}

TEST_CASE("line integral of (1+y^2)^-2 matches pi/2") {
    Integrand h;
    h.eval = [](double y) {
        const double q = 1.0 + y * y;
        return std::complex<double>(1.0 / (q * q), 0.0);
    };
    h.decay = DecayClass::polynomial(4.0);
    const QuadratureResult r = integrate_line(h, 1e-12);
    CHECK(r.value.real() == doctest::Approx(kPi / 2.0).epsilon(1e-12));
}

TEST_CASE("oscillatory gaussian matches sqrt(pi) e^-1") {
    Integrand env;
    env.eval = [](double y) {
        return std::complex<double>(std::exp(-y * y), 0.0);
    };
    env.decay = DecayClass::exponential(1.0);
    const QuadratureResult r = integrate_oscillatory(env, 2.0, 1e-12);
    CHECK(r.value.real() ==
          doctest::Approx(0.652049332173292183).epsilon(1e-12));
    CHECK(std::abs(r.value.imag()) < 1e-13);
}

TEST_CASE("high frequency compact bump is resolved, not aliased") {
    // (1-y^2)^3 on [-1,1] against e^{-i 50 y}: the positive value is ~1.5e-5,
    // six orders below the envelope mass, so any panel that straddles several
    // periods poisons the digits.
    Integrand env;
    env.eval = [](double y) {
        if (std::abs(y) >= 1.0) return std::complex<double>(0.0, 0.0);
        const double u = 1.0 - y * y;
        return std::complex<double>(u * u * u, 0.0);
    };
    env.decay = DecayClass::compact_support(1.0);
    const QuadratureResult r = integrate_oscillatory(env, 50.0, 1e-10);
    CHECK(r.value.real() ==
          doctest::Approx(1.52160726494697612e-5).epsilon(1e-8));
    CHECK(std::abs(r.value.imag()) < 1e-12);
}

TEST_CASE("interval integral of sin matches 1 - cos") {
    const QuadratureResult r = integrate_interval(
        [](double y) { return std::complex<double>(std::sin(y), 0.0); }, 0.0,
        2.0, 1e-12);
    CHECK(r.value.real() ==
          doctest::Approx(1.0 - std::cos(2.0)).epsilon(1e-12));
}

TEST_CASE("panel caps raise NonConvergence") {
    // Too few panels for the truncation radius alone.
    Integrand wide;
    wide.eval = [](double y) {
        return std::complex<double>(1.0 / (1.0 + y * y * y * y), 0.0);
    };
    wide.decay = DecayClass::polynomial(4.0);
    QuadratureOptions tight;
    tight.max_panels = 8;
    CHECK_THROWS_AS(integrate_line(wide, 1e-8, tight), NonConvergence);

    // An interior kink the Kronrod pair refines on forever.
    Integrand kink;
    kink.eval = [](double y) {
        return std::complex<double>(
            std::sqrt(std::abs(y - 0.3)) / (1.0 + y * y * y * y), 0.0);
    };
    kink.decay = DecayClass::polynomial(3.5);
    QuadratureOptions cap;
    cap.max_panels = 60;
    CHECK_THROWS_AS(integrate_line(kink, 1e-12, cap), NonConvergence);
}

TEST_CASE("wrongly declared decay class is rejected") {
    // A numerical noise floor under a declared exponential envelope: the
    // spot check past the truncation radius sees the floor.
    Integrand floored;
    floored.eval = [](double y) {
        return std::complex<double>(std::max(std::exp(-y * y), 1e-28), 0.0);
    };
    floored.decay = DecayClass::exponential(1.0);
    CHECK_THROWS_AS(integrate_line(floored, 1e-8), DomainError);

    // Values past the declared support radius.
    Integrand leaky;
    leaky.eval = [](double y) {
        return std::complex<double>(std::exp(-y * y), 0.0);
    };
    leaky.decay = DecayClass::compact_support(2.0);
    CHECK_THROWS_AS(integrate_line(leaky, 1e-8), DomainError);

    // A polynomial tail sold as exponential never even reaches the spot
    // check: the refitted tail bound grows without bound first.
    Integrand lied;
    lied.eval = [](double y) {
        return std::complex<double>(1.0 / (1.0 + y * y), 0.0);
    };
    lied.decay = DecayClass::exponential(1.0);
    CHECK_THROWS_AS(integrate_line(lied, 1e-10), NonConvergence);
}

TEST_CASE("gamma special values") {
    CHECK(wavesim::gamma(0.5) ==
          doctest::Approx(1.7724538509055160).epsilon(1e-14));
    CHECK(wavesim::gamma(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wavesim::gamma(5.0) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK(wavesim::log_gamma(171.0) ==
          doctest::Approx(std::lgamma(171.0)).epsilon(1e-14));
}

TEST_CASE("gamma recurrence holds across the usable range") {
    for (int i = 0; i < 50; ++i) {
        const double x = 0.3 + 0.37 * static_cast<double>(i);
        CHECK(wavesim::gamma(x + 1.0) ==
              doctest::Approx(x * wavesim::gamma(x)).epsilon(1e-12));
    }
}

TEST_CASE("gamma rejects the poles") {
    CHECK_THROWS_AS(wavesim::gamma(0.0), DomainError);
    CHECK_THROWS_AS(wavesim::gamma(-3.0), DomainError);
}
