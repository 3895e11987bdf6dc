#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "wavesim/coeffs.hpp"
#include "wavesim/spectra.hpp"
#include "wavesim/wavelets.hpp"

using namespace wavesim;

namespace {

DirectCoefficients direct_ctx(const SpectralModel& m,
                              const WaveletTransforms& wt) {
    DirectCoefficients ctx;
    ctx.model = &m;
    ctx.transforms = &wt;
    return ctx;
}

TruncationPlan small_plan() {
    TruncationPlan plan;
    plan.N0 = 6;
    plan.N = 4;
    plan.M = {6, 6, 6, 6};
    plan.variance_budget = 1e-3;
    return plan;
}

}  // namespace

TEST_CASE("scaling coefficient at the origin") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const WaveletTransforms wt = build_meyer();
    const DirectCoefficients ctx = direct_ctx(m, wt);
    CHECK(a0k(ctx, 0.0, 0) ==
          doctest::Approx(0.87853728004422924).epsilon(1e-9));
}

TEST_CASE("detail coefficient level 0 shift 1") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const WaveletTransforms wt = build_meyer();
    const DirectCoefficients ctx = direct_ctx(m, wt);
    CHECK(bjk(ctx, 0.5, 0, 1) ==
          doctest::Approx(-0.0056424296535796626).epsilon(1e-7));
}

TEST_CASE("deep level coefficients shrink like 2^{-3j/2}") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const WaveletTransforms wt = build_meyer();
    DirectCoefficients ctx = direct_ctx(m, wt);
    ctx.rel_tol = 1e-6;
    ctx.quad.abs_tol_floor = 1e-16;
    const double v = bjk(ctx, 0.25, 6, 0);
    CHECK(std::abs(v - (-1.2741227914011471e-13)) < 3e-14);
}

TEST_CASE("realness of the raw integrals") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const WaveletTransforms meyer = build_meyer();
    const WaveletTransforms db4 = build_daubechies(4, 24);
    for (const WaveletTransforms* wt : {&meyer, &db4}) {
        const DirectCoefficients ctx = direct_ctx(m, *wt);
        for (double t : {0.0, 0.3, 0.77}) {
            const std::complex<double> a = a0k_raw(ctx, t, 1);
            const std::complex<double> b = bjk_raw(ctx, t, 1, -2);
            CHECK(std::abs(a.imag()) <= 1e-9 * (1.0 + std::abs(a.real())));
            CHECK(std::abs(b.imag()) <= 1e-9 * (1.0 + std::abs(b.real())));
        }
    }
}

TEST_CASE("shift identity through direct quadrature") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const WaveletTransforms wt = build_meyer();
    const DirectCoefficients ctx = direct_ctx(m, wt);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> tdist(0.0, 1.0);
    std::uniform_int_distribution<long long> kdist(-6, 6);
    std::uniform_int_distribution<int> jdist(0, 4);
    for (int i = 0; i < 12; ++i) {
        const double t = tdist(gen);
        const long long k = kdist(gen);
        const int j = jdist(gen);
        const double a_shift = a0k(ctx, t, k);
        const double a_base = a0k(ctx, t - static_cast<double>(k), 0);
        CHECK(std::abs(a_shift - a_base) <= 1e-8);
        const double b_shift = bjk(ctx, t, j, k);
        const double b_base =
            bjk(ctx, t - std::ldexp(static_cast<double>(k), -j), j, 0);
        CHECK(std::abs(b_shift - b_base) <= 1e-8);
    }
}

TEST_CASE("cache reproduces direct quadrature inside its windows") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    const TruncationPlan plan = small_plan();
    const CoefficientCache cache = build_cache(plan, m, wt, 1.0);
    CHECK(cache.max_probe_error <= 1e-7);
    CHECK(cache.max_imag_ratio <= 1e-9);
    CHECK(cache.content_hash != 0);
    REQUIRE(cache.bj0_grids.size() == 4);

    const DirectCoefficients ctx = direct_ctx(m, wt);
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double ua = -3.0 + 6.0 * u01(gen);
        CHECK(std::abs(cache.a00(ua) - a0k(ctx, ua, 0)) <= 3e-7);
        const double ub = -1.0 + 3.0 * u01(gen);
        CHECK(std::abs(cache.bj0(1, ub) - bjk(ctx, ub, 1, 0)) <= 3e-7);
    }
}

TEST_CASE("cache lookups respect the plan reach") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    const TruncationPlan plan = small_plan();
    const CoefficientCache cache = build_cache(plan, m, wt, 1.0);

    // Reachable: |k| <= N0 - 1 = 5 at t in [0, 1] means u in [-5, 6].
    CHECK_NOTHROW(cache.a00(-5.0));
    CHECK_NOTHROW(cache.a00(6.0));
    CHECK_THROWS_AS(cache.a00(6.5), CacheMiss);
    CHECK_THROWS_AS(cache.bj0(2, 100.0), CacheMiss);

    // Indexed accessors place the argument themselves.
    CHECK(a0k(cache, 0.25, 2) == cache.a00(0.25 - 2.0));
    CHECK(bjk(cache, 0.25, 1, 3) == cache.bj0(1, 0.25 - 1.5));
}

TEST_CASE("windows cover every value above the floor") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    const CoefficientCache cache = build_cache(small_plan(), m, wt, 1.0);
    const DirectCoefficients ctx = direct_ctx(m, wt);

    // Just outside the stored window the direct value must already be under
    // the floor (the window scan stopped for a reason).
    if (!cache.a00_grid.empty()) {
        const double beyond = cache.a00_grid.max_u() + 0.25;
        if (beyond <= 6.0) {
            CHECK(std::abs(a0k(ctx, beyond, 0)) <= 2.0 * cache.floor_eta);
        }
    }
}

TEST_CASE("daubechies caches build with certified tails") {
    const SpectralModel m =
        scale_density(make_density("lorentz_pow", {{"n", 2.0}}), 0.5);
    const WaveletTransforms db4 = build_daubechies(4, 24);
    TruncationPlan plan;
    plan.N0 = 4;
    plan.N = 3;
    plan.M = {4, 4, 4};
    plan.variance_budget = 1e-3;
    const CoefficientCache cache = build_cache(plan, m, db4, 0.5);
    CHECK(cache.max_probe_error <= 1e-7);
    CHECK(cache.max_imag_ratio <= 1e-9);

    const DirectCoefficients ctx = direct_ctx(m, db4);
    CHECK(std::abs(cache.a00(0.2) - a0k(ctx, 0.2, 0)) <= 3e-7);
    CHECK(std::abs(cache.bj0(0, 0.4) - bjk(ctx, 0.4, 0, 0)) <= 3e-7);
}

TEST_CASE("deep detail levels are certified empty") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.05);
    const WaveletTransforms wt = build_meyer();
    TruncationPlan plan;
    plan.N0 = 4;
    plan.N = 16;
    plan.M.assign(16, 4);
    plan.variance_budget = 1e-3;
    const CoefficientCache cache = build_cache(plan, m, wt, 1.0);
    REQUIRE(cache.bj0_grids.size() == 16);
    // The trivial envelope B / 2^j falls below the floor well before j = 15.
    CHECK(cache.bj0_grids.back().empty());
    // Empty levels read as zero inside the reach.
    CHECK(cache.bj0(15, 0.5) == 0.0);
}

TEST_CASE("decay bounds hold over the whole plan") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    const TruncationPlan plan = small_plan();
    const CoefficientCache cache = build_cache(plan, m, wt, 1.0);
    const PlanConstants constants = plan_constants(m, wt);
    const DirectCoefficients ctx = direct_ctx(m, wt);
    const std::vector<double> ts = {0.0, 0.25, 0.5, 0.75, 1.0};
    const DecayReport report = verify_decay(plan, constants, cache, ctx, ts);
    CHECK(report.checked_in_window > 0);
    CHECK(report.worst_a_ratio <= 1.0 + 1e-6);
    CHECK(report.worst_bj0_ratio <= 1.0 + 1e-6);
    CHECK(report.worst_bjk_ratio <= 1.0 + 1e-6);
}

TEST_CASE("a corrupted cache fails the decay check") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    const TruncationPlan plan = small_plan();
    CoefficientCache cache = build_cache(plan, m, wt, 1.0);
    REQUIRE_FALSE(cache.a00_grid.empty());
    for (double& v : cache.a00_grid.values) v *= 1e6;
    const PlanConstants constants = plan_constants(m, wt);
    const DirectCoefficients ctx = direct_ctx(m, wt);
    CHECK_THROWS_AS(
        verify_decay(plan, constants, cache, ctx, {0.0, 0.5, 1.0}),
        BoundViolation);
}

TEST_CASE("cache files round trip and reject corruption") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    const CoefficientCache cache = build_cache(small_plan(), m, wt, 1.0);

    const std::string path = "cache_roundtrip.bin";
    save_cache(cache, path);
    const CoefficientCache loaded = load_cache(path);
    CHECK(loaded.content_hash == cache.content_hash);
    CHECK(loaded.a00_grid.values == cache.a00_grid.values);
    CHECK(loaded.a00_grid.u0 == cache.a00_grid.u0);
    CHECK(loaded.floor_eta == cache.floor_eta);
    REQUIRE(loaded.bj0_grids.size() == cache.bj0_grids.size());
    for (std::size_t j = 0; j < cache.bj0_grids.size(); ++j) {
        CHECK(loaded.bj0_grids[j].values == cache.bj0_grids[j].values);
    }

    // Flip one payload byte: the stored hash no longer matches.
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(256);
    char byte = 0;
    f.seekg(256);
    f.read(&byte, 1);
    byte = static_cast<char>(byte ^ 0x40);
    f.seekp(256);
    f.write(&byte, 1);
    f.close();
    CHECK_THROWS_AS(load_cache(path), ProvenanceMismatch);
    std::remove(path.c_str());
}

TEST_CASE("inconsistent plans are rejected") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    const WaveletTransforms wt = build_meyer();
    TruncationPlan bad;
    bad.N0 = 4;
    bad.N = 3;
    bad.M = {4, 4};  // wrong length
    bad.variance_budget = 1e-3;
    CHECK_THROWS_AS(build_cache(bad, m, wt, 1.0), DomainError);
}
