#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "wavesim/coeffs.hpp"
#include "wavesim/planner.hpp"
#include "wavesim/sampler.hpp"
#include "wavesim/spectra.hpp"
#include "wavesim/verify.hpp"
#include "wavesim/wavelets.hpp"

using namespace wavesim;

namespace {

TruncationPlan tiny_plan() {
    TruncationPlan plan;
    plan.N0 = 3;
    plan.N = 2;
    plan.M = {3, 3};
    plan.variance_budget = 1e-2;
    return plan;
}

}  // namespace

TEST_CASE("wilson upper bound closed forms") {
    // Zero exceedances: upper bound = z^2 / (n + z^2).
    const double z = 1.959963984540054;
    CHECK(wilson_upper(0, 200) ==
          doctest::Approx(z * z / (200.0 + z * z)).epsilon(1e-12));
    // Independent re-derivation for a nonzero count.
    const int n = 200, x = 10;
    const double phat = static_cast<double>(x) / n;
    const double expect =
        (phat + z * z / (2.0 * n) +
         z * std::sqrt(phat * (1.0 - phat) / n +
                       z * z / (4.0 * static_cast<double>(n) * n))) /
        (1.0 + z * z / n);
    CHECK(wilson_upper(x, n) == doctest::Approx(expect).epsilon(1e-12));
    // Monotone in the count, bounded by 1.
    CHECK(wilson_upper(5, 100) < wilson_upper(6, 100));
    CHECK(wilson_upper(100, 100) <= 1.0);
    CHECK_THROWS_AS(wilson_upper(-1, 100), DomainError);
    CHECK_THROWS_AS(wilson_upper(3, 0), DomainError);
}

TEST_CASE("trapezoid Lp norm on constant and linear paths") {
    SamplePath constant;
    constant.times = uniform_grid(2.0, 101);
    constant.values.assign(101, 3.0);
    // ||c||_p over [0, T] = c T^{1/p}.
    CHECK(lp_norm_trapezoid(constant, 2.0) ==
          doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(lp_norm_trapezoid(constant, 1.0) ==
          doctest::Approx(6.0).epsilon(1e-12));

    SamplePath ramp;
    ramp.times = uniform_grid(1.0, 2001);
    ramp.values = ramp.times;
    // ||t||_2^2 = 1/3 up to O(n^-2) trapezoid error.
    CHECK(lp_norm_trapezoid(ramp, 2.0) ==
          doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-6));
    CHECK_THROWS_AS(lp_norm_trapezoid(ramp, 0.5), DomainError);
}

TEST_CASE("moment inequality holds for normal samples and fails for heavy ones") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> samples(20000);
    for (double& x : samples) x = normal(gen);
    for (double p : {2.0, 4.0, 6.0}) {
        const MomentCheck mc = moment_inequality_check(samples, 1.0, p);
        CHECK(mc.pass);
        CHECK(mc.empirical < mc.bound);
        CHECK(mc.standard_error > 0.0);
    }
    // E|X|^2 = 25 for sigma = 5 breaks the tau = 1 bound 2 * 2 * Gamma(1) = 4.
    for (double& x : samples) x *= 5.0;
    CHECK_FALSE(moment_inequality_check(samples, 1.0, 2.0).pass);
}

TEST_CASE("variance deficit of an empty synthetic plan is R(0)") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    TruncationPlan empty;  // all counts zero: no included indices
    CoefficientCache cache;
    cache.plan = empty;
    cache.T = 1.0;
    const double deficit = variance_deficit(empty, cache, m, {0.0, 0.5, 1.0});
    CHECK(deficit == doctest::Approx(1.66608110180938734).epsilon(1e-8));
}

TEST_CASE("energy exceeding R(0) is reported as inconsistency") {
    const SpectralModel m = make_density("rational_even", {{"n", 2.0}});
    TruncationPlan plan;
    plan.N0 = 2;
    plan.N = 0;
    CoefficientCache cache;
    cache.plan = plan;
    cache.T = 1.0;
    cache.a00_grid.u0 = -2.0;
    cache.a00_grid.step = 0.5;
    cache.a00_grid.values.assign(9, 5.0);  // energy ~ 25 per term > R(0)
    CHECK_THROWS_AS(variance_deficit(plan, cache, m, {0.5}), NegativeDeficit);
}

TEST_CASE("coefficient energy validates the cache plan") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    const CoefficientCache cache = build_cache(tiny_plan(), m, wt, 1.0);
    TruncationPlan other = tiny_plan();
    other.M = {3, 4};
    CHECK_THROWS_AS(coefficient_energy(other, cache, 0.5), DomainError);
    CHECK(coefficient_energy(tiny_plan(), cache, 0.5) > 0.0);
}

TEST_CASE("empirical covariance matches hand-computed sums") {
    // Three-point deterministic paths: per-path lag-0 mean of squares.
    std::vector<SamplePath> paths(120);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        paths[i].times = {0.0, 0.5, 1.0};
        const double c = static_cast<double>(i % 3);  // 0, 1, 2 repeating
        paths[i].values = {c, c, c};
    }
    const std::vector<CovarianceEstimate> est =
        empirical_covariance(paths, {0.0, 0.5});
    REQUIRE(est.size() == 2);
    // Mean over paths of c^2 = (0 + 1 + 4) / 3.
    CHECK(est[0].lag == 0.0);
    CHECK(est[0].estimate == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(est[1].lag == doctest::Approx(0.5));
    CHECK(est[1].estimate == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(est[0].standard_error > 0.0);

    paths.resize(50);
    CHECK_THROWS_AS(empirical_covariance(paths, {0.0}), DomainError);
}

TEST_CASE("reliability run is deterministic and bounded") {
    const SpectralModel m =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.3);
    const WaveletTransforms wt = build_meyer();
    const TruncationPlan plan = tiny_plan();
    const TruncationPlan ref = make_reference_plan(plan);
    const CoefficientCache cache = build_cache(plan, m, wt, 1.0);
    const CoefficientCache rcache = build_cache(ref, m, wt, 1.0);
    const AccuracySpec spec = AccuracySpec::validated(1.0, 0.5, 2.0, 1.0);

    PowerTarget target;
    target.s = 2;
    target.cache = &cache;
    target.reference_cache = &rcache;
    ReliabilityOptions opts;
    opts.grid_points = 64;

    const VerificationReport r1 =
        empirical_reliability(plan, ref, spec, target, 24, 99, opts);
    const VerificationReport r2 =
        empirical_reliability(plan, ref, spec, target, 24, 99, opts);
    CHECK(r1.exceedance_count == r2.exceedance_count);
    CHECK(r1.worst_norm == r2.worst_norm);
    CHECK(r1.grid_points_used == r2.grid_points_used);
    CHECK(r1.replications == 24);
    CHECK(r1.wilson_upper_95 ==
          doctest::Approx(wilson_upper(r1.exceedance_count, 24)));
    CHECK(r1.worst_norm >= 0.0);
    CHECK(r1.budget == plan.variance_budget);
}

TEST_CASE("reliability validates its inputs") {
    const AccuracySpec spec = AccuracySpec::validated(1.0, 0.5, 2.0, 1.0);
    const TruncationPlan plan = tiny_plan();
    TruncationPlan weak = plan;
    weak.N0 = 2;  // smaller than the plan: cannot dominate
    PowerTarget missing;
    missing.s = 2;
    CHECK_THROWS_AS(
        empirical_reliability(plan, make_reference_plan(plan), spec, missing,
                              4, 1, ReliabilityOptions{.grid_points = 16}),
        DomainError);
    CoefficientCache dummy;
    PowerTarget target;
    target.s = 2;
    target.cache = &dummy;
    target.reference_cache = &dummy;
    CHECK_THROWS_AS(empirical_reliability(plan, weak, spec, target, 4, 1,
                                          ReliabilityOptions{.grid_points = 16}),
                    DomainError);
}

TEST_CASE("product factors draw from distinct streams") {
    CHECK(factor2_seed(7) != 7);
    CHECK(factor2_seed(factor2_seed(7)) == 7);
}
