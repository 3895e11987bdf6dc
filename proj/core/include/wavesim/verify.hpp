#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "wavesim/coeffs.hpp"
#include "wavesim/planner.hpp"
#include "wavesim/sampler.hpp"

namespace wavesim {

struct CovarianceEstimate {
    double lag = 0.0;
    double estimate = 0.0;
    double standard_error = 0.0;
};

struct VerificationReport {
    double variance_deficit_max = 0.0;
    double budget = 0.0;
    int exceedance_count = 0;
    int replications = 0;
    double wilson_upper_95 = 0.0;
    double worst_norm = 0.0;
    int grid_points_used = 0;
    std::vector<CovarianceEstimate> covariance_errors;
};

// Max over t_samples of R(0) - sum of included coefficient squares, all
// sums taken over the plan's index set through the cache profiles.  By
// orthonormality of the expansion variables this equals the pointwise
// mean-square truncation error.  Throws NegativeDeficit below -1e-6: the
// included energy exceeding R(0) contradicts Bessel's inequality and means
// the quadrature or the cache is inconsistent.
double variance_deficit(const TruncationPlan& plan,
                        const CoefficientCache& cache,
                        const SpectralModel& model,
                        const std::vector<double>& t_samples);

// Energy sum alone (no R(0) subtraction) at one t; the Parseval exhaustion
// checks use it directly.
double coefficient_energy(const TruncationPlan& plan,
                          const CoefficientCache& cache, double t);

struct PowerTarget {
    long long s = 1;
    const CoefficientCache* cache = nullptr;
    const CoefficientCache* reference_cache = nullptr;
};

struct ProductTarget {
    const TruncationPlan* plan2 = nullptr;
    const TruncationPlan* reference_plan2 = nullptr;
    const CoefficientCache* cache1 = nullptr;
    const CoefficientCache* reference_cache1 = nullptr;
    const CoefficientCache* cache2 = nullptr;
    const CoefficientCache* reference_cache2 = nullptr;
};

using ReliabilityTarget = std::variant<PowerTarget, ProductTarget>;

struct ReliabilityOptions {
    int grid_points = 512;
    // Doubling the grid must move the first replication's norm by less than
    // this fraction, else the grid refines (up to max_grid_doublings).
    double grid_refine_tol = 0.01;
    int max_grid_doublings = 3;
    int workers = 0;
};

// Monte Carlo estimate of P{ ||target_ref - target||_p > epsilon } where the
// reference model (same draws, dominating plan) stands in for the
// inaccessible true process.  The report carries the exceedance count and
// its Wilson 95% upper bound; replications run on worker threads with
// per-replication results reduced in index order, so the outcome does not
// depend on the worker count.
VerificationReport empirical_reliability(const TruncationPlan& plan,
                                         const TruncationPlan& reference_plan,
                                         const AccuracySpec& spec,
                                         const ReliabilityTarget& target,
                                         int replications, std::uint64_t seed,
                                         const ReliabilityOptions& opts = {});

// Covariance estimates at the requested lags, averaged over the time grid
// within each path and over paths, with jackknife (leave-one-path-out)
// standard errors.  Requires at least 100 paths.
std::vector<CovarianceEstimate> empirical_covariance(
    const std::vector<SamplePath>& paths, const std::vector<double>& lags);

struct MomentCheck {
    double p = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    double standard_error = 0.0;
    bool pass = false;
};

// Checks the sub-Gaussian moment inequality E|xi|^p <= p 2^{p/2} tau^p
// Gamma(p/2) on a sample; PASS allows 3 Monte Carlo standard errors of slack
// above the bound.
MomentCheck moment_inequality_check(const std::vector<double>& samples,
                                    double tau, double p);

// Wilson score upper confidence bound for a binomial proportion.
double wilson_upper(int exceedances, int n, double z = 1.959963984540054);

// Seed for the second factor of a product process.  The two factors must be
// independent, so factor 2 draws from a salted copy of the run seed; every
// consumer (simulation and reliability runs) goes through this one function.
std::uint64_t factor2_seed(std::uint64_t seed);

// ( integral over the path's time range of |value|^p )^{1/p} by the
// composite trapezoid rule on the path's own grid.
double lp_norm_trapezoid(const SamplePath& path, double p);

}  // namespace wavesim
