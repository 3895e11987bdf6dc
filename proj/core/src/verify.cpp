#include "wavesim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wavesim/gamma.hpp"
#include "wavesim/spectra.hpp"
#include "runtime.hpp"

namespace wavesim {

namespace {

// Independent draw stream for the second product factor.
constexpr std::uint64_t kFactor2Salt = 0x517CC1B727220A95ull;

void check_dominates(const TruncationPlan& ref, const TruncationPlan& plan) {
    bool ok = ref.N0 >= plan.N0 && ref.N >= plan.N;
    if (ok) {
        for (std::size_t j = 0; j < plan.M.size(); ++j) {
            if (ref.M[j] < plan.M[j]) ok = false;
        }
    }
    if (!ok) {
        throw DomainError("reference plan must dominate the model plan "
                          "index-wise");
    }
}

double window_energy(const TruncationPlan& plan, const CoefficientCache& cache,
                     double t) {
    double acc = 0.0;
    const ProfileGrid& ag = cache.a00_grid;
    if (!ag.empty()) {
        long long k_lo =
            static_cast<long long>(std::ceil(t - ag.max_u() - 1e-12));
        long long k_hi =
            static_cast<long long>(std::floor(t - ag.min_u() + 1e-12));
        k_lo = std::max(k_lo, -(plan.N0 - 1));
        k_hi = std::min(k_hi, plan.N0 - 1);
        for (long long k = k_lo; k <= k_hi; ++k) {
            const double v = ag(t - static_cast<double>(k));
            acc += v * v;
        }
    }
    for (int j = 0; j < plan.N; ++j) {
        const ProfileGrid& g = cache.bj0_grids[static_cast<std::size_t>(j)];
        if (g.empty()) continue;
        const double scale = std::ldexp(1.0, j);
        const long long mj = plan.M[static_cast<std::size_t>(j)];
        long long k_lo =
            static_cast<long long>(std::ceil(scale * (t - g.max_u()) - 1e-9));
        long long k_hi =
            static_cast<long long>(std::floor(scale * (t - g.min_u()) + 1e-9));
        k_lo = std::max(k_lo, -(mj - 1));
        k_hi = std::min(k_hi, mj - 1);
        for (long long k = k_lo; k <= k_hi; ++k) {
            const double v = g(t - std::ldexp(static_cast<double>(k), -j));
            acc += v * v;
        }
    }
    return acc;
}

SamplePath subtract(const SamplePath& a, const SamplePath& b) {
    SamplePath d;
    d.times = a.times;
    d.kind = a.kind;
    d.power = a.power;
    d.values.resize(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        d.values[i] = a.values[i] - b.values[i];
    }
    return d;
}

double replication_norm(const TruncationPlan& plan,
                        const TruncationPlan& reference_plan,
                        const AccuracySpec& spec,
                        const ReliabilityTarget& target,
                        const std::vector<double>& grid, std::uint64_t seed,
                        std::uint64_t replication) {
    if (const auto* pt = std::get_if<PowerTarget>(&target)) {
        const SamplePath base = power_path(
            evaluate_base(draw_coefficients(plan, seed, replication),
                          *pt->cache, grid),
            pt->s);
        const SamplePath ref = power_path(
            evaluate_base(draw_coefficients(reference_plan, seed, replication),
                          *pt->reference_cache, grid),
            pt->s);
        return lp_norm_trapezoid(subtract(ref, base), spec.p);
    }
    const auto& prod = std::get<ProductTarget>(target);
    const std::uint64_t seed2 = factor2_seed(seed);
    const SamplePath z = product_path(
        evaluate_base(draw_coefficients(plan, seed, replication), *prod.cache1,
                      grid),
        evaluate_base(draw_coefficients(*prod.plan2, seed2, replication),
                      *prod.cache2, grid));
    const SamplePath z_ref = product_path(
        evaluate_base(draw_coefficients(reference_plan, seed, replication),
                      *prod.reference_cache1, grid),
        evaluate_base(
            draw_coefficients(*prod.reference_plan2, seed2, replication),
            *prod.reference_cache2, grid));
    return lp_norm_trapezoid(subtract(z_ref, z), spec.p);
}

}  // namespace

std::uint64_t factor2_seed(std::uint64_t seed) { return seed ^ kFactor2Salt; }

double coefficient_energy(const TruncationPlan& plan,
                          const CoefficientCache& cache, double t) {
    if (cache.plan.N0 != plan.N0 || cache.plan.N != plan.N ||
        cache.plan.M != plan.M) {
        throw DomainError("cache was built for a different truncation plan");
    }
    return window_energy(plan, cache, t);
}

double variance_deficit(const TruncationPlan& plan,
                        const CoefficientCache& cache,
                        const SpectralModel& model,
                        const std::vector<double>& t_samples) {
    if (t_samples.empty()) throw DomainError("no sample times given");
    const double r0 = correlation(model, 0.0);
    double worst = -std::numeric_limits<double>::infinity();
    for (double t : t_samples) {
        const double deficit = r0 - coefficient_energy(plan, cache, t);
        if (deficit < -1e-6) {
            std::ostringstream os;
            os.precision(17);
            os << "included energy exceeds R(0) by " << -deficit << " at t="
               << t;
            throw NegativeDeficit(os.str());
        }
        worst = std::max(worst, deficit);
    }
    return worst;
}

VerificationReport empirical_reliability(const TruncationPlan& plan,
                                         const TruncationPlan& reference_plan,
                                         const AccuracySpec& spec,
                                         const ReliabilityTarget& target,
                                         int replications, std::uint64_t seed,
                                         const ReliabilityOptions& opts) {
    AccuracySpec::validated(spec.epsilon, spec.delta, spec.p, spec.T);
    if (replications < 1) throw DomainError("need at least one replication");
    if (opts.grid_points < 2) throw DomainError("grid needs at least 2 points");
    check_dominates(reference_plan, plan);
    if (const auto* pt = std::get_if<PowerTarget>(&target)) {
        if (pt->cache == nullptr || pt->reference_cache == nullptr) {
            throw DomainError("power target is missing a cache");
        }
    } else {
        const auto& prod = std::get<ProductTarget>(target);
        if (prod.plan2 == nullptr || prod.reference_plan2 == nullptr ||
            prod.cache1 == nullptr || prod.reference_cache1 == nullptr ||
            prod.cache2 == nullptr || prod.reference_cache2 == nullptr) {
            throw DomainError("product target is missing a plan or cache");
        }
        check_dominates(*prod.reference_plan2, *prod.plan2);
    }

    // Grid sufficiency: double until the first replication's norm stops
    // moving.  The comparison floor 0.1*epsilon keeps norms far below the
    // exceedance threshold from forcing refinements they cannot influence.
    int n = opts.grid_points;
    double probe_norm = replication_norm(plan, reference_plan, spec, target,
                                         uniform_grid(spec.T, n), seed, 0);
    for (int d = 0; d < opts.max_grid_doublings; ++d) {
        const int n2 = 2 * n - 1;
        const double norm2 =
            replication_norm(plan, reference_plan, spec, target,
                             uniform_grid(spec.T, n2), seed, 0);
        if (std::abs(norm2 - probe_norm) <=
            opts.grid_refine_tol *
                std::max(probe_norm, 0.1 * spec.epsilon)) {
            break;
        }
        n = n2;
        probe_norm = norm2;
    }

    const std::vector<double> grid = uniform_grid(spec.T, n);
    std::vector<double> norms(static_cast<std::size_t>(replications), 0.0);
    run_jobs(resolve_workers(opts.workers), replications, [&](int r) {
        norms[static_cast<std::size_t>(r)] =
            replication_norm(plan, reference_plan, spec, target, grid, seed,
                             static_cast<std::uint64_t>(r));
    });

    VerificationReport report;
    report.budget = plan.variance_budget;
    report.replications = replications;
    report.grid_points_used = n;
    for (double v : norms) {
        report.worst_norm = std::max(report.worst_norm, v);
        if (v > spec.epsilon) ++report.exceedance_count;
    }
    report.wilson_upper_95 = wilson_upper(report.exceedance_count,
                                          replications);
    return report;
}

std::vector<CovarianceEstimate> empirical_covariance(
    const std::vector<SamplePath>& paths, const std::vector<double>& lags) {
    if (paths.size() < 100) {
        throw DomainError("covariance estimation needs at least 100 paths");
    }
    const std::vector<double>& times = paths.front().times;
    if (times.size() < 2) throw DomainError("paths need at least two points");
    for (const SamplePath& p : paths) {
        if (p.times != times) {
            throw GridMismatch("covariance paths live on different grids");
        }
    }
    const double dt = times[1] - times[0];
    const std::size_t npaths = paths.size();
    const std::size_t npts = times.size();

    std::vector<CovarianceEstimate> out;
    out.reserve(lags.size());
    for (double lag : lags) {
        const long long d = std::llround(lag / dt);
        if (d < 0 || static_cast<std::size_t>(d) >= npts) {
            throw DomainError("covariance lag outside the path grid");
        }
        const std::size_t pairs = npts - static_cast<std::size_t>(d);
        std::vector<double> per_path(npaths, 0.0);
        for (std::size_t i = 0; i < npaths; ++i) {
            const std::vector<double>& v = paths[i].values;
            double acc = 0.0;
            for (std::size_t m = 0; m < pairs; ++m) {
                acc += v[m] * v[m + static_cast<std::size_t>(d)];
            }
            per_path[i] = acc / static_cast<double>(pairs);
        }
        double mean = 0.0;
        for (double c : per_path) mean += c;
        mean /= static_cast<double>(npaths);
        // Jackknife over paths; for the sample mean this reduces to
        // sd/sqrt(n), computed through the leave-one-out form.
        double ss = 0.0;
        for (double c : per_path) ss += (c - mean) * (c - mean);
        const double se = std::sqrt(
            ss / (static_cast<double>(npaths) *
                  static_cast<double>(npaths - 1)));
        out.push_back({static_cast<double>(d) * dt, mean, se});
    }
    return out;
}

MomentCheck moment_inequality_check(const std::vector<double>& samples,
                                    double tau, double p) {
    if (samples.empty()) throw DomainError("moment check needs samples");
    if (!(tau > 0.0) || !(p > 0.0)) {
        throw DomainError("moment check needs tau > 0 and p > 0");
    }
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += std::pow(std::abs(x), p);
    mean /= n;
    double ss = 0.0;
    for (double x : samples) {
        const double m = std::pow(std::abs(x), p) - mean;
        ss += m * m;
    }
    const double se = std::sqrt(ss / (n * (n - 1.0)));

    MomentCheck check;
    check.p = p;
    check.empirical = mean;
    check.standard_error = se;
    check.bound =
        p * std::exp2(0.5 * p) * std::pow(tau, p) * gamma(0.5 * p);
    check.pass = mean <= check.bound + 3.0 * se;
    return check;
}

double wilson_upper(int exceedances, int n, double z) {
    if (n <= 0) throw DomainError("Wilson bound needs a positive sample size");
    if (exceedances < 0 || exceedances > n) {
        throw DomainError("exceedance count outside [0, n]");
    }
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(exceedances) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = phat + z2 / (2.0 * nn);
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn));
    return (centre + half) / denom;
}

double lp_norm_trapezoid(const SamplePath& path, double p) {
    if (!(p >= 1.0)) throw DomainError("p must be at least 1");
    if (path.times.size() < 2 || path.times.size() != path.values.size()) {
        throw DomainError("path needs a grid of at least two points");
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
        const double dt = path.times[i + 1] - path.times[i];
        total += 0.5 * dt * (std::pow(std::abs(path.values[i]), p) +
                             std::pow(std::abs(path.values[i + 1]), p));
    }
    return std::pow(total, 1.0 / p);
}

}  // namespace wavesim
