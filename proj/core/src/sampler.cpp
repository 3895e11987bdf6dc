#include "wavesim/sampler.hpp"

#include <cmath>

namespace wavesim {

namespace {

void check_plan_shape(const TruncationPlan& plan) {
    if (plan.N0 < 2 || plan.N < 1 ||
        plan.M.size() != static_cast<std::size_t>(plan.N)) {
        throw DomainError("truncation plan is malformed");
    }
    for (long long m : plan.M) {
        if (m < 2) throw DomainError("every detail count must exceed 1");
    }
}

}  // namespace

double ModelRealization::xi0(long long k) const {
    if (k <= -plan.N0 || k >= plan.N0) {
        throw DomainError("scaling index outside the plan");
    }
    return gaussian_draw(seed, replication, 0, k);
}

double ModelRealization::eta(int j, long long k) const {
    if (j < 0 || static_cast<std::size_t>(j) >= plan.M.size()) {
        throw DomainError("detail level outside the plan");
    }
    const long long mj = plan.M[static_cast<std::size_t>(j)];
    if (k <= -mj || k >= mj) {
        throw DomainError("detail index outside the plan");
    }
    return gaussian_draw(seed, replication, 1 + static_cast<std::uint64_t>(j),
                         k);
}

ModelRealization draw_coefficients(const TruncationPlan& plan,
                                   std::uint64_t seed,
                                   std::uint64_t replication) {
    check_plan_shape(plan);
    ModelRealization r;
    r.plan = plan;
    r.seed = seed;
    r.replication = replication;
    return r;
}

std::vector<double> uniform_grid(double T, int n_points) {
    if (!(T > 0.0)) throw DomainError("T must be positive");
    if (n_points < 2) throw DomainError("grid needs at least two points");
    std::vector<double> t(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        t[static_cast<std::size_t>(i)] =
            T * static_cast<double>(i) / static_cast<double>(n_points - 1);
    }
    t.back() = T;
    return t;
}

SamplePath evaluate_base(const ModelRealization& realization,
                         const CoefficientCache& cache,
                         const std::vector<double>& times) {
    const TruncationPlan& plan = realization.plan;
    check_plan_shape(plan);
    if (cache.plan.N0 != plan.N0 || cache.plan.N != plan.N ||
        cache.plan.M != plan.M) {
        throw DomainError("cache was built for a different truncation plan");
    }

    SamplePath path;
    path.kind = SamplePath::Kind::Base;
    path.power = 1;
    path.times = times;
    path.values.reserve(times.size());

    for (double t : times) {
        if (t < -1e-12 || t > cache.T * (1.0 + 1e-12) + 1e-12) {
            throw CacheMiss("evaluation time outside [0, T]");
        }
        double acc = 0.0;
        const ProfileGrid& ag = cache.a00_grid;
        if (!ag.empty()) {
            // u = t - k inside the window <=> k in [t - max_u, t - min_u].
            long long k_lo = static_cast<long long>(
                std::ceil(t - ag.max_u() - 1e-12));
            long long k_hi = static_cast<long long>(
                std::floor(t - ag.min_u() + 1e-12));
            k_lo = std::max(k_lo, -(plan.N0 - 1));
            k_hi = std::min(k_hi, plan.N0 - 1);
            for (long long k = k_lo; k <= k_hi; ++k) {
                acc += realization.xi0(k) * ag(t - static_cast<double>(k));
            }
        }
        for (int j = 0; j < plan.N; ++j) {
            const ProfileGrid& g = cache.bj0_grids[static_cast<std::size_t>(j)];
            if (g.empty()) continue;
            const double scale = std::ldexp(1.0, j);
            const long long mj = plan.M[static_cast<std::size_t>(j)];
            long long k_lo = static_cast<long long>(
                std::ceil(scale * (t - g.max_u()) - 1e-9));
            long long k_hi = static_cast<long long>(
                std::floor(scale * (t - g.min_u()) + 1e-9));
            k_lo = std::max(k_lo, -(mj - 1));
            k_hi = std::min(k_hi, mj - 1);
            for (long long k = k_lo; k <= k_hi; ++k) {
                acc += realization.eta(j, k) *
                       g(t - std::ldexp(static_cast<double>(k), -j));
            }
        }
        path.values.push_back(acc);
    }
    return path;
}

SamplePath power_path(const SamplePath& base, long long s) {
    if (s < 1) throw DomainError("power exponent s must be at least 1");
    SamplePath out;
    out.times = base.times;
    out.kind = SamplePath::Kind::Power;
    out.power = s;
    out.values.reserve(base.values.size());
    for (double v : base.values) {
        out.values.push_back(std::pow(v, static_cast<double>(s)));
    }
    return out;
}

SamplePath product_path(const SamplePath& base1, const SamplePath& base2) {
    if (base1.times.size() != base2.times.size()) {
        throw GridMismatch("product factors live on different grids");
    }
    for (std::size_t i = 0; i < base1.times.size(); ++i) {
        if (base1.times[i] != base2.times[i]) {
            throw GridMismatch("product factors live on different grids");
        }
    }
    SamplePath out;
    out.times = base1.times;
    out.kind = SamplePath::Kind::Product;
    out.power = 1;
    out.values.reserve(base1.values.size());
    for (std::size_t i = 0; i < base1.values.size(); ++i) {
        out.values.push_back(base1.values[i] * base2.values[i]);
    }
    return out;
}

}  // namespace wavesim
