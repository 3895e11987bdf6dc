#include "wavesim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wavesim/gamma.hpp"

namespace wavesim {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Minimal integer strictly above x, never below 2 (every count in the model
// definition must exceed 1).  Infinite or absurd bounds are reported by the
// caller against its cap, so just saturate here.
long long strictly_above(double x) {
    if (!(x < 9.0e18)) return std::numeric_limits<long long>::max();
    if (x < 1.0) return 2;
    double fl = std::floor(x);
    long long n = static_cast<long long>(fl) + 1;
    while (static_cast<double>(n) <= x) ++n;
    return std::max<long long>(n, 2);
}

double logsumexp(const std::vector<double>& logs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : logs) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - m);
    return m + std::log(acc);
}

void check_count(long long value, long long cap, const char* name) {
    if (value > cap) {
        throw BudgetTooTight(std::string(name) + " = " +
                             std::to_string(value) +
                             " exceeds the configured count cap " +
                             std::to_string(cap));
    }
}

}  // namespace

AccuracySpec AccuracySpec::validated(double epsilon, double delta, double p,
                                     double T) {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw DomainError("delta must lie in (0, 1)");
    }
    if (!(p >= 1.0)) throw DomainError("p must be at least 1");
    if (!(T > 0.0)) throw DomainError("T must be positive");
    return {epsilon, delta, p, T};
}

long long TruncationPlan::total_terms() const {
    long long total = 2 * N0 - 1;
    for (long long m : M) total += 2 * m - 1;
    return total;
}

double delta1_for_power(const AccuracySpec& spec, long long s, double R0) {
    AccuracySpec::validated(spec.epsilon, spec.delta, spec.p, spec.T);
    if (s < 1) throw DomainError("power exponent s must be at least 1");
    if (!(R0 > 0.0)) throw DomainError("R0 must be positive");
    const double p = spec.p;

    double log_dstar;
    if (s == 1) {
        // The product-moment constant degenerates at s = 1 (its bracket
        // would want Gamma(0)), so the budget comes straight from the
        // sub-Gaussian moment bound for the base process.
        log_dstar = std::log(spec.T) + std::log(p) + 0.5 * p * kLn2 +
                    log_gamma(p / 2.0);
    } else {
        if (!(p >= 2.0)) {
            throw DomainError("power processes with s >= 2 require p >= 2");
        }
        const double sm1 = static_cast<double>(s - 1);
        // bracket = (s-1) Gamma(p(s-1))
        //         + sum_{k=1}^{s-2} sqrt(k (s-1-k) Gamma(2pk) Gamma(2p(s-1-k)))
        std::vector<double> logs;
        logs.push_back(std::log(sm1) + log_gamma(p * sm1));
        for (long long k = 1; k <= s - 2; ++k) {
            const double kk = static_cast<double>(k);
            logs.push_back(0.5 * (std::log(kk) + std::log(sm1 - kk) +
                                  log_gamma(2.0 * p * kk) +
                                  log_gamma(2.0 * p * (sm1 - kk))));
        }
        const double log_bracket = logsumexp(logs);
        log_dstar = 0.5 * (p * static_cast<double>(s) + 3.0) * kLn2 +
                    std::log(spec.T) + std::log(p) + 0.5 * log_gamma(p) +
                    (p - 0.5) * std::log(static_cast<double>(s)) +
                    0.5 * p * sm1 * std::log(R0) + 0.5 * log_bracket;
    }

    const double log_delta1 = (2.0 / p) * std::log(spec.delta) +
                              2.0 * std::log(spec.epsilon) -
                              (2.0 / p) * log_dstar;
    const double delta1 = std::exp(log_delta1);
    if (!(delta1 > 0.0) || !std::isfinite(delta1)) {
        throw DomainError("variance budget underflowed; target is too strict");
    }
    return delta1;
}

TruncationPlan truncation_from_budget(double budget,
                                      const PlanConstants& constants, double T,
                                      const PlannerOptions& opts) {
    if (!(budget > 0.0)) throw DomainError("variance budget must be positive");
    if (!(T > 0.0)) throw DomainError("T must be positive");
    if (!(opts.safety_margin >= 1.0)) {
        throw DomainError("safety margin must be >= 1");
    }
    for (double v : {constants.A, constants.B, constants.A1, constants.B1}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw DomainError("plan constants must be finite and nonnegative");
        }
    }

    const double ab_t = constants.A + constants.B * T;
    const double a1b1_t = constants.A1 + constants.B1 * T;

    const double n0_bound = 6.0 / budget * a1b1_t * a1b1_t + 1.0;

    // Both logarithm arguments can be 0 for a vanishing density; log(0)
    // = -inf drops the bound to the minimal legal count.
    const double arg1 = 72.0 * ab_t * ab_t / (5.0 * budget);
    const double arg2 = 18.0 * constants.B * constants.B / (7.0 * budget);
    const double n_bound =
        std::max(1.0 + (arg1 > 0.0 ? std::log2(arg1)
                                   : -std::numeric_limits<double>::infinity()),
                 1.0 + (arg2 > 0.0 ? std::log(arg2) / std::log(8.0)
                                   : -std::numeric_limits<double>::infinity()));

    TruncationPlan plan;
    plan.variance_budget = budget;
    plan.N0 = strictly_above(n0_bound);
    plan.N = strictly_above(n_bound);

    const double m_bound =
        1.0 + 12.0 / budget * ab_t * ab_t *
                  (1.0 - std::exp2(-static_cast<double>(plan.N)));
    const long long m_count = strictly_above(m_bound);

    if (opts.safety_margin > 1.0) {
        auto widen = [&](long long v) {
            const double w = std::ceil(static_cast<double>(v) * opts.safety_margin);
            return w < 9.0e18 ? static_cast<long long>(w)
                              : std::numeric_limits<long long>::max();
        };
        plan.N0 = widen(plan.N0);
        plan.N = widen(plan.N);
        plan.M.assign(static_cast<std::size_t>(plan.N), widen(m_count));
    } else {
        plan.M.assign(static_cast<std::size_t>(plan.N), m_count);
    }

    check_count(plan.N0, opts.count_cap, "N0");
    check_count(plan.N, opts.count_cap, "N");
    check_count(plan.M.empty() ? 2 : plan.M.front(), opts.count_cap, "M_j");
    return plan;
}

TruncationPlan plan_power(const AccuracySpec& spec, long long s,
                          const SpectralModel& model,
                          const WaveletTransforms& wt,
                          const PlannerOptions& opts) {
    const AdmissibilityReport adm = check_admissibility(model, wt);
    if (!adm.all_finite) {
        std::string failing;
        for (const auto& cond : adm.conditions) {
            if (!cond.finite) failing = cond.name;
        }
        throw DomainError("density fails admissibility condition: " + failing);
    }
    const PlanConstants constants = plan_constants(model, wt);
    const double budget = delta1_for_power(spec, s, constants.R0);
    return truncation_from_budget(budget, constants, spec.T, opts);
}

ProductPlan plan_product(const AccuracySpec& spec, const SpectralModel& model1,
                         const WaveletTransforms& wt1,
                         const SpectralModel& model2,
                         const WaveletTransforms& wt2,
                         const PlannerOptions& opts) {
    AccuracySpec::validated(spec.epsilon, spec.delta, spec.p, spec.T);
    const double p = spec.p;

    for (const auto& pair :
         {std::pair<const SpectralModel*, const WaveletTransforms*>{&model1,
                                                                    &wt1},
          std::pair<const SpectralModel*, const WaveletTransforms*>{&model2,
                                                                    &wt2}}) {
        const AdmissibilityReport adm =
            check_admissibility(*pair.first, *pair.second);
        if (!adm.all_finite) {
            std::string failing;
            for (const auto& cond : adm.conditions) {
                if (!cond.finite) failing = cond.name;
            }
            throw DomainError("density fails admissibility condition: " +
                              failing);
        }
    }

    const PlanConstants c1 = plan_constants(model1, wt1);
    const PlanConstants c2 = plan_constants(model2, wt2);
    if (!(c1.R0 > 0.0) || !(c2.R0 > 0.0)) {
        throw DomainError("product planning needs positive variances");
    }

    const double log_denominator = (2.0 * p + 1.0) * kLn2 + std::log(p) +
                                   log_gamma(p) + std::log(spec.T);
    const double log_delta_hat = (2.0 / p) * std::log(spec.delta) +
                                 2.0 * std::log(spec.epsilon) -
                                 (2.0 / p) * log_denominator;

    ProductPlan pp;
    pp.delta_hat = std::exp(log_delta_hat);
    pp.delta1_star = pp.delta_hat / c2.R0;
    pp.delta2_star = pp.delta_hat / c1.R0;
    pp.plan1 = truncation_from_budget(pp.delta1_star, c1, spec.T, opts);
    pp.plan2 = truncation_from_budget(pp.delta2_star, c2, spec.T, opts);
    return pp;
}

TruncationPlan make_reference_plan(const TruncationPlan& plan) {
    TruncationPlan ref;
    ref.N0 = 4 * plan.N0;
    ref.N = 2 * plan.N;
    ref.M.reserve(static_cast<std::size_t>(ref.N));
    for (long long j = 0; j < ref.N; ++j) {
        const std::size_t src = static_cast<std::size_t>(
            std::min<long long>(j, plan.N - 1));
        ref.M.push_back(4 * plan.M[src]);
    }
    // Its deficit gets certified separately (two orders below the plan's
    // budget); the stored budget documents that target.
    ref.variance_budget = plan.variance_budget / 100.0;
    return ref;
}

}  // namespace wavesim
