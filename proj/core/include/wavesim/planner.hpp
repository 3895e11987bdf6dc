#pragma once

#include <cstdint>
#include <vector>

#include "wavesim/spectra.hpp"

namespace wavesim {

// Target accuracy epsilon with reliability 1-delta in L_p([0,T]).
// p >= 2 for power processes, p >= 1 for products; both enforced at the
// planning entry points, construction only checks the common constraints.
struct AccuracySpec {
    double epsilon;
    double delta;
    double p;
    double T;

    // Throws DomainError unless epsilon > 0, delta in (0,1), T > 0, p >= 1.
    static AccuracySpec validated(double epsilon, double delta, double p,
                                  double T);
};

// Truncation parameters of the model: k runs over |k| <= N0-1 in the scaling
// row and |k| <= M[j]-1 at detail level j = 0..N-1.
struct TruncationPlan {
    long long N0 = 0;
    long long N = 0;
    std::vector<long long> M;
    double variance_budget = 0.0;

    long long total_terms() const;
    long long draw_count() const { return total_terms(); }
};

struct ProductPlan {
    TruncationPlan plan1;
    TruncationPlan plan2;
    double delta_hat = 0.0;
    double delta1_star = 0.0;
    double delta2_star = 0.0;
};

struct PlannerOptions {
    // Cap on each individual count (N0, N, every M_j); a bound exceeding it
    // raises BudgetTooTight.
    long long count_cap = 10'000'000;
    // Multiplies every count after minimal selection (>= 1).
    double safety_margin = 1.0;
};

// Variance budget delta_1 for the power process Y = X^s from the moment
// constant D_s^* of the target (evaluated in log space; Gamma(p(s-1)) alone
// overflows double near p*s ~ 170).  For s = 1 the product-moment constant
// degenerates, so the budget comes from the direct sub-Gaussian moment bound
// instead.  Requires p >= 2 when s >= 2.
double delta1_for_power(const AccuracySpec& spec, long long s, double R0);

// Minimal integer counts strictly satisfying the three truncation
// inequalities for the given budget:
//   N0  > (6/budget)(A1 + B1 T)^2 + 1
//   N   > max{1 + log2(72 (A+BT)^2 / (5 budget)),
//             1 + log8(18 B^2 / (7 budget))}
//   M_j > 1 + (12/budget)(A+BT)^2 (1 - 2^{-N})
// Every count is at least 2 (the model definition requires each > 1); the
// M_j bound is level-independent, so M holds N equal entries.  Throws
// BudgetTooTight if a count would exceed the cap.
TruncationPlan truncation_from_budget(double budget,
                                      const PlanConstants& constants, double T,
                                      const PlannerOptions& opts = {});

// Full pipeline for Y = X^s: constants -> budget -> counts.
TruncationPlan plan_power(const AccuracySpec& spec, long long s,
                          const SpectralModel& model,
                          const WaveletTransforms& wt,
                          const PlannerOptions& opts = {});

// Full pipeline for Z = X1 X2: the shared budget delta_hat is split as
// delta1* = delta_hat / R2(0) and delta2* = delta_hat / R1(0), then each
// factor is planned independently against its own constants.
ProductPlan plan_product(const AccuracySpec& spec, const SpectralModel& model1,
                         const WaveletTransforms& wt1,
                         const SpectralModel& model2,
                         const WaveletTransforms& wt2,
                         const PlannerOptions& opts = {});

// Reference plan for reliability runs: twice the levels, four times the
// per-level counts and the scaling row.  Dominates `plan` index-wise.
TruncationPlan make_reference_plan(const TruncationPlan& plan);

}  // namespace wavesim
