#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wavesim/quadrature.hpp"
#include "wavesim/wavelets.hpp"

namespace wavesim {

// A stationary spectral density f with its square root g and derivative g'.
// f must be even, nonnegative, and vanish at infinity; g = sqrt(f) pointwise.
// The decay declarations feed the quadrature truncation logic: decay_g bounds
// the tail of g itself, decay_g_deriv the tail of g'.
struct SpectralModel {
    std::function<double(double)> f;
    std::function<double(double)> g;
    std::function<double(double)> g_deriv;
    DecayClass decay_g = DecayClass::polynomial(2.0);
    DecayClass decay_g_deriv = DecayClass::polynomial(3.0);
    std::string family_id;
    std::map<std::string, double> params;
    bool admissibility_declared = false;
};

// The four theorem constants for one (density, wavelet) pair plus the
// variance R0 = integral of f.
struct PlanConstants {
    double A = 0.0;
    double B = 0.0;
    double A1 = 0.0;
    double B1 = 0.0;
    double R0 = 0.0;
};

// Built-in families:
//   "rational_even":  f(y) = (1 + y^{2n})^{-2},            param n >= 2
//   "lorentz_pow":    f(y) = (1 + y^2)^{-2n},              param n >= 2
//   "two_bump":       f(y) = (u(y-a) + u(y+a))^2 with
//                     u(x) = (1 + x^2)^{-m},               params m >= 2, a
// All come with closed-form g and g' and declared admissibility.
// Throws DomainError on unknown family or parameter violation.
SpectralModel make_density(const std::string& family_id,
                           const std::map<std::string, double>& params);

// Density scaled by c^2 (so g scales by c); used by scaling property checks.
SpectralModel scale_density(const SpectralModel& model, double c);

// Correlation function R(tau) = integral of f(y) exp(-i y tau) dy.  Real by
// evenness of f; |R(tau)| <= R(0).
double correlation(const SpectralModel& model, double tau);

// One admissibility condition: its defining expression, the computed value
// when finite, and a divergence flag from the growing-shell test.
struct AdmissibilityCondition {
    std::string name;
    double value = 0.0;
    bool finite = false;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCondition> conditions;
    bool all_finite = false;
};

// Numerically certifies the integrability conditions the truncation theory
// assumes: finiteness of int g, int |g'||y|, int g|y|, int |g'||phi_hat|,
// int g|phi_hat'|, and boundedness of sup|phi_hat| and sup g.  Divergence is
// detected by dyadic shells whose partial integrals fail to decay; the report
// carries failures instead of throwing.
AdmissibilityReport check_admissibility(const SpectralModel& model,
                                        const WaveletTransforms& wt);

// A = (C2/sqrt(2pi)) int (|g'||y| + g),  B  = (C2/sqrt(2pi)) int g|y|,
// A1 = (1/sqrt(2pi)) int (|g'||phi_hat| + g|phi_hat'|),
// B1 = (1/sqrt(2pi)) int g|phi_hat|,     R0 = int f.
// Each integral at rel_tol 1e-8.
PlanConstants plan_constants(const SpectralModel& model,
                             const WaveletTransforms& wt);

}  // namespace wavesim
