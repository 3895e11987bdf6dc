#pragma once

#include <complex>
#include <functional>

#include "wavesim/errors.hpp"

namespace wavesim {

// How an integrand decays at infinity.  The quadrature uses this to pick a
// finite truncation radius with a certified analytic tail bound instead of
// integrating to a guessed cutoff.
struct DecayClass {
    enum class Kind { Polynomial, Exponential, CompactSupport };

    Kind kind;
    // Polynomial: |h(y)| ~ C/|y|^q with q > 1 (the stored exponent).
    // Exponential: |h(y)| <~ C e^{-alpha |y|} (the stored rate).
    // CompactSupport: h(y) = 0 for |y| > R (the stored radius).
    double value;

    static DecayClass polynomial(double exponent);
    static DecayClass exponential(double rate);
    static DecayClass compact_support(double radius);
};

struct Integrand {
    std::function<std::complex<double>(double)> eval;
    DecayClass decay;
};

struct QuadratureResult {
    std::complex<double> value;
    double abs_error_estimate;
    int panels_used;
};

struct QuadratureOptions {
    double abs_tol_floor = 1e-12;
    int max_panels = 4000;
    // Oscillatory integrals: initial panel width as a fraction of the period.
    double period_fraction = 0.5;
    // Factor by which the declared-decay spot check at 2R may exceed the
    // envelope implied by the declared class before we reject the declaration.
    double decay_check_slack = 50.0;
};

// The 15-point Kronrod rule on [-1, 1]: abscissa magnitudes (nodes come in
// +/- pairs, last entry is the centre) and matching weights.  Exposed for
// composite evaluators that reuse one node set across many phase factors.
struct Kronrod15 {
    static const double abscissae[8];
    static const double weights[8];
};

// Integral of h over the whole real line.  Truncates using the decay class
// (tail bound folded into the error estimate), then drives an adaptive
// Gauss-Kronrod refinement until the total estimated error is below
// max(abs_tol_floor, rel_tol * |value|).  Throws NonConvergence if the panel
// cap is reached first and DomainError if the declared decay fails a spot
// check beyond the truncation radius.
QuadratureResult integrate_line(const Integrand& h, double rel_tol,
                                const QuadratureOptions& opts = {});

// Integral of envelope(y) * exp(-i * frequency * y) over the real line.
// Same contract as integrate_line; the initial partition is held below a
// fixed fraction of the oscillation period so no panel straddles many
// cycles before refinement starts.
QuadratureResult integrate_oscillatory(const Integrand& envelope,
                                       double frequency, double rel_tol,
                                       const QuadratureOptions& opts = {});

// Adaptive integral over a finite interval [a, b]; no decay declaration
// involved.  Admissibility shells and tests use it directly.
QuadratureResult integrate_interval(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double rel_tol, const QuadratureOptions& opts = {});

}  // namespace wavesim
