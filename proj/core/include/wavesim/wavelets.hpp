#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "wavesim/errors.hpp"

namespace wavesim {

struct WaveletSpec {
    enum class Family { Meyer, Daubechies };

    Family family = Family::Meyer;
    int order = 0;           // Daubechies only, >= 1
    int product_depth = 24;  // Daubechies only, >= 8

    static WaveletSpec meyer();
    static WaveletSpec daubechies(int order, int product_depth = 24);
    std::string name() const;
};

// Frequency-domain evaluators for one wavelet family, immutable after
// construction.  phi_hat is the scaling-function transform, psi_hat the
// mother-wavelet transform; C1 and C2 are certified sup bounds on |psi_hat|
// and |psi_hat'| (grid maxima times a 1.05 safety factor).
struct WaveletTransforms {
    WaveletSpec spec;
    std::function<std::complex<double>(double)> phi_hat;
    std::function<std::complex<double>(double)> psi_hat;
    std::function<std::complex<double>(double)> phi_hat_deriv;
    std::function<std::complex<double>(double)> psi_hat_deriv;
    double C1 = 0.0;
    double C2 = 0.0;
    // Radii beyond which the transforms are exactly zero, or 0 when the
    // support is unbounded (Daubechies).  Integrand builders use them to
    // pick decay declarations.
    double phi_support_radius = 0.0;
    double psi_support_radius = 0.0;
};

// Meyer wavelet with the degree-7 polynomial transition
// nu(x) = x^4 (35 - 84x + 70x^2 - 20x^3).  phi_hat is 1 on |y| <= 2pi/3,
// supported in |y| <= 4pi/3; psi_hat is supported in 2pi/3 <= |y| <= 8pi/3.
// Derivatives are analytic (chain rule on the closed forms).
WaveletTransforms build_meyer();

// Daubechies wavelet of the given order via the truncated infinite product
// phi_hat(y) = prod_{j=1..depth} m0(y / 2^j).  Derivatives by central finite
// differences with step chosen for <= 1e-6 absolute error.  Throws
// DomainError for order < 1 or product_depth < 8.
WaveletTransforms build_daubechies(int order, int product_depth = 24);

// Low-pass filter taps h_n (sum h_n = sqrt(2)) for the Daubechies family,
// by spectral factorization.  Exposed for tests against published tables.
std::vector<double> daubechies_filter(int order);

// Grid maxima of |psi_hat| and |psi_hat'| over [-scan_radius, scan_radius],
// each multiplied by 1.05.  The grid is dense and uniform near the origin
// and logarithmic in the far field where the transforms only decay.  Throws
// ScanTooNarrow unless |psi_hat(scan_radius)| < 1e-6.
std::pair<double, double> estimate_sup_bounds(const WaveletTransforms& wt,
                                              double scan_radius,
                                              int scan_points);

}  // namespace wavesim
