#include "wavesim/wavelets.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace wavesim {

namespace {

constexpr double kPi = std::numbers::pi;
using Cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Meyer closed forms.  The transition polynomial nu has third-order contact
// with 0 at x=0 and (by nu(1-x) = 1-nu(x)) with 1 at x=1, so phi_hat is C^3
// everywhere and psi_hat' is bounded.

double nu(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * x * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
}

double nu_deriv(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double omx = 1.0 - x;
    return 140.0 * x * x * x * omx * omx * omx;
}

double meyer_phi(double y) {
    const double a = std::abs(y);
    if (a <= 2.0 * kPi / 3.0) return 1.0;
    if (a >= 4.0 * kPi / 3.0) return 0.0;
    return std::cos(kPi / 2.0 * nu(3.0 * a / (2.0 * kPi) - 1.0));
}

double meyer_phi_deriv(double y) {
    const double a = std::abs(y);
    if (a <= 2.0 * kPi / 3.0 || a >= 4.0 * kPi / 3.0) return 0.0;
    const double x = 3.0 * a / (2.0 * kPi) - 1.0;
    const double d =
        -std::sin(kPi / 2.0 * nu(x)) * (kPi / 2.0) * nu_deriv(x) * 3.0 /
        (2.0 * kPi);
    return y >= 0.0 ? d : -d;
}

// Principal-branch wrap into [-pi, pi); m0 must be 2pi-periodic while
// meyer_phi is not, so the argument is wrapped before scaling.
double wrap_pi(double x) {
    return x - 2.0 * kPi * std::floor((x + kPi) / (2.0 * kPi));
}

double meyer_m0(double y) { return meyer_phi(2.0 * wrap_pi(y)); }
double meyer_m0_deriv(double y) { return 2.0 * meyer_phi_deriv(2.0 * wrap_pi(y)); }

Cplx meyer_psi(double y) {
    const double mag = meyer_m0(y / 2.0 + kPi) * meyer_phi(y / 2.0);
    if (mag == 0.0) return 0.0;
    return std::polar(1.0, -y / 2.0) * mag;
}

Cplx meyer_psi_deriv(double y) {
    const double m = meyer_m0(y / 2.0 + kPi);
    const double f = meyer_phi(y / 2.0);
    const double md = meyer_m0_deriv(y / 2.0 + kPi);
    const double fd = meyer_phi_deriv(y / 2.0);
    const Cplx phase = std::polar(1.0, -y / 2.0);
    return phase * (Cplx(0.0, -0.5) * (m * f) + 0.5 * (md * f + m * fd));
}

// ---------------------------------------------------------------------------
// Daubechies filter by spectral factorization.  The halfband polynomial
// P_N(y) = sum_{k<N} C(N-1+k, k) y^k is rewritten in z = e^{-iw} through
// y z = -(z-1)^2 / 4, the 2N-2 roots are split by the unit circle, and the
// minimum-phase factor Q (Q(1) = 1) joins the N-fold averaging filter.

std::vector<double> poly_mul(const std::vector<double>& a,
                             const std::vector<double>& b) {
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

double binomial(int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
    return v;
}

std::vector<double> halfband_in_z(int N) {
    // z^{N-1} P_N(y(z)) as coefficients of z^0 .. z^{2N-2}.
    std::vector<double> acc(2 * N - 1, 0.0);
    for (int k = 0; k < N; ++k) {
        // (-1/4)^k C(N-1+k,k) (z-1)^{2k} z^{N-1-k}
        const double scale = binomial(N - 1 + k, k) * std::pow(-0.25, k);
        for (int i = 0; i <= 2 * k; ++i) {
            const double sign = ((2 * k - i) % 2 == 0) ? 1.0 : -1.0;
            acc[static_cast<std::size_t>(N - 1 - k + i)] +=
                scale * sign * binomial(2 * k, i);
        }
    }
    return acc;
}

std::vector<Cplx> poly_roots(const std::vector<double>& coeffs_low_to_high) {
    // Companion matrix of the monic polynomial.
    int deg = static_cast<int>(coeffs_low_to_high.size()) - 1;
    while (deg > 0 && coeffs_low_to_high[static_cast<std::size_t>(deg)] == 0.0)
        --deg;
    if (deg <= 0) return {};
    const double lead = coeffs_low_to_high[static_cast<std::size_t>(deg)];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i < deg; ++i) {
        companion(i, deg - 1) =
            -coeffs_low_to_high[static_cast<std::size_t>(i)] / lead;
        if (i > 0) companion(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<Cplx> roots;
    roots.reserve(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) roots.push_back(solver.eigenvalues()(i));
    return roots;
}

}  // namespace

std::vector<double> daubechies_filter(int order) {
    if (order < 1) throw DomainError("Daubechies order must be >= 1");
    const double sqrt2 = std::sqrt(2.0);
    if (order == 1) return {1.0 / sqrt2, 1.0 / sqrt2};

    const int N = order;
    std::vector<Cplx> roots = poly_roots(halfband_in_z(N));
    std::vector<Cplx> inside;
    for (const Cplx& r : roots) {
        if (std::abs(r) < 1.0) inside.push_back(r);
    }
    if (static_cast<int>(inside.size()) != N - 1) {
        throw Error("spectral factorization lost roots at order " +
                    std::to_string(order));
    }

    std::vector<Cplx> q = {1.0};
    for (const Cplx& r : inside) {
        std::vector<Cplx> next(q.size() + 1, 0.0);
        for (std::size_t i = 0; i < q.size(); ++i) {
            next[i] += q[i];
            next[i + 1] -= r * q[i];
        }
        q = std::move(next);
    }
    Cplx q1 = 0.0;
    for (const Cplx& c : q) q1 += c;
    std::vector<double> q_real(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) q_real[i] = (q[i] / q1).real();

    std::vector<double> avg = {1.0};
    for (int i = 0; i < N; ++i) avg = poly_mul(avg, {0.5, 0.5});
    std::vector<double> m = poly_mul(avg, q_real);

    std::vector<double> h(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) h[i] = sqrt2 * m[i];
    return h;
}

WaveletSpec WaveletSpec::meyer() { return {Family::Meyer, 0, 0}; }

WaveletSpec WaveletSpec::daubechies(int order, int product_depth) {
    return {Family::Daubechies, order, product_depth};
}

std::string WaveletSpec::name() const {
    if (family == Family::Meyer) return "meyer";
    return "daubechies" + std::to_string(order);
}

namespace {

struct DaubEval {
    std::vector<double> taps;
    int depth;
    double mu;  // first moment of the filter; phases the truncated tail

    Cplx m0(double w) const {
        // Horner in e^{-iw}.
        const Cplx z = std::polar(1.0, -w);
        Cplx acc = 0.0;
        for (std::size_t n = taps.size(); n-- > 0;) acc = acc * z + taps[n];
        return acc / std::sqrt(2.0);
    }

    // Truncated product with a first-order phase correction for the dropped
    // tail: prod_{j>depth} m0(y/2^j) ~ exp(-i mu y / 2^depth), which makes
    // doubling the depth a sub-1e-9 perturbation at the default depth.
    Cplx phi(double y) const {
        Cplx acc = std::polar(1.0, -mu * y * std::ldexp(1.0, -depth));
        double arg = y;
        for (int j = 0; j < depth; ++j) {
            arg *= 0.5;
            acc *= m0(arg);
            if (acc == 0.0) break;
        }
        return acc;
    }

    Cplx psi(double y) const {
        return std::conj(m0(y / 2.0 + kPi)) * std::polar(1.0, -y / 2.0) *
               phi(y / 2.0);
    }
};

// Grid for sup scans: uniform where the transforms peak, logarithmic in the
// decay region.  |psi_hat(-y)| = |psi_hat(y)| for real filters, so y >= 0
// suffices.
std::vector<double> sup_scan_grid(double scan_radius, int scan_points) {
    std::vector<double> ys;
    const double r0 = std::min(scan_radius, 64.0);
    ys.reserve(static_cast<std::size_t>(scan_points) * 5);
    for (int i = 0; i < scan_points; ++i) {
        ys.push_back(r0 * i / (scan_points - 1));
    }
    if (scan_radius > r0) {
        const int logn = 4 * scan_points;
        const double ratio = std::log(scan_radius / r0);
        for (int i = 1; i <= logn; ++i) {
            ys.push_back(r0 * std::exp(ratio * i / logn));
        }
    }
    return ys;
}

}  // namespace

std::pair<double, double> estimate_sup_bounds(const WaveletTransforms& wt,
                                              double scan_radius,
                                              int scan_points) {
    if (!(scan_radius > 0.0) || scan_points < 16) {
        throw DomainError("sup scan needs a positive radius and >= 16 points");
    }
    for (double y : {scan_radius, 0.997 * scan_radius}) {
        if (std::abs(wt.psi_hat(y)) >= 1e-6) {
            throw ScanTooNarrow(
                "|psi_hat| still " + std::to_string(std::abs(wt.psi_hat(y))) +
                " at scan radius " + std::to_string(scan_radius));
        }
    }
    double sup_psi = 0.0;
    double sup_dpsi = 0.0;
    for (double y : sup_scan_grid(scan_radius, scan_points)) {
        sup_psi = std::max(sup_psi, std::abs(wt.psi_hat(y)));
        sup_dpsi = std::max(sup_dpsi, std::abs(wt.psi_hat_deriv(y)));
    }
    return {1.05 * sup_psi, 1.05 * sup_dpsi};
}

WaveletTransforms build_meyer() {
    WaveletTransforms wt;
    wt.spec = WaveletSpec::meyer();
    wt.phi_hat = [](double y) { return Cplx(meyer_phi(y), 0.0); };
    wt.phi_hat_deriv = [](double y) { return Cplx(meyer_phi_deriv(y), 0.0); };
    wt.psi_hat = [](double y) { return meyer_psi(y); };
    wt.psi_hat_deriv = [](double y) { return meyer_psi_deriv(y); };
    wt.phi_support_radius = 4.0 * kPi / 3.0;
    wt.psi_support_radius = 8.0 * kPi / 3.0;
    auto [c1, c2] = estimate_sup_bounds(wt, 16.0, 20001);
    wt.C1 = c1;
    wt.C2 = c2;
    return wt;
}

WaveletTransforms build_daubechies(int order, int product_depth) {
    if (order < 1) throw DomainError("Daubechies order must be >= 1");
    if (product_depth < 8) {
        throw DomainError("Daubechies product depth must be >= 8");
    }
    DaubEval ev;
    ev.taps = daubechies_filter(order);
    ev.depth = product_depth;
    double mu = 0.0;
    for (std::size_t n = 0; n < ev.taps.size(); ++n) {
        mu += static_cast<double>(n) * ev.taps[n];
    }
    ev.mu = mu / std::sqrt(2.0);

    WaveletTransforms wt;
    wt.spec = WaveletSpec::daubechies(order, product_depth);
    const double fd_step = 1e-5;
    wt.phi_hat = [ev](double y) { return ev.phi(y); };
    wt.psi_hat = [ev](double y) { return ev.psi(y); };
    wt.phi_hat_deriv = [ev, fd_step](double y) {
        return (ev.phi(y + fd_step) - ev.phi(y - fd_step)) / (2.0 * fd_step);
    };
    wt.psi_hat_deriv = [ev, fd_step](double y) {
        return (ev.psi(y + fd_step) - ev.psi(y - fd_step)) / (2.0 * fd_step);
    };
    wt.phi_support_radius = 0.0;
    wt.psi_support_radius = 0.0;

    // The decay of |psi_hat| is only polynomial, with exponent shrinking as
    // the order drops (Haar needs radii in the millions), so grow the radius
    // until the boundary condition of the scan holds and scan once.
    double radius = 64.0;
    while (std::abs(wt.psi_hat(radius)) >= 1e-6 ||
           std::abs(wt.psi_hat(0.997 * radius)) >= 1e-6) {
        radius *= 2.0;
        if (radius > 1e9) {
            throw ScanTooNarrow("could not find a quiet scan boundary");
        }
    }
    auto [c1, c2] = estimate_sup_bounds(wt, radius, 20001);
    wt.C1 = c1;
    wt.C2 = c2;
    return wt;
}

}  // namespace wavesim
