#include "wavesim/quadrature.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace wavesim {

DecayClass DecayClass::polynomial(double exponent) {
    if (!(exponent > 1.0)) {
        throw DomainError("polynomial decay needs exponent > 1 for an "
                          "integrable tail");
    }
    return {Kind::Polynomial, exponent};
}

DecayClass DecayClass::exponential(double rate) {
    if (!(rate > 0.0)) {
        throw DomainError("exponential decay needs a positive rate");
    }
    return {Kind::Exponential, rate};
}

DecayClass DecayClass::compact_support(double radius) {
    if (!(radius > 0.0)) {
        throw DomainError("compact support needs a positive radius");
    }
    return {Kind::CompactSupport, radius};
}

namespace {

using Cplx = std::complex<double>;
using Fn = std::function<Cplx(double)>;

// 15-point Kronrod nodes with the embedded 7-point Gauss rule: odd-indexed
// entries of kXgk are the Gauss nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a = 0.0;
    double b = 0.0;
    Cplx value;
    double err = 0.0;
};

}  // namespace

const double Kronrod15::abscissae[8] = {kXgk[0], kXgk[1], kXgk[2], kXgk[3],
                                        kXgk[4], kXgk[5], kXgk[6], kXgk[7]};
const double Kronrod15::weights[8] = {kWgk[0], kWgk[1], kWgk[2], kWgk[3],
                                      kWgk[4], kWgk[5], kWgk[6], kWgk[7]};

namespace {

Panel eval_panel(const Fn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const Cplx fc = f(c);

    Cplx resk = kWgk[7] * fc;
    Cplx resg = kWg[3] * fc;
    double resabs = kWgk[7] * std::abs(fc);
    Cplx side[7][2];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        side[i][0] = f(c - dx);
        side[i][1] = f(c + dx);
        const Cplx pair_sum = side[i][0] + side[i][1];
        resk += kWgk[i] * pair_sum;
        resabs += kWgk[i] * (std::abs(side[i][0]) + std::abs(side[i][1]));
        if (i % 2 == 1) resg += kWg[i / 2] * pair_sum;
    }

    // resasc-sharpened error in the style of the classic 15-point rule:
    // scale the raw |K15 - G7| difference by how much the integrand deviates
    // from its mean, so smooth panels do not over-report.
    const Cplx reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int i = 0; i < 7; ++i) {
        resasc += kWgk[i] *
                  (std::abs(side[i][0] - reskh) + std::abs(side[i][1] - reskh));
    }
    const double ah = std::abs(h);
    resabs *= ah;
    resasc *= ah;
    double err = std::abs(resk - resg) * ah;
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    const double eps50 = 50.0 * DBL_EPSILON;
    if (resabs > DBL_MIN / eps50) err = std::max(eps50 * resabs, err);

    Panel p;
    p.a = a;
    p.b = b;
    p.value = resk * h;
    p.err = err;
    return p;
}

bool splittable(double a, double b) {
    return (b - a) > 8.0 * DBL_EPSILON * std::max({std::abs(a), std::abs(b), 1.0});
}

QuadratureResult refine(const Fn& f, std::vector<Panel> panels, double rel_tol,
                        const QuadratureOptions& opts, double tail_bound) {
    Cplx total = 0.0;
    double err_total = tail_bound;
    // Heap of (error, index); entries go stale when a panel is split, so
    // each popped index is checked against the live error before use.
    std::priority_queue<std::pair<double, std::size_t>> heap;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        total += panels[i].value;
        err_total += panels[i].err;
        if (splittable(panels[i].a, panels[i].b)) heap.push({panels[i].err, i});
    }

    auto target = [&] {
        return std::max(opts.abs_tol_floor, rel_tol * std::abs(total));
    };

    while (err_total > target()) {
        if (heap.empty()) {
            throw NonConvergence(
                "quadrature stalled: no splittable panel left at error " +
                    std::to_string(err_total),
                err_total);
        }
        auto [err, idx] = heap.top();
        heap.pop();
        if (err != panels[idx].err) continue;  // stale entry
        if (static_cast<int>(panels.size()) + 1 >
            std::max(opts.max_panels, 2)) {
            throw NonConvergence(
                "quadrature panel limit reached; the integrand does not "
                "converge under its decay declaration",
                err_total);
        }
        const Panel old = panels[idx];
        const double mid = 0.5 * (old.a + old.b);
        Panel left = eval_panel(f, old.a, mid);
        Panel right = eval_panel(f, mid, old.b);
        total += left.value + right.value - old.value;
        err_total += left.err + right.err - old.err;
        panels[idx] = left;
        if (splittable(left.a, left.b)) heap.push({left.err, idx});
        panels.push_back(right);
        if (splittable(right.a, right.b)) {
            heap.push({right.err, panels.size() - 1});
        }
    }

    QuadratureResult r;
    r.value = total;
    r.abs_error_estimate = err_total;
    r.panels_used = static_cast<int>(panels.size());
    return r;
}

// Tail estimate beyond radius R from the declared decay class, with the
// class constant fitted to samples of |h| near R.  The sample multipliers
// are slightly irrational so an isolated zero of an oscillatory envelope
// cannot fake an empty tail.
constexpr double kProbeMul[3] = {1.0, 1.0437, 1.1171};

double fit_constant(const Fn& f, const DecayClass& decay, double R,
                    int side_sign) {
    double c = 0.0;
    for (double m : kProbeMul) {
        const double y = side_sign * m * R;
        const double a = std::abs(f(y));
        if (decay.kind == DecayClass::Kind::Polynomial) {
            c = std::max(c, a * std::pow(m * R, decay.value));
        } else {
            c = std::max(c, a * std::exp(decay.value * m * R));
        }
    }
    return c;
}

double tail_bound_at(const Fn& f, const DecayClass& decay, double R) {
    if (decay.kind == DecayClass::Kind::CompactSupport) return 0.0;
    const double cp = fit_constant(f, decay, R, +1);
    const double cm = fit_constant(f, decay, R, -1);
    if (decay.kind == DecayClass::Kind::Polynomial) {
        const double q = decay.value;
        return (cp + cm) * std::pow(R, 1.0 - q) / (q - 1.0);
    }
    return (cp + cm) * std::exp(-decay.value * R) / decay.value;
}

void spot_check_decay(const Fn& f, const DecayClass& decay, double R,
                      const QuadratureOptions& opts) {
    if (decay.kind == DecayClass::Kind::CompactSupport) {
        for (double s : {-1.0, 1.0}) {
            const double y = s * (R * 1.0002 + 0.001);
            if (std::abs(f(y)) > 1e-15) {
                throw DomainError(
                    "integrand is nonzero beyond its declared support radius " +
                    std::to_string(R));
            }
        }
        return;
    }
    for (int side : {-1, 1}) {
        const double c = fit_constant(f, decay, R, side);
        for (double m : {2.0, 2.0891}) {
            const double y = side * m * R;
            const double actual = std::abs(f(y));
            double envelope;
            if (decay.kind == DecayClass::Kind::Polynomial) {
                envelope = c * std::pow(m * R, -decay.value);
            } else {
                envelope = c * std::exp(-decay.value * m * R);
            }
            if (actual > opts.decay_check_slack * envelope + 1e-300) {
                throw DomainError(
                    "integrand violates its declared decay class at y = " +
                    std::to_string(y));
            }
        }
    }
}

// Dyadic breakpoints 0, +-1, +-2, +-4, ... capped at +-R, matching panel
// width to the distance from the origin.
std::vector<double> dyadic_breakpoints(double R) {
    std::vector<double> pos;
    pos.push_back(0.0);
    for (double x = 1.0; x < R; x *= 2.0) pos.push_back(x);
    pos.push_back(R);
    std::vector<double> all;
    for (std::size_t i = pos.size(); i-- > 1;) all.push_back(-pos[i]);
    all.insert(all.end(), pos.begin(), pos.end());
    return all;
}

double pick_radius(const Fn& f, const Integrand& h, double rel_tol,
                   const QuadratureOptions& opts, double* tail_out) {
    if (h.decay.kind == DecayClass::Kind::CompactSupport) {
        *tail_out = 0.0;
        return h.decay.value;
    }
    double R = 8.0;
    // Rough magnitude from coarse panels, extended shell by shell as R
    // doubles, so the relative target tracks the integral's actual scale.
    double rough = 0.0;
    for (double x = -8.0; x < 7.5; x += 1.0) {
        rough += std::abs(eval_panel(f, x, x + 1.0).value);
    }
    while (true) {
        const double tail = tail_bound_at(f, h.decay, R);
        const double tgt =
            std::max(opts.abs_tol_floor, rel_tol * std::max(rough, 1e-300));
        if (tail <= 0.1 * tgt) {
            *tail_out = tail;
            return R;
        }
        if (R > 1.1e9) {
            throw NonConvergence(
                "declared decay too slow to reach the requested tolerance",
                tail);
        }
        rough += std::abs(eval_panel(f, R, 2.0 * R).value) +
                 std::abs(eval_panel(f, -2.0 * R, -R).value);
        R *= 2.0;
    }
}

std::vector<Panel> initial_panels(const Fn& f, double R, double frequency,
                                  const QuadratureOptions& opts) {
    std::vector<double> bp = dyadic_breakpoints(R);
    double max_width = std::numeric_limits<double>::infinity();
    if (std::abs(frequency) > 1.0) {
        max_width = opts.period_fraction * 2.0 * M_PI / std::abs(frequency);
    }
    // Count first so an absurd frequency/radius combination fails cleanly
    // instead of allocating forever.
    long long count = 0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        count += std::max<long long>(
            1, static_cast<long long>(std::ceil((bp[i + 1] - bp[i]) / max_width)));
    }
    if (count > std::max(opts.max_panels, 2)) {
        throw NonConvergence(
            "oscillation period times truncation radius exceeds the panel "
            "budget (" + std::to_string(count) + " initial panels needed)",
            std::numeric_limits<double>::infinity());
    }
    std::vector<Panel> panels;
    panels.reserve(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double w = bp[i + 1] - bp[i];
        const int parts =
            std::max(1, static_cast<int>(std::ceil(w / max_width)));
        for (int s = 0; s < parts; ++s) {
            const double a = bp[i] + w * s / parts;
            const double b = bp[i] + w * (s + 1) / parts;
            panels.push_back(eval_panel(f, a, b));
        }
    }
    return panels;
}

QuadratureResult integrate_whole_line(const Integrand& h, double frequency,
                                      double rel_tol,
                                      const QuadratureOptions& opts) {
    if (!(rel_tol > 0.0) || !(rel_tol < 1.0)) {
        throw DomainError("rel_tol must lie in (0, 1)");
    }
    Fn f;
    if (frequency == 0.0) {
        f = h.eval;
    } else {
        f = [&h, frequency](double y) {
            return h.eval(y) * std::polar(1.0, -frequency * y);
        };
    }
    double tail = 0.0;
    const double R = pick_radius(f, h, rel_tol, opts, &tail);
    spot_check_decay(h.eval, h.decay, R, opts);
    return refine(f, initial_panels(f, R, frequency, opts), rel_tol, opts,
                  tail);
}

}  // namespace

QuadratureResult integrate_line(const Integrand& h, double rel_tol,
                                const QuadratureOptions& opts) {
    return integrate_whole_line(h, 0.0, rel_tol, opts);
}

QuadratureResult integrate_oscillatory(const Integrand& envelope,
                                       double frequency, double rel_tol,
                                       const QuadratureOptions& opts) {
    if (!std::isfinite(frequency)) {
        throw DomainError("oscillation frequency must be finite");
    }
    return integrate_whole_line(envelope, frequency, rel_tol, opts);
}

QuadratureResult integrate_interval(const Fn& f, double a, double b,
                                    double rel_tol,
                                    const QuadratureOptions& opts) {
    if (!(rel_tol > 0.0) || !(rel_tol < 1.0)) {
        throw DomainError("rel_tol must lie in (0, 1)");
    }
    if (!(b > a)) throw DomainError("integrate_interval needs b > a");
    std::vector<Panel> panels;
    const int parts = 4;
    for (int i = 0; i < parts; ++i) {
        panels.push_back(eval_panel(f, a + (b - a) * i / parts,
                                    a + (b - a) * (i + 1) / parts));
    }
    return refine(f, std::move(panels), rel_tol, opts, 0.0);
}

}  // namespace wavesim
