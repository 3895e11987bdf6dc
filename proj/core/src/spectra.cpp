#include "wavesim/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wavesim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2Pi = 2.5066282746310005024;

double get_param(const std::map<std::string, double>& params,
                 const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) {
        throw DomainError("density parameter '" + key + "' missing");
    }
    return it->second;
}

// Slower of two tail declarations, so a sum of the two integrands is still
// covered.  Polynomial counts as slower than exponential; compact support is
// fastest and merges by the larger radius.
DecayClass slower_of(const DecayClass& a, const DecayClass& b) {
    using K = DecayClass::Kind;
    if (a.kind == K::Polynomial || b.kind == K::Polynomial) {
        if (a.kind == K::Polynomial && b.kind == K::Polynomial) {
            return DecayClass::polynomial(std::min(a.value, b.value));
        }
        return a.kind == K::Polynomial ? a : b;
    }
    if (a.kind == K::Exponential || b.kind == K::Exponential) {
        if (a.kind == K::Exponential && b.kind == K::Exponential) {
            return DecayClass::exponential(std::min(a.value, b.value));
        }
        return a.kind == K::Exponential ? a : b;
    }
    return DecayClass::compact_support(std::max(a.value, b.value));
}

// Decay left after multiplying an integrand by |y|.
DecayClass times_abs_y(const DecayClass& d) {
    if (d.kind == DecayClass::Kind::Polynomial) {
        if (!(d.value > 2.0)) {
            throw DomainError("tail too slow: |y| weighting needs polynomial "
                              "decay above 2");
        }
        return DecayClass::polynomial(d.value - 1.0);
    }
    if (d.kind == DecayClass::Kind::Exponential) {
        return DecayClass::exponential(0.99 * d.value);
    }
    return d;
}

DecayClass squared(const DecayClass& d) {
    if (d.kind == DecayClass::Kind::Polynomial) {
        return DecayClass::polynomial(2.0 * d.value);
    }
    if (d.kind == DecayClass::Kind::Exponential) {
        return DecayClass::exponential(2.0 * d.value);
    }
    return d;
}

double real_integral(const std::function<double(double)>& h,
                     const DecayClass& decay, double rel_tol) {
    Integrand in;
    in.eval = [h](double y) { return std::complex<double>(h(y), 0.0); };
    in.decay = decay;
    return integrate_line(in, rel_tol).value.real();
}

}  // namespace

SpectralModel make_density(const std::string& family_id,
                           const std::map<std::string, double>& params) {
    SpectralModel m;
    m.family_id = family_id;
    m.params = params;
    m.admissibility_declared = true;

    if (family_id == "rational_even") {
        const double n = get_param(params, "n");
        if (!(n >= 2.0)) {
            throw DomainError("rational_even requires n >= 2");
        }
        m.f = [n](double y) {
            const double d = 1.0 + std::pow(std::abs(y), 2.0 * n);
            return 1.0 / (d * d);
        };
        m.g = [n](double y) {
            return 1.0 / (1.0 + std::pow(std::abs(y), 2.0 * n));
        };
        m.g_deriv = [n](double y) {
            const double a = std::abs(y);
            const double d = 1.0 + std::pow(a, 2.0 * n);
            const double mag = 2.0 * n * std::pow(a, 2.0 * n - 1.0) / (d * d);
            return y >= 0.0 ? -mag : mag;
        };
        m.decay_g = DecayClass::polynomial(2.0 * n);
        m.decay_g_deriv = DecayClass::polynomial(2.0 * n + 1.0);
        return m;
    }

    if (family_id == "lorentz_pow") {
        const double n = get_param(params, "n");
        if (!(n >= 2.0)) {
            throw DomainError("lorentz_pow requires n >= 2");
        }
        m.f = [n](double y) { return std::pow(1.0 + y * y, -2.0 * n); };
        m.g = [n](double y) { return std::pow(1.0 + y * y, -n); };
        m.g_deriv = [n](double y) {
            return -2.0 * n * y * std::pow(1.0 + y * y, -n - 1.0);
        };
        m.decay_g = DecayClass::polynomial(2.0 * n);
        m.decay_g_deriv = DecayClass::polynomial(2.0 * n + 1.0);
        return m;
    }

    if (family_id == "two_bump") {
        const double mm = get_param(params, "m");
        const double a = get_param(params, "a");
        if (!(mm >= 2.0)) {
            throw DomainError("two_bump requires m >= 2");
        }
        if (!std::isfinite(a)) {
            throw DomainError("two_bump requires finite bump center a");
        }
        auto bump = [mm](double x) { return std::pow(1.0 + x * x, -mm); };
        auto bump_d = [mm](double x) {
            return -2.0 * mm * x * std::pow(1.0 + x * x, -mm - 1.0);
        };
        m.g = [bump, a](double y) { return bump(y - a) + bump(y + a); };
        m.f = [g = m.g](double y) {
            const double v = g(y);
            return v * v;
        };
        m.g_deriv = [bump_d, a](double y) {
            return bump_d(y - a) + bump_d(y + a);
        };
        m.decay_g = DecayClass::polynomial(2.0 * mm);
        m.decay_g_deriv = DecayClass::polynomial(2.0 * mm + 1.0);
        return m;
    }

    throw DomainError("unknown density family '" + family_id + "'");
}

SpectralModel scale_density(const SpectralModel& model, double c) {
    if (!(c > 0.0)) throw DomainError("density scale must be positive");
    SpectralModel m = model;
    m.family_id = model.family_id + "*scaled";
    m.params["scale"] = c;
    m.f = [f = model.f, c](double y) { return c * c * f(y); };
    m.g = [g = model.g, c](double y) { return c * g(y); };
    m.g_deriv = [gd = model.g_deriv, c](double y) { return c * gd(y); };
    return m;
}

double correlation(const SpectralModel& model, double tau) {
    if (!std::isfinite(tau)) throw DomainError("correlation lag must be finite");
    Integrand in;
    in.eval = [&model](double y) {
        return std::complex<double>(model.f(y), 0.0);
    };
    in.decay = squared(model.decay_g);
    return integrate_oscillatory(in, tau, 1e-8).value.real();
}

PlanConstants plan_constants(const SpectralModel& model,
                             const WaveletTransforms& wt) {
    PlanConstants c;
    const DecayClass g_decay = model.decay_g;
    const DecayClass gd_y = times_abs_y(model.decay_g_deriv);

    // Wavelet-free integrals.
    const double int_a = real_integral(
        [&model](double y) {
            return std::abs(model.g_deriv(y)) * std::abs(y) + model.g(y);
        },
        slower_of(gd_y, g_decay), 1e-8);
    const double int_b = real_integral(
        [&model](double y) { return model.g(y) * std::abs(y); },
        times_abs_y(g_decay), 1e-8);

    // Scaling-transform weighted integrals.  For compactly supported
    // phi_hat the support radius is the whole story; otherwise |phi_hat|
    // and |phi_hat'| are bounded and the density's own decay rules.
    const bool compact = wt.phi_support_radius > 0.0;
    const DecayClass phi_decay =
        compact ? DecayClass::compact_support(wt.phi_support_radius) : g_decay;
    const DecayClass phi_deriv_decay =
        compact ? DecayClass::compact_support(wt.phi_support_radius)
                : model.decay_g_deriv;

    const double int_gd_phi = real_integral(
        [&](double y) { return std::abs(model.g_deriv(y)) * std::abs(wt.phi_hat(y)); },
        compact ? phi_decay : model.decay_g_deriv, 1e-8);
    const double int_g_dphi = real_integral(
        [&](double y) { return model.g(y) * std::abs(wt.phi_hat_deriv(y)); },
        compact ? phi_deriv_decay : g_decay, 1e-8);
    const double int_g_phi = real_integral(
        [&](double y) { return model.g(y) * std::abs(wt.phi_hat(y)); },
        phi_decay, 1e-8);

    c.A = wt.C2 / kSqrt2Pi * int_a;
    c.B = wt.C2 / kSqrt2Pi * int_b;
    c.A1 = (int_gd_phi + int_g_dphi) / kSqrt2Pi;
    c.B1 = int_g_phi / kSqrt2Pi;
    c.R0 = real_integral(model.f, squared(g_decay), 1e-8);
    return c;
}

namespace {

// Divergence probe: dyadic shells [2^m, 2^{m+1}] of the absolute integrand
// (both signs folded in).  A convergent tail has shell sums collapsing
// geometrically; sums that hold their ratio near or above 1 mean the
// integral cannot be finite.
AdmissibilityCondition shell_condition(
    const std::string& name, const std::function<double(double)>& h) {
    AdmissibilityCondition cond;
    cond.name = name;
    auto abs_h = [&h](double y) { return std::complex<double>(std::abs(h(y)), 0.0); };
    QuadratureOptions opts;
    opts.max_panels = 256;

    double total = integrate_interval(abs_h, -8.0, 8.0, 1e-6, opts)
                       .value.real();
    double prev_shell = -1.0;
    double shell = 0.0;
    double last_ratio = 0.0;
    int slow_shells = 0;
    bool negligible_tail = false;
    bool diverged = false;
    for (int m = 3; m <= 40; ++m) {
        const double a = std::ldexp(1.0, m);
        shell =
            integrate_interval(abs_h, a, 2.0 * a, 1e-4, opts).value.real() +
            integrate_interval(abs_h, -2.0 * a, -a, 1e-4, opts).value.real();
        total += shell;
        if (shell <= 1e-14 * std::max(total, 1e-300)) {
            negligible_tail = true;
            break;
        }
        if (prev_shell > 0.0) {
            last_ratio = shell / prev_shell;
            if (last_ratio >= 0.9) {
                if (++slow_shells >= 3) {
                    diverged = true;  // flat or growing tail
                    break;
                }
            } else {
                slow_shells = 0;
            }
        }
        prev_shell = shell;
    }
    cond.finite = negligible_tail || (!diverged && last_ratio < 0.9);
    cond.value = total;
    if (cond.finite && !negligible_tail && last_ratio > 0.0) {
        // Geometric estimate of what remains past the last shell.
        cond.value += shell * last_ratio / (1.0 - last_ratio);
    }
    return cond;
}

AdmissibilityCondition sup_condition(const std::string& name,
                                     const std::function<double(double)>& h) {
    AdmissibilityCondition cond;
    cond.name = name;
    double sup = 0.0;
    for (int i = 0; i <= 4096; ++i) {
        const double y = 64.0 * i / 4096.0;
        sup = std::max({sup, std::abs(h(y)), std::abs(h(-y))});
    }
    for (int i = 1; i <= 512; ++i) {
        const double y = 64.0 * std::exp(std::log(1u << 24) * i / 512.0);
        sup = std::max({sup, std::abs(h(y)), std::abs(h(-y))});
    }
    cond.value = sup;
    cond.finite = std::isfinite(sup);
    return cond;
}

}  // namespace

AdmissibilityReport check_admissibility(const SpectralModel& model,
                                        const WaveletTransforms& wt) {
    AdmissibilityReport report;
    report.conditions.push_back(
        shell_condition("int g", [&](double y) { return model.g(y); }));
    report.conditions.push_back(shell_condition(
        "int |g'| |y|",
        [&](double y) { return std::abs(model.g_deriv(y)) * std::abs(y); }));
    report.conditions.push_back(shell_condition(
        "int g |y|", [&](double y) { return model.g(y) * std::abs(y); }));
    report.conditions.push_back(shell_condition(
        "int |g'| |phi_hat|", [&](double y) {
            return std::abs(model.g_deriv(y)) * std::abs(wt.phi_hat(y));
        }));
    report.conditions.push_back(shell_condition(
        "int g |phi_hat'|", [&](double y) {
            return model.g(y) * std::abs(wt.phi_hat_deriv(y));
        }));
    report.conditions.push_back(sup_condition(
        "sup |phi_hat|", [&](double y) { return std::abs(wt.phi_hat(y)); }));
    report.conditions.push_back(
        sup_condition("sup g", [&](double y) { return model.g(y); }));

    report.all_finite = true;
    for (const auto& cond : report.conditions) {
        report.all_finite = report.all_finite && cond.finite;
    }
    return report;
}

}  // namespace wavesim
