#include "wavesim/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include "wavesim/rng.hpp"
#include "runtime.hpp"

namespace wavesim {

namespace {

using Cplx = std::complex<double>;

constexpr double kSqrt2Pi = 2.5066282746310005024;
constexpr double kPi = 3.14159265358979323846;

double abs_or0(double v) { return v < 0.0 ? -v : v; }

DecayClass slower_of(const DecayClass& x, const DecayClass& y) {
    using K = DecayClass::Kind;
    if (x.kind == K::CompactSupport) {
        return y.kind == K::CompactSupport
                   ? DecayClass::compact_support(std::max(x.value, y.value))
                   : y;
    }
    if (y.kind == K::CompactSupport) return x;
    if (x.kind == K::Polynomial && y.kind == K::Polynomial) {
        return DecayClass::polynomial(std::min(x.value, y.value));
    }
    if (x.kind == K::Exponential && y.kind == K::Exponential) {
        return DecayClass::exponential(std::min(x.value, y.value));
    }
    return x.kind == K::Polynomial ? x : y;
}

// ---------------------------------------------------------------------------
// Direct, single-argument evaluation through the oscillatory quadrature.

Integrand a_envelope(const DirectCoefficients& ctx) {
    const SpectralModel* m = ctx.model;
    const WaveletTransforms* w = ctx.transforms;
    Integrand env;
    env.eval = [m, w](double y) {
        return m->g(y) * std::conj(w->phi_hat(y)) / kSqrt2Pi;
    };
    env.decay = w->phi_support_radius > 0.0
                    ? DecayClass::compact_support(w->phi_support_radius)
                    : m->decay_g;
    return env;
}

Integrand b_envelope(const DirectCoefficients& ctx, int j) {
    const SpectralModel* m = ctx.model;
    const WaveletTransforms* w = ctx.transforms;
    const double inv_scale = std::ldexp(1.0, -j);
    const double norm = 1.0 / (kSqrt2Pi * std::sqrt(std::ldexp(1.0, j)));
    Integrand env;
    env.eval = [m, w, inv_scale, norm](double y) {
        return m->g(y) * std::conj(w->psi_hat(y * inv_scale)) * norm;
    };
    env.decay = w->psi_support_radius > 0.0
                    ? DecayClass::compact_support(w->psi_support_radius *
                                                  std::ldexp(1.0, j))
                    : m->decay_g;
    return env;
}

}  // namespace

std::complex<double> a0k_raw(const DirectCoefficients& ctx, double t,
                             long long k) {
    if (ctx.model == nullptr || ctx.transforms == nullptr) {
        throw DomainError("direct coefficient context is incomplete");
    }
    const double u = t - static_cast<double>(k);
    return integrate_oscillatory(a_envelope(ctx), u, ctx.rel_tol, ctx.quad)
        .value;
}

std::complex<double> bjk_raw(const DirectCoefficients& ctx, double t, int j,
                             long long k) {
    if (ctx.model == nullptr || ctx.transforms == nullptr) {
        throw DomainError("direct coefficient context is incomplete");
    }
    if (j < 0) throw DomainError("detail level must be nonnegative");
    const double u = t - std::ldexp(static_cast<double>(k), -j);
    return integrate_oscillatory(b_envelope(ctx, j), u, ctx.rel_tol, ctx.quad)
        .value;
}

double a0k(const DirectCoefficients& ctx, double t, long long k) {
    return a0k_raw(ctx, t, k).real();
}

double bjk(const DirectCoefficients& ctx, double t, int j, long long k) {
    return bjk_raw(ctx, t, j, k).real();
}

// ---------------------------------------------------------------------------
// Profile grid interpolation.

double ProfileGrid::operator()(double u) const {
    const long long n = static_cast<long long>(values.size());
    if (n == 0) return 0.0;
    const double x = (u - u0) / step;
    if (x < 0.0 || x > static_cast<double>(n - 1)) return 0.0;
    if (n < 4) {
        const long long i =
            std::min<long long>(static_cast<long long>(x), n - 2);
        if (i < 0) return values[0];
        const double s = x - static_cast<double>(i);
        return values[static_cast<std::size_t>(i)] * (1.0 - s) +
               values[static_cast<std::size_t>(i + 1)] * s;
    }
    long long base = static_cast<long long>(std::floor(x)) - 1;
    base = std::clamp<long long>(base, 0, n - 4);
    const double s = x - static_cast<double>(base);
    const double w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    const double w1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    const double w2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    const double w3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    const std::size_t b = static_cast<std::size_t>(base);
    return w0 * values[b] + w1 * values[b + 1] + w2 * values[b + 2] +
           w3 * values[b + 3];
}

namespace {

// ---------------------------------------------------------------------------
// Batch profile evaluation.  One profile is the Fourier transform of a fixed
// envelope G:  profile(u) = integral G(y) exp(-i y u) dy.  A composite
// 15-point Kronrod rule samples G once per node set; each lattice point then
// costs one complex multiply-add per node, with the phase advanced by a
// rotation recurrence (drift over a 1024-point block is ~1e-13 relative).

struct Segment {
    double a = 0.0;
    double b = 0.0;
};

struct BatchProfile {
    std::function<Cplx(double)> G;
    std::vector<Segment> segments;
    double width_cap = 0.0375;
    double h = 0.0;
    long long k_min = 0;
    long long k_max = 0;

    double node_width = 0.0;
    std::vector<double> node_y;
    std::vector<Cplx> node_gw;

    void build_nodes(double width) {
        node_width = width;
        node_y.clear();
        node_gw.clear();
        for (const Segment& seg : segments) {
            const double len = seg.b - seg.a;
            if (!(len > 0.0)) continue;
            const long long panels =
                std::max<long long>(1, static_cast<long long>(
                                           std::ceil(len / width)));
            if (panels > 20'000'000) {
                throw NonConvergence(
                    "composite node count exploded while building a "
                    "coefficient profile",
                    static_cast<double>(panels));
            }
            const double pw = len / static_cast<double>(panels);
            for (long long p = 0; p < panels; ++p) {
                const double c = seg.a + pw * (static_cast<double>(p) + 0.5);
                const double half = 0.5 * pw;
                for (int i = 0; i < 8; ++i) {
                    const double dx = half * Kronrod15::abscissae[i];
                    const double wt = half * Kronrod15::weights[i];
                    if (i == 7) {
                        node_y.push_back(c);
                        node_gw.push_back(G(c) * wt);
                    } else {
                        node_y.push_back(c - dx);
                        node_gw.push_back(G(c - dx) * wt);
                        node_y.push_back(c + dx);
                        node_gw.push_back(G(c + dx) * wt);
                    }
                }
            }
        }
    }

    // Nodes must stay below a half period of the fastest phase present.
    // 15% slack avoids rebuilding on every block as |u| creeps up.
    void ensure_nodes(double max_abs_u) {
        const double want =
            std::min(width_cap, kPi / std::max(1.0, max_abs_u));
        if (node_y.empty() || want < 0.85 * node_width) build_nodes(want);
    }

    void eval_block(long long k0, int count, Cplx* out) const {
        const double u_start = static_cast<double>(k0) * h;
        for (int i = 0; i < count; ++i) out[i] = Cplx(0.0, 0.0);
        const std::size_t n = node_y.size();
        for (std::size_t m = 0; m < n; ++m) {
            const double y = node_y[m];
            const Cplx gw = node_gw[m];
            Cplx phase = std::polar(1.0, -y * u_start);
            const Cplx rot = std::polar(1.0, -y * h);
            for (int i = 0; i < count; ++i) {
                out[i] += gw * phase;
                phase *= rot;
            }
        }
    }
};

// Fourth-moment radius of the node measure |G| w.  The interpolation error
// of the 4-point cubic is controlled by the profile's fourth derivative,
// which is bounded by this moment, so the lattice step comes from it.
double fourth_moment_radius(const BatchProfile& bp, bool* degenerate) {
    double s0 = 0.0;
    double s4 = 0.0;
    for (std::size_t i = 0; i < bp.node_y.size(); ++i) {
        const double a = std::abs(bp.node_gw[i]);
        const double y2 = bp.node_y[i] * bp.node_y[i];
        s0 += a;
        s4 += a * y2 * y2;
    }
    *degenerate = !(s0 > 1e-300);
    if (*degenerate) return 1.0;
    return std::pow(s4 / s0, 0.25);
}

struct RawProfile {
    long long k_first = 0;
    std::vector<Cplx> v;
};

constexpr int kBlock = 1024;

// Outward block scan.  A side stops after two consecutive blocks whose
// maximum magnitude stays under eta/2, or at the reachable lattice edge.
RawProfile scan_profile(BatchProfile& bp, double eta) {
    std::vector<Cplx> buf(kBlock);
    std::vector<Cplx> right;
    std::vector<std::vector<Cplx>> left_blocks;

    int quiet = 0;
    for (long long k0 = 0; k0 <= bp.k_max && quiet < 2;) {
        const int count = static_cast<int>(
            std::min<long long>(kBlock, bp.k_max - k0 + 1));
        bp.ensure_nodes(std::max(std::abs(static_cast<double>(k0) * bp.h),
                                 std::abs(static_cast<double>(k0 + count - 1) *
                                          bp.h)));
        bp.eval_block(k0, count, buf.data());
        double mx = 0.0;
        for (int i = 0; i < count; ++i) mx = std::max(mx, std::abs(buf[i]));
        quiet = mx < 0.5 * eta ? quiet + 1 : 0;
        right.insert(right.end(), buf.begin(), buf.begin() + count);
        k0 += count;
    }

    quiet = 0;
    long long left_first = 0;
    for (long long hi = -1; hi >= bp.k_min && quiet < 2;) {
        const long long lo = std::max(bp.k_min, hi - kBlock + 1);
        const int count = static_cast<int>(hi - lo + 1);
        bp.ensure_nodes(std::max(std::abs(static_cast<double>(lo) * bp.h),
                                 std::abs(static_cast<double>(hi) * bp.h)));
        bp.eval_block(lo, count, buf.data());
        double mx = 0.0;
        for (int i = 0; i < count; ++i) mx = std::max(mx, std::abs(buf[i]));
        quiet = mx < 0.5 * eta ? quiet + 1 : 0;
        left_blocks.emplace_back(buf.begin(), buf.begin() + count);
        left_first = lo;
        hi = lo - 1;
    }

    RawProfile raw;
    raw.k_first = left_first;
    for (auto it = left_blocks.rbegin(); it != left_blocks.rend(); ++it) {
        raw.v.insert(raw.v.end(), it->begin(), it->end());
    }
    raw.v.insert(raw.v.end(), right.begin(), right.end());
    return raw;
}

ProfileGrid finalize_profile(const RawProfile& raw, double eta, double h,
                             double* imag_ratio) {
    const long long n = static_cast<long long>(raw.v.size());
    long long first = -1;
    long long last = -1;
    for (long long i = 0; i < n; ++i) {
        if (std::abs(raw.v[static_cast<std::size_t>(i)]) >= eta) {
            if (first < 0) first = i;
            last = i;
        }
    }
    ProfileGrid grid;
    if (first < 0) return grid;
    const long long lo = std::max<long long>(0, first - 8);
    const long long hi = std::min<long long>(n - 1, last + 8);
    grid.u0 = static_cast<double>(raw.k_first + lo) * h;
    grid.step = h;
    grid.values.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (long long i = lo; i <= hi; ++i) {
        const Cplx& z = raw.v[static_cast<std::size_t>(i)];
        *imag_ratio = std::max(*imag_ratio,
                               std::abs(z.imag()) / (1.0 + std::abs(z.real())));
        grid.values.push_back(z.real());
    }
    return grid;
}

// Truncation radius for non-compact envelopes: grow R until the fitted
// decay-class tail bound (times the wavelet sup) drops under target.
double batch_radius(const SpectralModel& model, double sup_wavelet,
                    double target) {
    using K = DecayClass::Kind;
    const DecayClass& d = model.decay_g;
    if (d.kind == K::CompactSupport) return d.value;
    double tail = std::numeric_limits<double>::infinity();
    for (double R = 16.0; R < 1.1e9; R *= 2.0) {
        double c = 0.0;
        for (double mul : {1.0, 1.31, 1.7}) {
            const double r = R * mul;
            const double gm = std::max(abs_or0(model.g(r)),
                                       abs_or0(model.g(-r)));
            c = std::max(c, d.kind == K::Polynomial
                                ? gm * std::pow(r, d.value)
                                : gm * std::exp(d.value * r));
        }
        tail = d.kind == K::Polynomial
                   ? 2.0 * sup_wavelet * c * std::pow(R, 1.0 - d.value) /
                         (d.value - 1.0)
                   : 2.0 * sup_wavelet * c * std::exp(-d.value * R) / d.value;
        if (tail <= target) return R;
    }
    throw NonConvergence("no truncation radius reached the batch tail target",
                         tail);
}

struct ProfileSpec {
    int level = -1;  // -1: scaling row
    std::function<Cplx(double)> G;
    std::vector<Segment> segments;
    double width_cap = 0.0;
    double range_lo = 0.0;
    double range_hi = 0.0;
};

ProfileSpec make_profile_spec(const TruncationPlan& plan,
                              const SpectralModel& model,
                              const WaveletTransforms& wt, double T, int level,
                              double daub_radius) {
    ProfileSpec ps;
    ps.level = level;
    const SpectralModel* m = &model;
    const WaveletTransforms* w = &wt;
    const bool meyer = wt.spec.family == WaveletSpec::Family::Meyer;
    if (level < 0) {
        ps.G = [m, w](double y) {
            return m->g(y) * std::conj(w->phi_hat(y)) / kSqrt2Pi;
        };
        if (wt.phi_support_radius > 0.0) {
            ps.segments = {{-wt.phi_support_radius, wt.phi_support_radius}};
        } else {
            ps.segments = {{-daub_radius, daub_radius}};
        }
        // The junction panels of the Meyer transition zones carry a jump in
        // the fourth derivative; 0.0375 keeps their per-panel error below
        // any profile tolerance in play here.
        ps.width_cap =
            meyer ? 0.0375
                  : kPi / (2.0 * static_cast<double>(wt.spec.order) + 1.0);
        const double reach = static_cast<double>(plan.N0 - 1);
        ps.range_lo = -reach;
        ps.range_hi = T + reach;
    } else {
        const int j = level;
        const double inv_scale = std::ldexp(1.0, -j);
        const double norm = 1.0 / (kSqrt2Pi * std::sqrt(std::ldexp(1.0, j)));
        ps.G = [m, w, inv_scale, norm](double y) {
            return m->g(y) * std::conj(w->psi_hat(y * inv_scale)) * norm;
        };
        if (wt.psi_support_radius > 0.0) {
            const double outer = wt.psi_support_radius * std::ldexp(1.0, j);
            const double inner = outer / 4.0;
            ps.segments = {{-outer, -inner}, {inner, outer}};
        } else {
            ps.segments = {{-daub_radius, daub_radius}};
        }
        // Junction fourth-derivative jumps scale as 2^{-4j}, so a width
        // growing as 2^{4j/5} keeps per-panel error level-independent.
        ps.width_cap =
            meyer ? 0.0375 * std::pow(2.0, 0.8 * j)
                  : kPi / (2.0 * static_cast<double>(wt.spec.order) + 1.0);
        const double reach =
            std::ldexp(static_cast<double>(plan.M[static_cast<std::size_t>(j)] -
                                           1),
                       -j);
        ps.range_lo = -reach;
        ps.range_hi = T + reach;
    }
    return ps;
}

// Upper bound on sup_u |profile_j(u)|: the L1 mass of its envelope.  A level
// whose bound stays under eta can never contribute a stored value.
double trivial_level_envelope(const SpectralModel& model,
                              const WaveletTransforms& wt, int j) {
    const double inv_scale = std::ldexp(1.0, -j);
    const double norm = 1.0 / (kSqrt2Pi * std::sqrt(std::ldexp(1.0, j)));
    QuadratureOptions qo;
    qo.max_panels = 200000;
    QuadratureResult r;
    if (wt.psi_support_radius > 0.0) {
        const double outer = wt.psi_support_radius * std::ldexp(1.0, j);
        r = integrate_interval(
            [&](double y) {
                return Cplx(model.g(y) * std::abs(wt.psi_hat(y * inv_scale)),
                            0.0);
            },
            -outer, outer, 1e-4, qo);
    } else {
        Integrand h;
        h.eval = [&](double y) {
            return Cplx(model.g(y) * std::abs(wt.psi_hat(y * inv_scale)), 0.0);
        };
        h.decay = model.decay_g;
        r = integrate_line(h, 1e-4, qo);
    }
    return (r.value.real() + r.abs_error_estimate) * norm;
}

ProfileGrid build_one_profile(const ProfileSpec& ps, double grid_step,
                              double eta, int halvings, double* imag_ratio) {
    BatchProfile bp;
    bp.G = ps.G;
    bp.segments = ps.segments;
    bp.width_cap = ps.width_cap;
    bp.build_nodes(ps.width_cap);
    bool degenerate = false;
    const double omega4 = fourth_moment_radius(bp, &degenerate);
    if (degenerate) return {};
    // h * omega4 = 0.0336 at the default step puts the cubic interpolation
    // error near 3e-8 of the envelope mass.
    double h = grid_step * 3.36 / std::max(omega4, 1e-6);
    h = std::ldexp(h, -halvings);
    bp.h = h;
    // Lattice must cover the full reachable range: a node at or beyond each
    // edge, otherwise reads near the edge fall outside the stored window and
    // an in-plan term silently evaluates to zero.
    bp.k_min = static_cast<long long>(std::floor(ps.range_lo / h));
    bp.k_max = static_cast<long long>(std::ceil(ps.range_hi / h));
    if (bp.k_max < bp.k_min) return {};
    RawProfile raw = scan_profile(bp, eta);
    return finalize_profile(raw, eta, h, imag_ratio);
}

std::string canonical_cache_meta(const CoefficientCache& c) {
    std::ostringstream os;
    os.precision(17);
    os << c.model_family;
    for (const auto& [k, v] : c.model_params) os << '|' << k << '=' << v;
    os << '|' << c.wavelet.name() << '|' << c.wavelet.product_depth;
    os << '|' << c.plan.N0 << '|' << c.plan.N;
    for (long long m : c.plan.M) os << ',' << m;
    os << '|' << c.plan.variance_budget << '|' << c.T << '|' << c.grid_step
       << '|' << c.floor_eta;
    return os.str();
}

std::uint64_t fnv_bytes(const void* data, std::size_t n, std::uint64_t h) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_grid(const ProfileGrid& g, std::uint64_t h) {
    h = fnv_bytes(&g.u0, sizeof(double), h);
    h = fnv_bytes(&g.step, sizeof(double), h);
    const std::uint64_t n = g.values.size();
    h = fnv_bytes(&n, sizeof(n), h);
    if (n > 0) h = fnv_bytes(g.values.data(), n * sizeof(double), h);
    return h;
}

std::uint64_t cache_content_hash(const CoefficientCache& c) {
    const std::string meta = canonical_cache_meta(c);
    std::uint64_t h = fnv_bytes(meta.data(), meta.size(),
                                14695981039346656037ull);
    h = hash_grid(c.a00_grid, h);
    for (const ProfileGrid& g : c.bj0_grids) h = hash_grid(g, h);
    return h;
}

double probe_u01(std::uint64_t seed, int profile, int index) {
    const std::uint64_t h = mix64(
        seed ^ (static_cast<std::uint64_t>(profile) * 1000003ull +
                static_cast<std::uint64_t>(index)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

// ---------------------------------------------------------------------------

double CoefficientCache::a00(double u) const {
    const double reach = static_cast<double>(plan.N0 - 1);
    const double slack = 1e-9 * (1.0 + std::abs(u));
    if (u < -reach - slack || u > T + reach + slack) {
        throw CacheMiss("scaling profile argument outside reachable range");
    }
    return a00_grid(u);
}

double CoefficientCache::bj0(int j, double u) const {
    if (j < 0 || static_cast<std::size_t>(j) >= bj0_grids.size()) {
        throw CacheMiss("detail level outside the cached plan");
    }
    const double reach = std::ldexp(
        static_cast<double>(plan.M[static_cast<std::size_t>(j)] - 1), -j);
    const double slack = 1e-9 * (1.0 + std::abs(u));
    if (u < -reach - slack || u > T + reach + slack) {
        throw CacheMiss("detail profile argument outside reachable range");
    }
    return bj0_grids[static_cast<std::size_t>(j)](u);
}

double a0k(const CoefficientCache& cache, double t, long long k) {
    return cache.a00(t - static_cast<double>(k));
}

double bjk(const CoefficientCache& cache, double t, int j, long long k) {
    return cache.bj0(j, t - std::ldexp(static_cast<double>(k), -j));
}

CoefficientCache build_cache(const TruncationPlan& plan,
                             const SpectralModel& model,
                             const WaveletTransforms& wt, double T,
                             double grid_step, const CacheOptions& opts) {
    if (plan.N0 < 2 || plan.N < 1 ||
        plan.M.size() != static_cast<std::size_t>(plan.N)) {
        throw DomainError("truncation plan is malformed");
    }
    for (long long m : plan.M) {
        if (m < 2) throw DomainError("every detail count must exceed 1");
    }
    if (!(T > 0.0)) throw DomainError("T must be positive");
    if (!(grid_step > 0.0) || !(grid_step <= 1.0)) {
        throw DomainError("grid step must lie in (0, 1]");
    }

    CoefficientCache cache;
    cache.model_family = model.family_id;
    cache.model_params = model.params;
    cache.wavelet = wt.spec;
    cache.plan = plan;
    cache.T = T;
    cache.grid_step = grid_step;
    cache.floor_eta = std::min(
        1e-7, std::sqrt(opts.energy_tol /
                        static_cast<double>(plan.total_terms())));
    cache.bj0_grids.resize(static_cast<std::size_t>(plan.N));

    const int workers = resolve_workers(opts.workers);
    const double batch_target =
        std::min(cache.floor_eta, opts.probe_tol) * 0.05;
    const double daub_radius =
        wt.phi_support_radius > 0.0
            ? 0.0
            : batch_radius(model, std::max(1.0, wt.C1), batch_target);

    const int njobs = 1 + static_cast<int>(plan.N);
    std::vector<double> imag_ratios(static_cast<std::size_t>(njobs), 0.0);
    std::vector<int> halvings(static_cast<std::size_t>(njobs), 0);
    std::vector<char> level_skipped(static_cast<std::size_t>(njobs), 0);

    auto build_job = [&](int job) {
        double* ir = &imag_ratios[static_cast<std::size_t>(job)];
        if (job == 0) {
            const ProfileSpec ps =
                make_profile_spec(plan, model, wt, T, -1, daub_radius);
            cache.a00_grid = build_one_profile(
                ps, grid_step, cache.floor_eta,
                halvings[static_cast<std::size_t>(job)], ir);
            return;
        }
        const int j = job - 1;
        if (trivial_level_envelope(model, wt, j) < cache.floor_eta) {
            level_skipped[static_cast<std::size_t>(job)] = 1;
            cache.bj0_grids[static_cast<std::size_t>(j)] = {};
            return;
        }
        const ProfileSpec ps =
            make_profile_spec(plan, model, wt, T, j, daub_radius);
        cache.bj0_grids[static_cast<std::size_t>(j)] = build_one_profile(
            ps, grid_step, cache.floor_eta,
            halvings[static_cast<std::size_t>(job)], ir);
    };
    run_jobs(workers, njobs, build_job);

    // Probe pass: interpolated reads versus direct quadrature at random
    // arguments inside each nonempty window.  A failing profile gets its
    // step halved and is rebuilt from scratch.
    DirectCoefficients dctx;
    dctx.model = &model;
    dctx.transforms = &wt;
    dctx.rel_tol = 1e-9;
    dctx.quad.max_panels = 200000;
    dctx.quad.abs_tol_floor = std::max(1e-10, opts.probe_tol * 0.02);

    for (int round = 0;; ++round) {
        std::vector<int> nonempty;
        if (!cache.a00_grid.empty()) nonempty.push_back(0);
        for (int j = 0; j < plan.N; ++j) {
            if (!cache.bj0_grids[static_cast<std::size_t>(j)].empty()) {
                nonempty.push_back(1 + j);
            }
        }
        if (nonempty.empty() || opts.probe_count <= 0) break;

        std::vector<double> errs(static_cast<std::size_t>(opts.probe_count),
                                 0.0);
        std::vector<int> owner(static_cast<std::size_t>(opts.probe_count), 0);
        run_jobs(workers, opts.probe_count, [&](int i) {
            const int job = nonempty[static_cast<std::size_t>(
                i % static_cast<int>(nonempty.size()))];
            owner[static_cast<std::size_t>(i)] = job;
            const ProfileGrid& g =
                job == 0 ? cache.a00_grid
                         : cache.bj0_grids[static_cast<std::size_t>(job - 1)];
            const double u = g.min_u() + (g.max_u() - g.min_u()) *
                                             probe_u01(opts.probe_seed, job, i);
            const double direct =
                job == 0 ? a0k_raw(dctx, u, 0).real()
                         : bjk_raw(dctx, u, job - 1, 0).real();
            errs[static_cast<std::size_t>(i)] = std::abs(g(u) - direct);
        });

        std::vector<int> failed;
        double worst = 0.0;
        for (int i = 0; i < opts.probe_count; ++i) {
            worst = std::max(worst, errs[static_cast<std::size_t>(i)]);
            if (errs[static_cast<std::size_t>(i)] > opts.probe_tol) {
                const int job = owner[static_cast<std::size_t>(i)];
                if (std::find(failed.begin(), failed.end(), job) ==
                    failed.end()) {
                    failed.push_back(job);
                }
            }
        }
        cache.max_probe_error = std::max(cache.max_probe_error, worst);
        if (failed.empty()) break;
        if (round >= opts.max_step_halvings) {
            throw NonConvergence(
                "cache probe error stayed above tolerance after step "
                "refinement",
                worst);
        }
        for (int job : failed) {
            halvings[static_cast<std::size_t>(job)] += 1;
            imag_ratios[static_cast<std::size_t>(job)] = 0.0;
        }
        run_jobs(workers, static_cast<int>(failed.size()),
                 [&](int idx) { build_job(failed[static_cast<std::size_t>(
                     idx)]); });
    }

    for (double r : imag_ratios) {
        cache.max_imag_ratio = std::max(cache.max_imag_ratio, r);
    }
    cache.content_hash = cache_content_hash(cache);
    return cache;
}

// ---------------------------------------------------------------------------
// Decay verification.

DecayReport verify_decay(const TruncationPlan& plan,
                         const PlanConstants& constants,
                         const CoefficientCache& cache,
                         const DirectCoefficients& direct,
                         const std::vector<double>& t_samples) {
    if (direct.model == nullptr || direct.transforms == nullptr) {
        throw DomainError("direct coefficient context is incomplete");
    }
    if (cache.plan.N0 != plan.N0 || cache.plan.N != plan.N ||
        cache.plan.M != plan.M) {
        throw DomainError("cache was built for a different truncation plan");
    }
    if (t_samples.empty()) throw DomainError("no verification arguments given");
    const SpectralModel& model = *direct.model;
    const WaveletTransforms& wt = *direct.transforms;

    QuadratureOptions qo;
    qo.max_panels = 200000;
    const double rel = 1e-6;

    // Envelopes recomputed from the defining integrals, so the certification
    // path shares nothing with the cached values it covers for.
    const DecayClass mixed_decay =
        slower_of(model.decay_g, model.decay_g_deriv);
    auto line_integral = [&](const std::function<double(double)>& f,
                             const DecayClass& d) {
        Integrand h;
        h.eval = [&f](double y) { return Cplx(f(y), 0.0); };
        h.decay = d;
        const QuadratureResult r = integrate_line(h, rel, qo);
        return r.value.real() + r.abs_error_estimate;
    };

    const DecayClass a_decay =
        wt.phi_support_radius > 0.0
            ? DecayClass::compact_support(wt.phi_support_radius)
            : mixed_decay;
    const double e_ibp_a =
        line_integral(
            [&](double y) {
                return abs_or0(model.g_deriv(y)) * std::abs(wt.phi_hat(y)) +
                       model.g(y) * std::abs(wt.phi_hat_deriv(y));
            },
            a_decay) /
        kSqrt2Pi;
    const double e_triv_a =
        line_integral([&](double y) { return model.g(y) *
                                             std::abs(wt.phi_hat(y)); },
                      a_decay) /
        kSqrt2Pi;

    std::vector<double> e_ibp(static_cast<std::size_t>(plan.N), 0.0);
    std::vector<double> e_triv(static_cast<std::size_t>(plan.N), 0.0);
    const int workers = resolve_workers(0);
    run_jobs(workers, static_cast<int>(plan.N), [&](int j) {
        const double inv_scale = std::ldexp(1.0, -j);
        const double norm =
            1.0 / (kSqrt2Pi * std::sqrt(std::ldexp(1.0, j)));
        const DecayClass d =
            wt.psi_support_radius > 0.0
                ? DecayClass::compact_support(wt.psi_support_radius *
                                              std::ldexp(1.0, j))
                : mixed_decay;
        e_ibp[static_cast<std::size_t>(j)] =
            line_integral(
                [&](double y) {
                    return abs_or0(model.g_deriv(y)) *
                               std::abs(wt.psi_hat(y * inv_scale)) +
                           model.g(y) *
                               std::abs(wt.psi_hat_deriv(y * inv_scale)) *
                               inv_scale;
                },
                d) *
            norm;
        e_triv[static_cast<std::size_t>(j)] =
            line_integral([&](double y) {
                return model.g(y) * std::abs(wt.psi_hat(y * inv_scale));
            },
                          d) *
            norm;
    });

    struct RowResult {
        double worst_a = 0.0;
        double worst_b0 = 0.0;
        double worst_bk = 0.0;
        long long in_window = 0;
        long long certified = 0;
    };
    std::vector<RowResult> rows(static_cast<std::size_t>(1 + plan.N));

    auto violation = [](int j, long long k, double t, double value,
                        double bound) -> BoundViolation {
        std::ostringstream os;
        os.precision(17);
        if (j < 0) {
            os << "scaling coefficient k=" << k;
        } else {
            os << "detail coefficient j=" << j << " k=" << k;
        }
        os << " at t=" << t << " has |value| " << value
           << " above its decay bound " << bound;
        return BoundViolation(os.str());
    };

    // Interpolated reads carry a small absolute noise floor, so the
    // comparison gets a matching allowance on top of the bound.  The
    // envelope certificates get the same allowance: at t = 0 the scaling-row
    // envelope integral equals A1 exactly, so its own quadrature margin
    // would otherwise push every far index into the direct fallback.
    const double abs_slack = 2e-7;
    auto within = [abs_slack](double value, double bound) {
        return value <= bound * (1.0 + 1e-9) + abs_slack;
    };

    run_jobs(workers, 1 + static_cast<int>(plan.N), [&](int row) {
        RowResult& rr = rows[static_cast<std::size_t>(row)];
        if (row == 0) {
            const ProfileGrid& g = cache.a00_grid;
            for (double t : t_samples) {
                const double scale = constants.A1 + constants.B1 * std::abs(t);
                for (long long k = -(plan.N0 - 1); k <= plan.N0 - 1; ++k) {
                    if (k == 0) continue;
                    const double u = t - static_cast<double>(k);
                    const double bound = scale / std::abs(
                                                     static_cast<double>(k));
                    const bool in_window =
                        !g.empty() && u >= g.min_u() && u <= g.max_u();
                    if (in_window) {
                        const double v = std::abs(g(u));
                        rr.worst_a = std::max(rr.worst_a, v / bound);
                        if (!within(v, bound)) {
                            throw violation(-1, k, t, v, bound);
                        }
                        ++rr.in_window;
                    } else {
                        const double cert =
                            u == 0.0 ? e_triv_a
                                     : std::min(e_triv_a,
                                                e_ibp_a / std::abs(u));
                        if (within(cert, bound)) {
                            rr.worst_a = std::max(rr.worst_a, cert / bound);
                            ++rr.certified;
                        } else {
                            const double v = std::abs(a0k_raw(direct, t, k)
                                                          .real());
                            rr.worst_a = std::max(rr.worst_a, v / bound);
                            if (!within(v, bound)) {
                                throw violation(-1, k, t, v, bound);
                            }
                            ++rr.in_window;
                        }
                    }
                }
            }
            return;
        }
        const int j = row - 1;
        const ProfileGrid& g = cache.bj0_grids[static_cast<std::size_t>(j)];
        const double inv2j = std::ldexp(1.0, -j);
        const double sq2j = std::sqrt(std::ldexp(1.0, j));
        const double bound0 = constants.B / (sq2j * sq2j * sq2j);
        const long long mj = plan.M[static_cast<std::size_t>(j)];
        for (double t : t_samples) {
            const double scale =
                (constants.A + constants.B * std::abs(t)) / sq2j;
            for (long long k = -(mj - 1); k <= mj - 1; ++k) {
                const double u = t - static_cast<double>(k) * inv2j;
                const double bound =
                    k == 0 ? bound0
                           : scale / std::abs(static_cast<double>(k));
                const bool in_window =
                    !g.empty() && u >= g.min_u() && u <= g.max_u();
                if (in_window) {
                    const double v = std::abs(g(u));
                    const double ratio = v / bound;
                    if (k == 0) {
                        rr.worst_b0 = std::max(rr.worst_b0, ratio);
                    } else {
                        rr.worst_bk = std::max(rr.worst_bk, ratio);
                    }
                    if (!within(v, bound)) {
                        throw violation(j, k, t, v, bound);
                    }
                    ++rr.in_window;
                } else {
                    const double et = e_triv[static_cast<std::size_t>(j)];
                    const double ei = e_ibp[static_cast<std::size_t>(j)];
                    const double cert =
                        u == 0.0 ? et : std::min(et, ei / std::abs(u));
                    if (within(cert, bound)) {
                        if (k == 0) {
                            rr.worst_b0 = std::max(rr.worst_b0, cert / bound);
                        } else {
                            rr.worst_bk = std::max(rr.worst_bk, cert / bound);
                        }
                        ++rr.certified;
                    } else {
                        const double v =
                            std::abs(bjk_raw(direct, t, j, k).real());
                        if (k == 0) {
                            rr.worst_b0 = std::max(rr.worst_b0, v / bound);
                        } else {
                            rr.worst_bk = std::max(rr.worst_bk, v / bound);
                        }
                        if (!within(v, bound)) {
                            throw violation(j, k, t, v, bound);
                        }
                        ++rr.in_window;
                    }
                }
            }
        }
    });

    DecayReport report;
    for (const RowResult& rr : rows) {
        report.worst_a_ratio = std::max(report.worst_a_ratio, rr.worst_a);
        report.worst_bj0_ratio = std::max(report.worst_bj0_ratio, rr.worst_b0);
        report.worst_bjk_ratio = std::max(report.worst_bjk_ratio, rr.worst_bk);
        report.checked_in_window += rr.in_window;
        report.certified_out_of_window += rr.certified;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Binary persistence.  Host-endian; the trailing content hash catches both
// corruption and metadata edits.

namespace {

void put_u64(std::ofstream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_i64(std::ofstream& os, long long v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_f64(std::ofstream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_str(std::ofstream& os, const std::string& s) {
    put_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_grid(std::ofstream& os, const ProfileGrid& g) {
    put_u64(os, g.values.size());
    put_f64(os, g.u0);
    put_f64(os, g.step);
    if (!g.values.empty()) {
        os.write(reinterpret_cast<const char*>(g.values.data()),
                 static_cast<std::streamsize>(g.values.size() *
                                              sizeof(double)));
    }
}

struct Reader {
    std::ifstream is;

    explicit Reader(const std::string& path)
        : is(path, std::ios::binary) {
        if (!is) throw ProvenanceMismatch("cannot open cache file: " + path);
    }

    void raw(void* p, std::size_t n) {
        is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
        if (is.gcount() != static_cast<std::streamsize>(n)) {
            throw ProvenanceMismatch("truncated cache file");
        }
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        raw(&v, sizeof(v));
        return v;
    }

    long long i64() {
        long long v = 0;
        raw(&v, sizeof(v));
        return v;
    }

    double f64() {
        double v = 0.0;
        raw(&v, sizeof(v));
        return v;
    }

    std::string str() {
        const std::uint64_t n = u64();
        if (n > (1ull << 20)) throw ProvenanceMismatch("oversized string");
        std::string s(n, '\0');
        if (n > 0) raw(s.data(), n);
        return s;
    }

    ProfileGrid grid() {
        ProfileGrid g;
        const std::uint64_t n = u64();
        if (n > (1ull << 32)) throw ProvenanceMismatch("oversized grid");
        g.u0 = f64();
        g.step = f64();
        g.values.resize(n);
        if (n > 0) raw(g.values.data(), n * sizeof(double));
        return g;
    }
};

constexpr std::uint64_t kCacheMagic = 0x3130484341435357ull;  // "WSCACH01"

}  // namespace

void save_cache(const CoefficientCache& cache, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write cache file: " + path);
    put_u64(os, kCacheMagic);
    put_str(os, cache.model_family);
    put_u64(os, cache.model_params.size());
    for (const auto& [k, v] : cache.model_params) {
        put_str(os, k);
        put_f64(os, v);
    }
    put_i64(os, cache.wavelet.family == WaveletSpec::Family::Meyer ? 0 : 1);
    put_i64(os, cache.wavelet.order);
    put_i64(os, cache.wavelet.product_depth);
    put_i64(os, cache.plan.N0);
    put_i64(os, cache.plan.N);
    for (long long m : cache.plan.M) put_i64(os, m);
    put_f64(os, cache.plan.variance_budget);
    put_f64(os, cache.T);
    put_f64(os, cache.grid_step);
    put_f64(os, cache.floor_eta);
    put_f64(os, cache.max_imag_ratio);
    put_f64(os, cache.max_probe_error);
    put_grid(os, cache.a00_grid);
    put_u64(os, cache.bj0_grids.size());
    for (const ProfileGrid& g : cache.bj0_grids) put_grid(os, g);
    put_u64(os, cache.content_hash);
    if (!os) throw Error("write failed for cache file: " + path);
}

CoefficientCache load_cache(const std::string& path) {
    Reader r(path);
    if (r.u64() != kCacheMagic) {
        throw ProvenanceMismatch("not a coefficient cache file: " + path);
    }
    CoefficientCache cache;
    cache.model_family = r.str();
    const std::uint64_t nparams = r.u64();
    if (nparams > 1024) throw ProvenanceMismatch("oversized parameter list");
    for (std::uint64_t i = 0; i < nparams; ++i) {
        const std::string key = r.str();
        cache.model_params[key] = r.f64();
    }
    cache.wavelet.family = r.i64() == 0 ? WaveletSpec::Family::Meyer
                                        : WaveletSpec::Family::Daubechies;
    cache.wavelet.order = static_cast<int>(r.i64());
    cache.wavelet.product_depth = static_cast<int>(r.i64());
    cache.plan.N0 = r.i64();
    cache.plan.N = r.i64();
    if (cache.plan.N < 0 || cache.plan.N > (1 << 24)) {
        throw ProvenanceMismatch("implausible level count");
    }
    cache.plan.M.resize(static_cast<std::size_t>(cache.plan.N));
    for (auto& m : cache.plan.M) m = r.i64();
    cache.plan.variance_budget = r.f64();
    cache.T = r.f64();
    cache.grid_step = r.f64();
    cache.floor_eta = r.f64();
    cache.max_imag_ratio = r.f64();
    cache.max_probe_error = r.f64();
    cache.a00_grid = r.grid();
    const std::uint64_t nlevels = r.u64();
    if (nlevels != static_cast<std::uint64_t>(cache.plan.N)) {
        throw ProvenanceMismatch("level count disagrees with plan");
    }
    cache.bj0_grids.clear();
    cache.bj0_grids.reserve(nlevels);
    for (std::uint64_t i = 0; i < nlevels; ++i) {
        cache.bj0_grids.push_back(r.grid());
    }
    cache.content_hash = r.u64();
    if (cache_content_hash(cache) != cache.content_hash) {
        throw ProvenanceMismatch("cache content hash mismatch: " + path);
    }
    return cache;
}

}  // namespace wavesim
