#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "wavesim/planner.hpp"
#include "wavesim/spectra.hpp"
#include "wavesim/wavelets.hpp"

namespace wavesim {

// Context for direct (single-point, quadrature-backed) coefficient
// evaluation.  Slow path: one oscillatory integral per call.
struct DirectCoefficients {
    const SpectralModel* model = nullptr;
    const WaveletTransforms* transforms = nullptr;
    double rel_tol = 1e-9;
    // High phase frequencies need many period-limited panels, so the default
    // panel budget is far above the general-purpose one.
    QuadratureOptions quad{.abs_tol_floor = 1e-12, .max_panels = 200000};
};

// Raw defining integrals, complex-valued.  The imaginary part must be
// negligible for even densities and real wavelets; callers that want the
// realness witness use these.
std::complex<double> a0k_raw(const DirectCoefficients& ctx, double t,
                             long long k);
std::complex<double> bjk_raw(const DirectCoefficients& ctx, double t, int j,
                             long long k);

double a0k(const DirectCoefficients& ctx, double t, long long k);
double bjk(const DirectCoefficients& ctx, double t, int j, long long k);

// One shift-invariant coefficient profile sampled on a uniform argument
// grid.  The window covers every argument where the profile can exceed the
// cache floor; outside the window (but inside the plan's reachable range)
// the profile is certified below the floor and reads as zero.
struct ProfileGrid {
    double u0 = 0.0;
    double step = 0.0;
    std::vector<double> values;

    bool empty() const { return values.empty(); }
    double min_u() const { return u0; }
    double max_u() const {
        return u0 + step * static_cast<double>(values.size() - 1);
    }
    // 4-point Lagrange cubic interpolation; exact zero outside the window.
    double operator()(double u) const;
};

struct CacheOptions {
    double energy_tol = 1e-8;
    double probe_tol = 1e-7;
    int probe_count = 100;
    std::uint64_t probe_seed = 0x9E3779B97F4A7C15ull;
    int max_step_halvings = 3;
    int workers = 0;  // 0: WAVESIM_THREADS env var, else hardware concurrency
};

// Shift-structure cache: the whole plan collapses to one scaling profile
// a00(u) and one detail profile bj0(u) per level.  Values are stored real
// after a realness check; levels whose profile never reaches the floor are
// stored empty.
struct CoefficientCache {
    std::string model_family;
    std::map<std::string, double> model_params;
    WaveletSpec wavelet;
    TruncationPlan plan;
    double T = 0.0;
    double grid_step = 0.0;
    double floor_eta = 0.0;
    ProfileGrid a00_grid;
    std::vector<ProfileGrid> bj0_grids;
    double max_imag_ratio = 0.0;
    double max_probe_error = 0.0;
    std::uint64_t content_hash = 0;

    // Profile lookups by argument; CacheMiss outside the reachable range
    // [-(N0-1), T + (N0-1)] (scaling row) or its level-j analogue.
    double a00(double u) const;
    double bj0(int j, double u) const;
};

// Builds every profile the plan can touch for t in [0, T].  Interpolated
// values are checked against direct quadrature at probe_count random
// arguments and the grid step is halved until the worst probe error is
// within probe_tol.  Level builds run in parallel; the result is immutable.
CoefficientCache build_cache(const TruncationPlan& plan,
                             const SpectralModel& model,
                             const WaveletTransforms& wt, double T,
                             double grid_step = 0.01,
                             const CacheOptions& opts = {});

double a0k(const CoefficientCache& cache, double t, long long k);
double bjk(const CoefficientCache& cache, double t, int j, long long k);

struct DecayReport {
    double worst_a_ratio = 0.0;    // |a0k(t)| * |k| / (A1 + B1 |t|)
    double worst_bj0_ratio = 0.0;  // |bj0(t)| * 2^{3j/2} / B
    double worst_bjk_ratio = 0.0;  // |bjk(t)| * |k| 2^{j/2} / (A + B |t|)
    long long checked_in_window = 0;
    long long certified_out_of_window = 0;
};

// Checks the three decay inequalities for every coefficient index in the
// plan at every sampled t.  In-window coefficients are checked from their
// computed values; out-of-window ones are certified through freshly computed
// integration-by-parts envelopes (independent of the cached values, so a
// mis-scaled profile cannot certify itself).  Throws BoundViolation naming
// (j, k, t) on the first violation.
DecayReport verify_decay(const TruncationPlan& plan,
                         const PlanConstants& constants,
                         const CoefficientCache& cache,
                         const DirectCoefficients& direct,
                         const std::vector<double>& t_samples);

// Binary cache files keyed by the content hash of
// (model params, wavelet spec, plan, grid step).  load_cache throws
// ProvenanceMismatch if the file is corrupt or hashes to something else.
void save_cache(const CoefficientCache& cache, const std::string& path);
CoefficientCache load_cache(const std::string& path);

}  // namespace wavesim
