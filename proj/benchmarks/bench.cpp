// Microbenchmarks for the hot paths: quadrature, symbol evaluation, cache
// construction, path evaluation, and the counter-based generator.
#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <vector>

#include "wavesim/coeffs.hpp"
#include "wavesim/planner.hpp"
#include "wavesim/quadrature.hpp"
#include "wavesim/rng.hpp"
#include "wavesim/sampler.hpp"
#include "wavesim/spectra.hpp"
#include "wavesim/wavelets.hpp"

namespace {

using namespace wavesim;

void BM_IntegrateLine(benchmark::State& state) {
    Integrand f;
    f.eval = [](double y) {
        return std::complex<double>(1.0 / ((1.0 + y * y) * (1.0 + y * y)),
                                    0.0);
    };
    f.decay = DecayClass::polynomial(4.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate_line(f, 1e-8));
    }
}
BENCHMARK(BM_IntegrateLine);

void BM_IntegrateOscillatory(benchmark::State& state) {
    const double omega = static_cast<double>(state.range(0));
    Integrand f;
    f.eval = [omega](double y) {
        return std::exp(-y * y) *
               std::exp(std::complex<double>(0.0, -omega * y));
    };
    f.decay = DecayClass::exponential(1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate_line(f, 1e-8));
    }
}
BENCHMARK(BM_IntegrateOscillatory)->Arg(2)->Arg(16)->Arg(64);

void BM_MeyerSymbol(benchmark::State& state) {
    const WaveletTransforms wt = build_meyer();
    double y = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(wt.psi_hat(y));
        y += 1e-4;
        if (y > 8.0) y = 0.1;
    }
}
BENCHMARK(BM_MeyerSymbol);

void BM_DaubechiesSymbol(benchmark::State& state) {
    const WaveletTransforms wt = build_daubechies(4);
    double y = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(wt.phi_hat(y));
        y += 1e-4;
        if (y > 8.0) y = 0.1;
    }
}
BENCHMARK(BM_DaubechiesSymbol);

void BM_BuildCache(benchmark::State& state) {
    const SpectralModel model =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    TruncationPlan plan;
    plan.N0 = 6;
    plan.N = 3;
    plan.M = {6, 6, 6};
    plan.variance_budget = 1e-3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_cache(plan, model, wt, 1.0));
    }
}
BENCHMARK(BM_BuildCache)->Unit(benchmark::kMillisecond);

void BM_EvaluateBase(benchmark::State& state) {
    const SpectralModel model =
        scale_density(make_density("rational_even", {{"n", 2.0}}), 0.5);
    const WaveletTransforms wt = build_meyer();
    TruncationPlan plan;
    plan.N0 = 24;
    plan.N = 5;
    plan.M.assign(5, 64);
    plan.variance_budget = 1e-4;
    const CoefficientCache cache = build_cache(plan, model, wt, 1.0);
    const ModelRealization real = draw_coefficients(plan, 12345, 0);
    const std::vector<double> grid =
        uniform_grid(1.0, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_base(real, cache, grid));
    }
}
BENCHMARK(BM_EvaluateBase)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_GaussianDraw(benchmark::State& state) {
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            gaussian_draw(42, 0, 1, static_cast<std::int64_t>(i++)));
    }
}
BENCHMARK(BM_GaussianDraw);

}  // namespace

BENCHMARK_MAIN();
