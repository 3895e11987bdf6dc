#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavesim/coeffs.hpp"
#include "wavesim/planner.hpp"
#include "wavesim/rng.hpp"

namespace wavesim {

// One realization of the expansion coefficients.  Draws are pure functions
// of (seed, replication, index), generated on access rather than stored: a
// large plan holds tens of millions of variates of which a path evaluation
// touches only the few thousand whose coefficient functions are nonzero at
// some grid time.  Identical (seed, replication) always reproduce identical
// values, and a reference plan that dominates this plan index-wise shares
// its draws automatically.
struct ModelRealization {
    TruncationPlan plan;
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;

    double xi0(long long k) const;         // scaling row, |k| <= N0-1
    double eta(int j, long long k) const;  // level j, |k| <= M[j]-1
    long long draw_count() const { return plan.draw_count(); }
};

ModelRealization draw_coefficients(const TruncationPlan& plan,
                                   std::uint64_t seed,
                                   std::uint64_t replication = 0);

struct SamplePath {
    enum class Kind { Base, Power, Product };

    std::vector<double> times;
    std::vector<double> values;
    Kind kind = Kind::Base;
    long long power = 1;
};

std::vector<double> uniform_grid(double T, int n_points);

// X(t_i) = sum_k xi0_k a0k(t_i) + sum_j sum_k eta_jk bjk(t_i), summed in
// fixed order (k ascending within a level, levels ascending) for
// bit-reproducibility.  The sums run over the indices whose cached profile
// window contains t_i; everything else contributes below the cache floor.
// Throws CacheMiss if a time falls outside the cache's reachable range.
SamplePath evaluate_base(const ModelRealization& realization,
                         const CoefficientCache& cache,
                         const std::vector<double>& times);

SamplePath power_path(const SamplePath& base, long long s);

// Pointwise product of two base paths on the same grid; GridMismatch
// otherwise.
SamplePath product_path(const SamplePath& base1, const SamplePath& base2);

}  // namespace wavesim
