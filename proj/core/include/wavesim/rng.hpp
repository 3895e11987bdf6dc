#pragma once

#include <cstdint>

namespace wavesim {

// Counter-based Gaussian draws: each variate is a pure function of
// (seed, replication, row, index), so replications can run in any order on
// any number of workers and a model shares draws with a dominating reference
// plan automatically (same key, same value).  Row 0 is the scaling row; row
// 1 + j is detail level j.
//
// The key is mixed through two rounds of a 64-bit finalizer and turned into
// one N(0,1) value via Box-Muller.
double gaussian_draw(std::uint64_t seed, std::uint64_t replication,
                     std::uint32_t row, std::int64_t index);

// The bijection used to fold signed coefficient indices into the key space:
// 0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ...
std::uint64_t zigzag(std::int64_t k);

// 64-bit mix underlying the draws; exposed for statistical tests.
std::uint64_t mix64(std::uint64_t x);

}  // namespace wavesim
