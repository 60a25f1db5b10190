#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "csubag/model.hpp"
#include "csubag/rng.hpp"

namespace csubag {

/// One shifted-multinomial draw w = 1 + Multinomial(n - N, uniform over N cells).
WeightVector draw_multinomial_weights(std::int64_t n, std::size_t subsample_size, Rng& rng);

/// `count` independent draws, the k-th using a stream derived from (seed, k).
std::vector<WeightVector> multinomial_weights(std::int64_t n, std::size_t subsample_size,
                                              std::size_t count, std::uint64_t seed);

struct OptimalWeights {
    std::vector<double> weights;
    double objective = 0.0;  // lambda_min(sum_l w_l x_l x_l')
    /// Objective of every accepted iterate, starting with the uniform point.
    std::vector<double> history;
};

/// Maximizes the smallest eigenvalue of sum_l w_l x_l x_l' over
/// {w >= 0, sum w = n} by entropic mirror ascent.
OptimalWeights optimal_weights(const Matrix& x_sub, double n, std::size_t iters = 500,
                               double tol = 1e-9);

/// Largest-remainder rounding after flooring every entry at 1; ties go to
/// the lowest index.
WeightVector round_weights(const std::vector<double>& w, std::int64_t n);

/// lambda_min of sum_l w_l x_l x_l'.
double min_eigen_weighted_gram(const Matrix& x_sub, const std::vector<double>& w);

}  // namespace csubag
