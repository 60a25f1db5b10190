#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "csubag/model.hpp"

namespace csubag {

enum class SweepOrder { Forward, Reverse };

struct SolverConfig {
    /// Iteration stops once the largest coordinate change of a full sweep is below tol.
    double tol = 1e-7;
    std::size_t max_iters = 10000;
    /// Divisor of the quadratic term: n for the weighted sub-Lasso and the
    /// full Lasso, N for the unweighted subagging fits.
    double objective_scale = 1.0;
    SweepOrder order = SweepOrder::Forward;
    /// Record the penalized objective after every sweep.
    bool track_objective = false;
};

struct LassoFit {
    Vector beta;
    double lambda = 0.0;
    IndexSet active_set;
    std::size_t iterations = 0;
    double kkt_residual = 0.0;
    bool converged = false;
    /// lambda == 0 with more columns than rows: converged point, no uniqueness.
    bool underdetermined = false;
    std::vector<double> objective_history;
};

inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/// Smallest lambda whose solution is the zero vector. An empty weight span
/// means unit weights.
double lambda_max(const Matrix& x, const Vector& y, std::span<const double> weights,
                  double scale);

/// (1/(2 scale)) sum_l w_l (y_l - x_l' beta)^2 + lambda |beta|_1
double lasso_objective(const Matrix& x, const Vector& y, std::span<const double> weights,
                       double scale, double lambda, const Vector& beta);

/// Minimizes lasso_objective by cyclic coordinate descent. Returns the last
/// iterate with converged = false when max_iters sweeps are exhausted.
LassoFit fit_weighted_lasso(const Matrix& x, const Vector& y, std::span<const double> weights,
                            double lambda, const SolverConfig& config,
                            const std::optional<Vector>& warm_start = std::nullopt);

/// Largest violation of the Lasso optimality conditions at fit.beta.
double kkt_check(const LassoFit& fit, const Matrix& x, const Vector& y,
                 std::span<const double> weights, double lambda, double scale);

/// Warm-started fits along a strictly descending lambda sequence.
std::vector<LassoFit> lasso_path(const Matrix& x, const Vector& y,
                                 std::span<const double> weights,
                                 std::span<const double> lambdas, const SolverConfig& config);

IndexSet support_of(const Vector& beta);

}  // namespace csubag
