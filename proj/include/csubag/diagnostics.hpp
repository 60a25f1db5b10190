#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "csubag/model.hpp"

namespace csubag {

struct Spectrum {
    double min_eig = 0.0;
    double max_eig = 0.0;
    double condition_number = 0.0;  // +inf when min_eig <= 0
};

/// Extremal eigenvalues of a symmetric matrix by power iteration (largest)
/// and shifted power iteration (smallest). Throws NonSymmetric.
Spectrum spectra(const Matrix& gram, double tol = 1e-9);

/// || X_{S^c}' X_S (X_S' X_S)^{-1} sign ||_inf. `signs` defaults to all +1.
/// Throws SingularGram when X_S' X_S is not invertible.
double ir_norm(const Matrix& x, const IndexSet& support, std::span<const double> signs = {});

/// Monte-Carlo minimum of sum_l w_l^2 (x_l' v)^2 / (sqrt(N) |v_S|_2) over
/// random directions of the cone |v_{S^c}|_1 <= 3 |v_S|_1, with |v_S|_2 = 1.
/// An upper bound on the restricted-eigenvalue constant.
double re_proxy(const Matrix& x_sub, const IndexSet& support, std::span<const double> weights,
                std::size_t trials, std::uint64_t seed);

/// Condition number of X_A'X_A restricted to columns A, capped at `cap`.
double gram_condition(const Matrix& x, const IndexSet& columns, double cap = 1e6);

/// 1 / lambda_min of X_A'X_A, capped at `cap`.
double gram_inverse_min_eig(const Matrix& x, const IndexSet& columns, double cap = 1e6);

Matrix select_columns(const Matrix& x, const IndexSet& columns);

}  // namespace csubag
