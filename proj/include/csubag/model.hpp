#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csubag/error.hpp"

namespace csubag {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Sorted, duplicate-free list of 0-based indices.
using IndexSet = std::vector<std::size_t>;

IndexSet make_index_set(std::vector<std::size_t> indices);

struct GroundTruth {
    Vector beta_star;
    IndexSet support;
    double sigma = 1.0;

    /// Builds the truth record from beta_star; support is its nonzero pattern.
    static GroundTruth from_beta(Vector beta_star, double sigma);
};

struct NormalizedColumns {
    Matrix x;
    Vector scales;
};

/// Scales every column to unit l2 norm. Throws ZeroVarianceColumn when a
/// column norm is below 1e-12.
NormalizedColumns normalize_columns(const Matrix& x);

/// Immutable regression dataset with unit-norm design columns.
class Dataset {
public:
    /// Normalizes `x` (after optional centering of y and the columns of x).
    static Dataset from_raw(Vector y, Matrix x,
                            std::optional<GroundTruth> truth = std::nullopt,
                            bool center = false);

    std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
    std::size_t p() const { return static_cast<std::size_t>(x_.cols()); }

    const Vector& y() const { return y_; }
    const Matrix& x() const { return x_; }
    const Vector& column_scales() const { return scales_; }
    const std::optional<GroundTruth>& truth() const { return truth_; }

    /// Rows `rows` of the design and response.
    Matrix rows_x(std::span<const std::size_t> rows) const;
    Vector rows_y(std::span<const std::size_t> rows) const;

    /// Maps coefficients from the unit-norm scale back to the raw columns.
    Vector to_original_scale(const Vector& beta) const;

private:
    Dataset(Vector y, Matrix x, Vector scales, std::optional<GroundTruth> truth)
        : y_(std::move(y)), x_(std::move(x)), scales_(std::move(scales)),
          truth_(std::move(truth)) {}

    Vector y_;
    Matrix x_;
    Vector scales_;
    std::optional<GroundTruth> truth_;
};

struct PartitionPlan {
    std::vector<IndexSet> subsets;  // d sets in plan order, each of size N
    std::size_t b = 1;
    std::size_t m = 1;
    std::size_t n = 0;
    std::size_t subsample_size = 0;
    std::uint64_t seed = 0;
    /// Shuffled indices not assigned to any subset.
    std::vector<std::size_t> leftover;

    std::size_t d() const { return subsets.size(); }
};

struct WeightVector {
    std::vector<std::int64_t> values;
    std::size_t subsample_id = 0;
    std::size_t replicate_id = 0;

    std::int64_t total() const;
    std::vector<double> as_real() const;
};

struct SelectionResult {
    Vector pi;
    double tau = 0.5;
    IndexSet selected;
    Vector beta_agg;
    double lambda_used = 0.0;
};

struct SpectralDiagnostics {
    double kappa_in = 0.0;
    double kappa_out_inv_min_eig = 0.0;
    double re_constant = 0.0;
    double ir_norm = 0.0;

    bool ir_satisfied() const { return ir_norm < 1.0; }
};

struct Metrics {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

Metrics metrics(const IndexSet& selected, const GroundTruth& truth);

}  // namespace csubag
