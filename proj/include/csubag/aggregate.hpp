#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "csubag/lasso.hpp"
#include "csubag/model.hpp"

namespace csubag {

enum class LambdaMode {
    Fixed,      // use RunConfig::lambda
    Reference,  // sqrt(log p) / n, the sqrt(log p / n) level for unit-norm columns
    Grid,       // max_contrast_cv over RunConfig::lambda_grid
    Adaptive,   // max_contrast_cv over the kappa-driven adaptive grid
};

enum class WeightScheme { Multinomial, Optimal };

struct RunConfig {
    std::size_t subsample_size = 75;  // N
    std::size_t b = 10;
    std::size_t m = 1;
    std::size_t K = 3;
    std::size_t B = 2;
    double tau = 0.5;
    LambdaMode lambda_mode = LambdaMode::Reference;
    double lambda = 0.0;
    std::vector<double> lambda_grid;
    std::size_t calibration_size = 1000;
    std::uint64_t seed = 1;
    WeightScheme weights = WeightScheme::Multinomial;
    std::size_t optimal_iters = 500;
    std::size_t max_pairs = 64;
    /// Subsamples visited by the sequential adaptive-grid pass.
    std::size_t adaptive_iters = 5;
    /// Total sample size used for the weights and the 1/(2n) objective; 0
    /// means the dataset row count.
    double nominal_n = 0.0;
    std::size_t threads = 0;
    double solver_tol = 1e-7;
    std::size_t solver_max_iters = 10000;

    std::size_t d() const { return b * m; }
};

/// Throws InvalidArgument / InsufficientSamples on an unusable configuration.
void validate(const RunConfig& config, std::size_t n_rows, std::size_t p);

LambdaMode parse_lambda_mode(const std::string& text);
WeightScheme parse_weight_scheme(const std::string& text);

/// sqrt(log p) / n with p floored at 2 so the level stays positive.
double reference_lambda(double n, std::size_t p);

/// Bounds of the selection-probability estimator for b contrast groups.
double pi_lower(std::size_t b);
double pi_upper(std::size_t b);

IndexSet sub_support(const LassoFit& fit);
IndexSet union_over_weights(std::span<const IndexSet> supports);

/// pi*_j = (#groups whose m supports all contain j) / (sqrt(b)(sqrt(b)+1))
///         + 1 / (2(sqrt(b)+1)); supports are in plan order. Throws BadGrouping.
Vector compute_pi(std::span<const IndexSet> subset_supports, std::size_t b, std::size_t m,
                  std::size_t p);

/// Mean of the fits on `selected`, exact zeros elsewhere.
Vector aggregate_beta(std::span<const Vector> fits, const IndexSet& selected, std::size_t p);

/// z / (2 + kappa_out) * kappa_in * |A| * sqrt(log p / n), z = 1..8.
std::vector<double> lambda_grid_from_kappas(double kappa_out, double kappa_in,
                                            std::size_t active_size, std::size_t p, double n);

/// The same grid with kappa_out from a calibration block outside subset i
/// and kappa_in from subset i, both restricted to the columns `active`.
/// Singular Grams are capped at 1e6.
std::vector<double> adaptive_lambda_grid(const Matrix& x, const PartitionPlan& plan,
                                         std::size_t i, const IndexSet& active, double n,
                                         std::size_t calibration_size, std::uint64_t seed);

/// One subsample of the contrast cross-validation: its rows and one weight
/// vector per replicate.
struct CvBlock {
    Matrix x;
    Vector y;
    std::vector<std::vector<double>> weights;
};

/// Ordered pair ((i, k), (i2, k2)) of (subsample, replicate) fits.
struct CvPair {
    std::size_t i = 0;
    std::size_t k = 0;
    std::size_t i2 = 0;
    std::size_t k2 = 0;
};

/// All (dK)^2 ordered pairs when that is at most max_pairs, otherwise a
/// uniform sample of max_pairs distinct ones.
std::vector<CvPair> contrast_pairs(std::size_t d, std::size_t K, std::size_t max_pairs,
                                   std::uint64_t seed);

/// Sum over pairs of
///   |sqrt(w_{i,k}) o (y_i - x_i b_{i2,k2})|^2 / (1 - s_{i2,k2}/n)^2
/// - |sqrt(w_{i2,k2}) o (y_i2 - x_i2 b_{i,k})|^2 / (1 - s_{i,k}/n)^2
/// where fits[i][k] is the fit of subsample i under replicate k.
double contrast_statistic(std::span<const CvBlock> blocks,
                          const std::vector<std::vector<LassoFit>>& fits,
                          std::span<const CvPair> pairs, double n);

struct CvChoice {
    std::size_t index = 0;
    std::vector<double> statistics;
};

/// Candidate minimizing the contrast statistic (first one on ties).
/// fits[c][i][k] is the fit for candidate c.
CvChoice max_contrast_cv(std::span<const double> candidates, std::span<const CvBlock> blocks,
                         const std::vector<std::vector<std::vector<LassoFit>>>& fits, double n,
                         std::size_t max_pairs, std::uint64_t seed);

struct SelectionRun {
    SelectionResult result;
    /// pi vector of each outer repetition.
    std::vector<Vector> pi_per_repetition;
    /// Union-over-replicates support of every subsample, [repetition][subset].
    std::vector<std::vector<IndexSet>> subsample_supports;
    std::vector<double> lambda_candidates;
    std::vector<double> cv_statistics;
    std::size_t fit_count = 0;
    std::size_t unconverged_fits = 0;
};

/// B partitions -> K weighted fits per subsample -> union -> pi (averaged
/// over repetitions) -> threshold at tau -> aggregated coefficients.
SelectionRun run_selection(const Dataset& dataset, const RunConfig& config);

}  // namespace csubag
