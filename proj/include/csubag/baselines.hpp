#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csubag/lasso.hpp"
#include "csubag/model.hpp"

namespace csubag {

/// Lasso on the whole dataset with the 1/(2n) objective.
LassoFit full_lasso(const Dataset& dataset, double lambda, SolverConfig config = {});

/// Warm-started full-data path over a strictly descending grid.
std::vector<LassoFit> full_lasso_path(const Dataset& dataset, std::span<const double> lambdas,
                                      SolverConfig config = {});

struct SubaggingResult {
    Vector beta_avg;
    /// Nonzeros of the averaged coefficients.
    IndexSet support;
    /// Union of the per-subsample supports.
    IndexSet union_support;
    double lambda = 0.0;
    std::size_t unconverged_fits = 0;
};

/// Average of d unweighted Lasso fits, one per subset of the plan, each with
/// the 1/(2N) objective.
SubaggingResult classic_subagging(const Dataset& dataset, const PartitionPlan& plan,
                                  double lambda1, SolverConfig config = {},
                                  std::size_t threads = 0);

}  // namespace csubag
