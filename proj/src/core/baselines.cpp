#include "csubag/baselines.hpp"

#include "csubag/parallel.hpp"

namespace csubag {

LassoFit full_lasso(const Dataset& dataset, double lambda, SolverConfig config) {
    config.objective_scale = static_cast<double>(dataset.n());
    return fit_weighted_lasso(dataset.x(), dataset.y(), {}, lambda, config);
}

std::vector<LassoFit> full_lasso_path(const Dataset& dataset, std::span<const double> lambdas,
                                      SolverConfig config) {
    config.objective_scale = static_cast<double>(dataset.n());
    return lasso_path(dataset.x(), dataset.y(), {}, lambdas, config);
}

SubaggingResult classic_subagging(const Dataset& dataset, const PartitionPlan& plan,
                                  double lambda1, SolverConfig config, std::size_t threads) {
    if (plan.d() == 0) throw Error(ErrorCode::InvalidArgument, "plan has no subsets");
    if (plan.n != dataset.n()) throw Error(ErrorCode::DimensionMismatch, "plan built for another n");
    const auto p = static_cast<Eigen::Index>(dataset.p());
    std::vector<LassoFit> fits(plan.d());
    parallel_for(plan.d(), threads, [&](std::size_t i) {
        SolverConfig local = config;
        local.objective_scale = static_cast<double>(plan.subsets[i].size());
        fits[i] = fit_weighted_lasso(dataset.rows_x(plan.subsets[i]),
                                     dataset.rows_y(plan.subsets[i]), {}, lambda1, local);
    });

    SubaggingResult out;
    out.lambda = lambda1;
    out.beta_avg = Vector::Zero(p);
    std::vector<std::size_t> all;
    for (const auto& f : fits) {
        out.beta_avg += f.beta;
        all.insert(all.end(), f.active_set.begin(), f.active_set.end());
        if (!f.converged) ++out.unconverged_fits;
    }
    out.beta_avg /= static_cast<double>(fits.size());
    out.support = support_of(out.beta_avg);
    out.union_support = make_index_set(std::move(all));
    return out;
}

}  // namespace csubag
