#include "csubag/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace csubag {

namespace {

Vector weight_vector(std::span<const double> weights, Eigen::Index rows) {
    if (weights.empty()) return Vector::Ones(rows);
    if (static_cast<Eigen::Index>(weights.size()) != rows) {
        throw Error(ErrorCode::DimensionMismatch,
                    "weight length " + std::to_string(weights.size()) + " differs from row count " +
                        std::to_string(rows));
    }
    return Eigen::Map<const Vector>(weights.data(), rows);
}

void check_dims(const Matrix& x, const Vector& y) {
    if (y.size() != x.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "response length differs from row count");
    }
}

void check_scale(double scale) {
    if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "objective scale must be positive");
}

}  // namespace

IndexSet support_of(const Vector& beta) {
    IndexSet out;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

double lambda_max(const Matrix& x, const Vector& y, std::span<const double> weights,
                  double scale) {
    check_dims(x, y);
    check_scale(scale);
    const Vector w = weight_vector(weights, x.rows());
    if (x.cols() == 0) return 0.0;
    return (x.transpose() * w.cwiseProduct(y)).cwiseAbs().maxCoeff() / scale;
}

double lasso_objective(const Matrix& x, const Vector& y, std::span<const double> weights,
                       double scale, double lambda, const Vector& beta) {
    check_dims(x, y);
    const Vector w = weight_vector(weights, x.rows());
    const Vector r = y - x * beta;
    return w.dot(r.cwiseAbs2()) / (2.0 * scale) + lambda * beta.lpNorm<1>();
}

LassoFit fit_weighted_lasso(const Matrix& x, const Vector& y, std::span<const double> weights,
                            double lambda, const SolverConfig& config,
                            const std::optional<Vector>& warm_start) {
    check_dims(x, y);
    check_scale(config.objective_scale);
    if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
    if (!(config.tol > 0.0) || config.max_iters < 1) {
        throw Error(ErrorCode::InvalidArgument, "solver needs tol > 0 and max_iters >= 1");
    }
    const Eigen::Index p = x.cols();
    if (warm_start && warm_start->size() != p) {
        throw Error(ErrorCode::DimensionMismatch, "warm start length differs from p");
    }
    const double scale = config.objective_scale;
    const Vector w = weight_vector(weights, x.rows());

    LassoFit fit;
    fit.lambda = lambda;
    fit.beta = warm_start ? *warm_start : Vector::Zero(p);

    const Vector diag = x.cwiseAbs2().transpose() * w / scale;
    // grad holds the weighted correlation of each column with the current residual
    Vector grad = x.transpose() * w.cwiseProduct(y - x * fit.beta) / scale;

    std::vector<Vector> gram(static_cast<std::size_t>(p));
    std::vector<char> cached(static_cast<std::size_t>(p), 0);
    auto gram_col = [&](Eigen::Index j) -> const Vector& {
        auto k = static_cast<std::size_t>(j);
        if (!cached[k]) {
            gram[k] = x.transpose() * w.cwiseProduct(x.col(j)) / scale;
            cached[k] = 1;
        }
        return gram[k];
    };

    auto update = [&](Eigen::Index j) -> double {
        double next = 0.0;
        if (diag[j] > 0.0) {
            next = soft_threshold(grad[j] + diag[j] * fit.beta[j], lambda) / diag[j];
        }
        const double delta = next - fit.beta[j];
        if (delta != 0.0) {
            grad.noalias() -= delta * gram_col(j);
            fit.beta[j] = next;
        }
        return std::abs(delta);
    };

    std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;
    if (config.order == SweepOrder::Reverse) std::reverse(all.begin(), all.end());

    auto sweep = [&](const std::vector<Eigen::Index>& coords) {
        double largest = 0.0;
        for (auto j : coords) largest = std::max(largest, update(j));
        ++fit.iterations;
        if (config.track_objective) {
            fit.objective_history.push_back(
                lasso_objective(x, y, weights, scale, lambda, fit.beta));
        }
        return largest;
    };

    // Newton step on the stationarity equations of the current sign pattern.
    // When a coordinate would change sign the step stops at the first zero
    // crossing; the objective is convex and decreasing along that segment.
    // Returns true when the full step was taken.
    const Vector corr0 = x.transpose() * w.cwiseProduct(y) / scale;
    auto polish = [&](const std::vector<Eigen::Index>& act) {
        const auto k = static_cast<Eigen::Index>(act.size());
        if (k == 0 || k > x.rows()) return false;
        Matrix g(k, k);
        Vector rhs(k), cur(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const Eigen::Index j = act[static_cast<std::size_t>(a)];
            const Vector& col = gram_col(j);
            for (Eigen::Index c = 0; c < k; ++c) g(c, a) = col[act[static_cast<std::size_t>(c)]];
            cur[a] = fit.beta[j];
            rhs[a] = corr0[j] - lambda * (cur[a] > 0.0 ? 1.0 : -1.0);
        }
        Eigen::LDLT<Matrix> ldlt(g);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
        Vector cand = ldlt.solve(rhs);
        if (!cand.allFinite()) return false;
        if ((g * cand - rhs).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
            return false;
        }
        double t = 1.0;
        for (Eigen::Index a = 0; a < k; ++a) {
            if (cand[a] == 0.0 || (cand[a] > 0.0) != (cur[a] > 0.0)) {
                t = std::min(t, cur[a] / (cur[a] - cand[a]));
            }
        }
        const bool full = t == 1.0;
        Vector next = cur + t * (cand - cur);
        for (Eigen::Index a = 0; a < k; ++a) {
            if (!full && (next[a] == 0.0 || (next[a] > 0.0) != (cur[a] > 0.0) ||
                          std::abs(next[a]) <= 1e-14 * std::abs(cur[a]))) {
                next[a] = 0.0;
            }
            const Eigen::Index j = act[static_cast<std::size_t>(a)];
            const double delta = next[a] - cur[a];
            if (delta != 0.0) {
                grad.noalias() -= delta * gram_col(j);
                fit.beta[j] = next[a];
            }
        }
        return full;
    };

    // With more nonzeros than informative rows the active columns are
    // dependent. Moving along a null direction of the weighted design leaves
    // the residual unchanged and |beta|_1 non-increasing; stop at the first
    // coordinate that reaches zero and repeat until the columns can be
    // independent.
    Eigen::Index rows_used = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) rows_used += w[i] > 0.0;
    auto reduce = [&](std::vector<Eigen::Index>& act) {
        bool changed = false;
        while (static_cast<Eigen::Index>(act.size()) > rows_used) {
            const auto k = static_cast<Eigen::Index>(act.size());
            Matrix m(x.rows(), k);
            for (Eigen::Index a = 0; a < k; ++a) {
                m.col(a) = w.cwiseSqrt().cwiseProduct(x.col(act[static_cast<std::size_t>(a)]));
            }
            const Matrix kernel = Eigen::FullPivLU<Matrix>(m).kernel();
            if (kernel.cols() == 0 || kernel.col(0).isZero(0)) break;
            Vector d = kernel.col(0);
            double slope = 0.0;
            for (Eigen::Index a = 0; a < k; ++a) {
                slope += (fit.beta[act[static_cast<std::size_t>(a)]] > 0.0 ? 1.0 : -1.0) * d[a];
            }
            if (slope > 0.0) d = -d;
            auto first_crossing = [&](const Vector& dir, Eigen::Index& hit) {
                double t = std::numeric_limits<double>::infinity();
                for (Eigen::Index a = 0; a < k; ++a) {
                    const double b = fit.beta[act[static_cast<std::size_t>(a)]];
                    if (dir[a] != 0.0 && (b > 0.0) != (dir[a] > 0.0) && -b / dir[a] < t) {
                        t = -b / dir[a];
                        hit = a;
                    }
                }
                return t;
            };
            Eigen::Index hit = -1;
            double t = first_crossing(d, hit);
            if (slope == 0.0) {
                Eigen::Index other = -1;
                const double back = first_crossing(-d, other);
                if (back < t) {
                    d = -d;
                    t = back;
                    hit = other;
                }
            }
            if (hit < 0 || !std::isfinite(t)) break;
            for (Eigen::Index a = 0; a < k; ++a) {
                const Eigen::Index j = act[static_cast<std::size_t>(a)];
                const double next = a == hit ? 0.0 : fit.beta[j] + t * d[a];
                const double delta = next - fit.beta[j];
                if (delta != 0.0) {
                    grad.noalias() -= delta * gram_col(j);
                    fit.beta[j] = next;
                }
            }
            act.erase(act.begin() + hit);
            changed = true;
        }
        return changed;
    };

    std::vector<Eigen::Index> active;
    while (fit.iterations < config.max_iters) {
        if (sweep(all) < config.tol) {
            fit.converged = true;
            break;
        }
        // iterate on the current nonzeros until they settle, then re-check all
        std::size_t inner = 0;
        while (fit.iterations < config.max_iters) {
            active.clear();
            for (auto j : all) {
                if (fit.beta[j] != 0.0) active.push_back(j);
            }
            if (sweep(active) < config.tol) break;
            if (++inner % 3 == 0 && polish(active)) break;
            if (inner % 60 == 0 && static_cast<Eigen::Index>(active.size()) > rows_used) reduce(active);
        }
    }

    active.clear();
    for (auto j : all) {
        if (fit.beta[j] != 0.0) active.push_back(j);
    }
    reduce(active);
    fit.active_set = support_of(fit.beta);
    fit.underdetermined = lambda == 0.0 && p > x.rows();
    fit.kkt_residual = kkt_check(fit, x, y, weights, lambda, scale);
    return fit;
}

double kkt_check(const LassoFit& fit, const Matrix& x, const Vector& y,
                 std::span<const double> weights, double lambda, double scale) {
    check_dims(x, y);
    check_scale(scale);
    if (fit.beta.size() != x.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "fit length differs from p");
    }
    const Vector w = weight_vector(weights, x.rows());
    const Vector corr = x.transpose() * w.cwiseProduct(y - x * fit.beta) / scale;
    double residual = 0.0;
    for (Eigen::Index j = 0; j < corr.size(); ++j) {
        const double b = fit.beta[j];
        const double v = b != 0.0 ? std::abs(corr[j] - lambda * (b > 0.0 ? 1.0 : -1.0))
                                   : std::max(std::abs(corr[j]) - lambda, 0.0);
        residual = std::max(residual, v);
    }
    return residual;
}

std::vector<LassoFit> lasso_path(const Matrix& x, const Vector& y,
                                 std::span<const double> weights,
                                 std::span<const double> lambdas, const SolverConfig& config) {
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] < lambdas[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "lambda path must be strictly descending");
        }
    }
    std::vector<LassoFit> fits;
    fits.reserve(lambdas.size());
    std::optional<Vector> warm;
    for (double lambda : lambdas) {
        fits.push_back(fit_weighted_lasso(x, y, weights, lambda, config, warm));
        warm = fits.back().beta;
    }
    return fits;
}

}  // namespace csubag
