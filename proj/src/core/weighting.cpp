#include "csubag/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace csubag {

WeightVector draw_multinomial_weights(std::int64_t n, std::size_t subsample_size, Rng& rng) {
    const auto N = static_cast<std::int64_t>(subsample_size);
    if (N < 1 || N > n) {
        throw Error(ErrorCode::InvalidSize, "subsample size " + std::to_string(N) +
                                                " must lie in [1, " + std::to_string(n) + "]");
    }
    WeightVector out;
    out.values.assign(subsample_size, 1);
    std::int64_t remaining = n - N;
    // conditional binomials: cell c receives Bin(remaining, 1/(cells left))
    for (std::size_t c = 0; c + 1 < subsample_size && remaining > 0; ++c) {
        const double prob = 1.0 / static_cast<double>(subsample_size - c);
        std::binomial_distribution<std::int64_t> draw(remaining, prob);
        const std::int64_t k = draw(rng);
        out.values[c] += k;
        remaining -= k;
    }
    out.values.back() += remaining;
    return out;
}

std::vector<WeightVector> multinomial_weights(std::int64_t n, std::size_t subsample_size,
                                              std::size_t count, std::uint64_t seed) {
    std::vector<WeightVector> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Rng rng = make_rng(seed, {k});
        out.push_back(draw_multinomial_weights(n, subsample_size, rng));
        out.back().replicate_id = k;
    }
    return out;
}

namespace {

Matrix weighted_gram(const Matrix& x, const Vector& u) {
    return x.transpose() * u.asDiagonal() * x;
}

}  // namespace

double min_eigen_weighted_gram(const Matrix& x_sub, const std::vector<double>& w) {
    const Vector u = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(weighted_gram(x_sub, u), Eigen::EigenvaluesOnly);
    return std::max(eig.eigenvalues()[0], 0.0);
}

OptimalWeights optimal_weights(const Matrix& x_sub, double n, std::size_t iters, double tol) {
    const Eigen::Index N = x_sub.rows();
    const Eigen::Index p = x_sub.cols();
    if (N < 1) throw Error(ErrorCode::InvalidSize, "optimal_weights needs at least one row");

    // work on the probability simplex; the objective scales linearly with n
    Vector u = Vector::Constant(N, 1.0 / static_cast<double>(N));
    auto evaluate = [&](const Vector& v) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(weighted_gram(x_sub, v));
        return eig;
    };

    OptimalWeights out;
    auto finish = [&](double objective) {
        out.weights.resize(static_cast<std::size_t>(N));
        for (Eigen::Index l = 0; l < N; ++l) out.weights[static_cast<std::size_t>(l)] = u[l] * n;
        out.objective = objective;
        return out;
    };

    auto eig = evaluate(u);
    double current = std::max(eig.eigenvalues()[0], 0.0);
    out.history.push_back(current * n);
    // fewer rows than columns: the Gram is singular for every feasible w
    if (N < p) return finish(0.0);

    std::size_t stalled = 0;
    for (std::size_t t = 1; t <= iters; ++t) {
        const Vector& lam = eig.eigenvalues();
        const double spread = std::max(lam[p - 1] - lam[0], 1e-300);
        const double mu = std::max(0.05 * spread / std::sqrt(static_cast<double>(t)), 1e-15);
        Vector soft = (-(lam.array() - lam[0]) / mu).exp().matrix();
        soft /= soft.sum();
        // gradient of the soft-min of the eigenvalues: sum_i soft_i (x_l' v_i)^2
        const Matrix proj = x_sub * eig.eigenvectors();
        const Vector grad = proj.cwiseAbs2() * soft;
        const double gmax = grad.maxCoeff();
        if (!(gmax > 0.0)) break;

        double step = 1.0 / std::sqrt(static_cast<double>(t));
        bool accepted = false;
        for (int halving = 0; halving < 30 && !accepted; ++halving, step *= 0.5) {
            Vector next = u.array() * (step * grad.array() / gmax).exp();
            next /= next.sum();
            auto next_eig = evaluate(next);
            const double value = std::max(next_eig.eigenvalues()[0], 0.0);
            if (value >= current) {
                const double gain = value - current;
                u = std::move(next);
                eig = std::move(next_eig);
                current = value;
                out.history.push_back(current * n);
                accepted = true;
                stalled = gain * n <= tol * std::max(1.0, current * n) ? stalled + 1 : 0;
            }
        }
        if (!accepted) ++stalled;
        if (stalled >= 25) break;
    }
    return finish(current * n);
}

WeightVector round_weights(const std::vector<double>& w, std::int64_t n) {
    const auto N = static_cast<std::int64_t>(w.size());
    if (N < 1 || n < N) {
        throw Error(ErrorCode::Infeasible, "cannot give each of " + std::to_string(N) +
                                               " entries at least 1 from a total of " +
                                               std::to_string(n));
    }
    WeightVector out;
    out.values.resize(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        out.values[j] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(w[j])));
    }
    std::int64_t diff = n - out.total();
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto remainder = [&](std::size_t j) { return w[j] - static_cast<double>(out.values[j]); };
    if (diff > 0) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return remainder(a) > remainder(b); });
        for (std::size_t i = 0; diff > 0; i = (i + 1) % order.size(), --diff) {
            ++out.values[order[i]];
        }
    }
    while (diff < 0) {
        // take from the entry whose decrement moves it least away from w
        std::size_t best = w.size();
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (out.values[j] <= 1) continue;
            if (best == w.size() || remainder(j) < remainder(best)) best = j;
        }
        --out.values[best];
        ++diff;
    }
    return out;
}

}  // namespace csubag
