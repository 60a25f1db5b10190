#include <doctest.h>

#include <Eigen/QR>
#include <random>

#include "csubag/lasso.hpp"
#include "oracles.hpp"

using namespace csubag;

namespace {

struct Instance {
    Matrix x;
    Vector y;
    std::vector<double> w;
};

Instance random_instance(std::size_t n, std::size_t p, std::uint64_t seed, bool weighted = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.5, 2.0);
    Instance inst{Matrix(n, p), Vector(n), std::vector<double>(n, 1.0)};
    for (Eigen::Index i = 0; i < inst.x.rows(); ++i)
        for (Eigen::Index j = 0; j < inst.x.cols(); ++j) inst.x(i, j) = z(rng);
    Vector beta = Vector::Zero(p);
    for (std::size_t j = 0; j < std::min<std::size_t>(3, p); ++j) beta[j] = 1.0 + j;
    inst.y = inst.x * beta;
    for (Eigen::Index i = 0; i < inst.y.size(); ++i) inst.y[i] += z(rng);
    if (weighted)
        for (auto& v : inst.w) v = u(rng);
    return inst;
}

oracle::Mat to_oracle(const Matrix& x) {
    oracle::Mat m(x.rows(), oracle::Vec(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) m[i][j] = x(i, j);
    return m;
}

oracle::Vec to_oracle(const Vector& v) { return oracle::Vec(v.data(), v.data() + v.size()); }
oracle::Vec to_oracle(const std::vector<double>& v) { return oracle::Vec(v.begin(), v.end()); }

}  // namespace

TEST_CASE("soft_threshold") {
    CHECK(soft_threshold(3, 1) == 2);
    CHECK(soft_threshold(0.5, 1) == 0);
    CHECK(soft_threshold(-3, 1) == -2);
}

TEST_CASE("lambda_max on a single unit column") {
    Matrix x(2, 1);
    x << 1, 0;
    Vector y(2);
    y << 0.8, 0.3;
    CHECK(lambda_max(x, y, {}, 2.0) == doctest::Approx(0.4));
    CHECK(lambda_max(x, Vector::Zero(2), {}, 2.0) == 0.0);
}

TEST_CASE("lambda_max is the zero/nonzero boundary of the solver") {
    const auto inst = random_instance(20, 5, 11);
    SolverConfig cfg;
    cfg.objective_scale = 20;
    const double lmax = lambda_max(inst.x, inst.y, inst.w, 20);
    // bisect on the solver alone
    double lo = 0.0, hi = 10.0 * lmax;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto fit = fit_weighted_lasso(inst.x, inst.y, inst.w, mid, cfg);
        (fit.active_set.empty() ? hi : lo) = mid;
    }
    CHECK(hi == doctest::Approx(lmax).epsilon(1e-9));
}

TEST_CASE("fit at or above lambda_max is zero") {
    const auto inst = random_instance(30, 6, 3);
    SolverConfig cfg;
    cfg.objective_scale = 30;
    const double lmax = lambda_max(inst.x, inst.y, inst.w, 30);
    const auto fit = fit_weighted_lasso(inst.x, inst.y, inst.w, lmax, cfg);
    CHECK(fit.active_set.empty());
    CHECK(fit.converged);
    CHECK(fit.kkt_residual == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("orthonormal design matches the soft-threshold closed form") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(1.0, 4.0);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::Index n = 12, p = 1 + rep % 10;
        const double scale = 7.0;
        Matrix a(n, p);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < p; ++j) a(i, j) = z(rng);
        const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(n, p);
        std::vector<double> w(n);
        Matrix x(n, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            w[i] = u(rng);
            x.row(i) = q.row(i) * std::sqrt(scale / w[i]);
        }
        Vector y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = z(rng);
        const Vector wv = Eigen::Map<const Vector>(w.data(), n);
        const Vector corr = x.transpose() * wv.cwiseProduct(y) / scale;
        const double lambda = 0.5 * corr.cwiseAbs().maxCoeff();
        SolverConfig cfg;
        cfg.objective_scale = scale;
        const auto fit = fit_weighted_lasso(x, y, w, lambda, cfg);
        for (Eigen::Index j = 0; j < p; ++j) {
            CHECK(std::abs(fit.beta[j] - soft_threshold(corr[j], lambda)) < 1e-10);
        }
    }
}

TEST_CASE("solver agrees with the projected-gradient oracle") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lam(0.01, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const auto inst = random_instance(50, 8, 100 + rep);
        const double lambda = lam(rng);
        SolverConfig cfg;
        cfg.objective_scale = 50;
        const auto fit = fit_weighted_lasso(inst.x, inst.y, inst.w, lambda, cfg);
        const auto ox = to_oracle(inst.x);
        const auto oy = to_oracle(inst.y);
        const auto ow = to_oracle(inst.w);
        const auto ref = oracle::lasso_projected_gradient(ox, oy, ow, 50, lambda);
        const double f_ref = static_cast<double>(oracle::objective(ox, oy, ow, 50, lambda, ref));
        const double f_fit = static_cast<double>(oracle::objective(ox, oy, ow, 50, lambda, to_oracle(fit.beta)));
        CHECK(std::abs(f_fit - f_ref) <= 1e-8);
        CHECK(fit.kkt_residual <= 1e-6);
        CHECK(fit.converged);
    }
}

TEST_CASE("kkt_check detects a perturbed solution") {
    const auto inst = random_instance(40, 6, 9);
    SolverConfig cfg;
    cfg.objective_scale = 40;
    const double lambda = 0.2 * lambda_max(inst.x, inst.y, inst.w, 40);
    auto fit = fit_weighted_lasso(inst.x, inst.y, inst.w, lambda, cfg);
    REQUIRE(!fit.active_set.empty());
    CHECK(kkt_check(fit, inst.x, inst.y, inst.w, lambda, 40) <= 1e-6);
    fit.beta[static_cast<Eigen::Index>(fit.active_set.front())] += 0.1;
    CHECK(kkt_check(fit, inst.x, inst.y, inst.w, lambda, 40) > 1e-3);
}

TEST_CASE("objective is non-increasing across sweeps") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto inst = random_instance(15, 40, seed);
        SolverConfig cfg;
        cfg.objective_scale = 15;
        cfg.track_objective = true;
        const double lambda = 0.05 * lambda_max(inst.x, inst.y, inst.w, 15);
        const auto fit = fit_weighted_lasso(inst.x, inst.y, inst.w, lambda, cfg);
        CHECK(fit.converged);
        const auto& h = fit.objective_history;
        REQUIRE(h.size() >= 1);
        for (std::size_t t = 1; t < h.size(); ++t) CHECK(h[t] <= h[t - 1] * (1 + 1e-13) + 1e-15);
    }
}

TEST_CASE("sweep order does not change a well-posed solution") {
    const auto inst = random_instance(60, 10, 21);
    SolverConfig fwd, rev;
    fwd.objective_scale = rev.objective_scale = 60;
    rev.order = SweepOrder::Reverse;
    const double lambda = 0.1 * lambda_max(inst.x, inst.y, inst.w, 60);
    const auto a = fit_weighted_lasso(inst.x, inst.y, inst.w, lambda, fwd);
    const auto b = fit_weighted_lasso(inst.x, inst.y, inst.w, lambda, rev);
    CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("joint rescaling of weights and scale leaves the fit unchanged") {
    const auto inst = random_instance(30, 12, 8);
    const double c = 8.0;
    std::vector<double> w2 = inst.w;
    for (auto& v : w2) v /= c;
    SolverConfig a, b;
    a.objective_scale = 30;
    b.objective_scale = 30 / c;
    const double lambda = 0.1 * lambda_max(inst.x, inst.y, inst.w, 30);
    const auto fa = fit_weighted_lasso(inst.x, inst.y, inst.w, lambda, a);
    const auto fb = fit_weighted_lasso(inst.x, inst.y, w2, lambda, b);
    CHECK((fa.beta - fb.beta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("near-interpolating weighted fits converge") {
    // N rows, p >> N, small lambda: the regime of the sub-Lasso fits
    const auto inst = random_instance(40, 300, 77);
    SolverConfig cfg;
    cfg.objective_scale = 4000;
    const double lambda = 1e-3 * lambda_max(inst.x, inst.y, inst.w, 4000);
    const auto fit = fit_weighted_lasso(inst.x, inst.y, inst.w, lambda, cfg);
    CHECK(fit.converged);
    CHECK(fit.kkt_residual <= 1e-6 * lambda_max(inst.x, inst.y, inst.w, 4000));
    CHECK(fit.active_set.size() <= 40);
}

TEST_CASE("lambda = 0 with p > N is flagged underdetermined") {
    const auto inst = random_instance(5, 10, 4, false);
    SolverConfig cfg;
    cfg.objective_scale = 5;
    cfg.max_iters = 200;
    const auto fit = fit_weighted_lasso(inst.x, inst.y, {}, 0.0, cfg);
    CHECK(fit.underdetermined);
}

TEST_CASE("invalid inputs throw") {
    const auto inst = random_instance(5, 3, 4);
    SolverConfig cfg;
    CHECK_THROWS_AS(fit_weighted_lasso(inst.x, inst.y, inst.w, -1.0, cfg), Error);
    CHECK_THROWS_AS(fit_weighted_lasso(inst.x, Vector::Ones(4), inst.w, 1.0, cfg), Error);
    std::vector<double> short_w(3, 1.0);
    CHECK_THROWS_AS(fit_weighted_lasso(inst.x, inst.y, short_w, 1.0, cfg), Error);
    cfg.objective_scale = 0.0;
    CHECK_THROWS_AS(fit_weighted_lasso(inst.x, inst.y, inst.w, 1.0, cfg), Error);
}

TEST_CASE("lasso_path") {
    const auto inst = random_instance(50, 8, 31);
    SolverConfig cfg;
    cfg.objective_scale = 50;
    const double lmax = lambda_max(inst.x, inst.y, inst.w, 50);

    SUBCASE("single lambda equals a direct fit") {
        const std::vector<double> one{0.3 * lmax};
        const auto path = lasso_path(inst.x, inst.y, inst.w, one, cfg);
        const auto direct = fit_weighted_lasso(inst.x, inst.y, inst.w, one[0], cfg);
        CHECK((path[0].beta - direct.beta).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("path from lambda_max starts at zero and matches cold starts") {
        std::vector<double> grid;
        for (int k = 0; k < 10; ++k) grid.push_back(lmax * std::pow(0.6, k));
        const auto path = lasso_path(inst.x, inst.y, inst.w, grid, cfg);
        CHECK(path.front().active_set.empty());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto cold = fit_weighted_lasso(inst.x, inst.y, inst.w, grid[k], cfg);
            CHECK((path[k].beta - cold.beta).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    SUBCASE("non-descending grid is rejected") {
        const std::vector<double> bad{0.1, 0.2};
        CHECK_THROWS_AS(lasso_path(inst.x, inst.y, inst.w, bad, cfg), Error);
    }
}

TEST_CASE("support_of") {
    Vector b(3);
    b << 1, 0, 2;
    CHECK(support_of(b) == IndexSet{0, 2});
    CHECK(support_of(Vector::Zero(3)).empty());
}
