#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "csubag/diagnostics.hpp"
#include "oracles.hpp"

using namespace csubag;

namespace {

Matrix gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Matrix x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = z(rng);
    return x;
}

}  // namespace

TEST_CASE("spectra of simple matrices") {
    const auto id = spectra(Matrix::Identity(5, 5));
    CHECK(id.min_eig == doctest::Approx(1.0));
    CHECK(id.max_eig == doctest::Approx(1.0));
    CHECK(id.condition_number == doctest::Approx(1.0));

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1;
    d(1, 1) = 4;
    const auto s = spectra(d);
    CHECK(s.min_eig == doctest::Approx(1.0));
    CHECK(s.max_eig == doctest::Approx(4.0));
    CHECK(s.condition_number == doctest::Approx(4.0));

    const auto singular = spectra(Matrix::Ones(3, 3));
    CHECK(std::isinf(singular.condition_number));
}

TEST_CASE("spectra agree with Jacobi on random SPD matrices") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix a = gaussian(8, 5, seed);
        const Matrix g = a.transpose() * a;
        std::vector<std::vector<double>> copy(5, std::vector<double>(5));
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) copy[i][j] = g(i, j);
        const auto eig = oracle::jacobi_eigenvalues(copy);
        const auto s = spectra(g);
        CHECK(std::abs(s.min_eig - eig.front()) < 1e-7 * eig.back());
        CHECK(std::abs(s.max_eig - eig.back()) < 1e-7 * eig.back());
    }
}

TEST_CASE("spectra rejects non-symmetric input") {
    Matrix a = Matrix::Identity(3, 3);
    a(0, 2) = 1.0;
    try {
        spectra(a);
        FAIL("expected NonSymmetric");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonSymmetric);
    }
}

TEST_CASE("irrepresentable norm") {
    SUBCASE("orthogonal columns give zero") {
        const Matrix x = Matrix::Identity(4, 4);
        CHECK(ir_norm(x, {0, 1}) == doctest::Approx(0.0));
    }
    SUBCASE("two columns give the absolute correlation") {
        for (double c : {-0.7, 0.3, 0.9}) {
            Matrix x(2, 2);
            x << 1, c, 0, std::sqrt(1 - c * c);
            CHECK(ir_norm(x, {0}) == doctest::Approx(std::abs(c)));
            const std::vector<double> minus{-1.0};
            CHECK(ir_norm(x, {0}, minus) == doctest::Approx(std::abs(c)));
        }
    }
    SUBCASE("invariant under a common column scaling") {
        const Matrix x = gaussian(30, 6, 3);
        const IndexSet s{1, 4};
        CHECK(ir_norm(3.0 * x, s) == doctest::Approx(ir_norm(x, s)).epsilon(1e-10));
        // scaling the support columns alone divides the norm by the factor
        Matrix rescaled = x;
        rescaled.col(1) *= 3.0;
        rescaled.col(4) *= 3.0;
        CHECK(ir_norm(rescaled, s) == doctest::Approx(ir_norm(x, s) / 3.0).epsilon(1e-10));
    }
    SUBCASE("collinear support") {
        Matrix x(3, 3);
        x << 1, 2, 0, 1, 2, 1, 0, 0, 1;
        try {
            ir_norm(x, {0, 1});
            FAIL("expected SingularGram");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SingularGram);
        }
    }
}

TEST_CASE("restricted eigenvalue proxy") {
    const Matrix x = gaussian(40, 10, 9);
    const std::vector<double> w(40, 1.0);
    const double few = re_proxy(x, {0, 1, 2}, w, 50, 1);
    const double many = re_proxy(x, {0, 1, 2}, w, 2000, 1);
    CHECK(few > 0.0);
    CHECK(many <= few);

    Matrix rank_deficient = x;
    rank_deficient.col(1) = rank_deficient.col(0);
    rank_deficient.col(2) = -rank_deficient.col(0);
    Matrix thin = rank_deficient.leftCols(3);
    const double degenerate = re_proxy(thin, {0, 1, 2}, std::vector<double>(40, 1.0), 5000, 2);
    CHECK(degenerate < 0.05 * re_proxy(x.leftCols(3), {0, 1, 2}, w, 5000, 2));
}

TEST_CASE("gram condition helpers") {
    const Matrix q = Matrix::Identity(5, 5);
    CHECK(gram_condition(q, {0, 2, 4}) == doctest::Approx(1.0));
    CHECK(gram_inverse_min_eig(q, {1}) == doctest::Approx(1.0));
    Matrix x(3, 2);
    x << 1, 1, 1, 1, 0, 0;
    CHECK(gram_condition(x, {0, 1}) == 1e6);
    CHECK(gram_inverse_min_eig(x, {0, 1}, 50.0) == 50.0);
    CHECK(select_columns(q, {3}).col(0) == q.col(3));
}
