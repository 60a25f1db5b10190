#include <doctest.h>

#include "csubag/model.hpp"

using namespace csubag;

TEST_CASE("normalize_columns scales a 3-4-5 column") {
    Matrix x(3, 1);
    x << 3, 4, 0;
    const auto out = normalize_columns(x);
    CHECK(out.x(0, 0) == doctest::Approx(0.6));
    CHECK(out.x(1, 0) == doctest::Approx(0.8));
    CHECK(out.x(2, 0) == 0.0);
    CHECK(out.scales[0] == doctest::Approx(5.0));
}

TEST_CASE("normalize_columns leaves identity columns unchanged") {
    const Matrix x = Matrix::Identity(4, 4);
    const auto out = normalize_columns(x);
    CHECK((out.x - x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.scales.array() == 1.0).all());
}

TEST_CASE("normalize_columns rejects an all-zero column") {
    Matrix x = Matrix::Ones(3, 2);
    x.col(1).setZero();
    try {
        normalize_columns(x);
        FAIL("expected ZeroVarianceColumn");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVarianceColumn);
    }
}

TEST_CASE("Dataset columns have unit norm and map back to the raw scale") {
    Matrix x(4, 2);
    x << 1, 2, 3, -1, 0, 5, 2, 2;
    Vector y(4);
    y << 1, 2, 3, 4;
    const auto d = Dataset::from_raw(y, x);
    for (Eigen::Index j = 0; j < 2; ++j) CHECK(d.x().col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
    Vector beta(2);
    beta << 1.0, -2.0;
    const Vector raw = d.to_original_scale(beta);
    // X_norm beta == X_raw raw
    CHECK((d.x() * beta - x * raw).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Dataset centering removes column and response means") {
    Matrix x(3, 1);
    x << 1, 2, 6;
    Vector y(3);
    y << 1, 1, 4;
    const auto d = Dataset::from_raw(y, x, std::nullopt, true);
    CHECK(std::abs(d.y().sum()) < 1e-12);
    CHECK(std::abs(d.x().col(0).sum()) < 1e-12);
}

TEST_CASE("Dataset rejects mismatched lengths") {
    CHECK_THROWS_AS(Dataset::from_raw(Vector::Ones(3), Matrix::Ones(4, 2)), Error);
}

TEST_CASE("rows_x and rows_y pick rows in order") {
    Matrix x(3, 2);
    x << 1, 0, 0, 1, 1, 1;
    Vector y(3);
    y << 10, 20, 30;
    const auto d = Dataset::from_raw(y, x);
    const std::vector<std::size_t> rows{2, 0};
    const Matrix sub = d.rows_x(rows);
    CHECK(sub.rows() == 2);
    CHECK(sub.row(0) == d.x().row(2));
    CHECK(d.rows_y(rows)[1] == 10.0);
}

TEST_CASE("GroundTruth support equals the nonzero pattern") {
    Vector b(5);
    b << 0, 1.5, 0, -2, 0;
    const auto t = GroundTruth::from_beta(b, 1.0);
    CHECK(t.support == IndexSet{1, 3});
}

TEST_CASE("metrics counts true and false positives") {
    Vector b = Vector::Zero(4);
    b[0] = b[1] = 1.0;
    const auto truth = GroundTruth::from_beta(b, 1.0);

    auto m = metrics({1, 2}, truth);
    CHECK(m.tp == 1);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);

    m = metrics({0, 1}, truth);
    CHECK(m.tp == 2);
    CHECK(m.fp == 0);
    CHECK(m.fn == 0);
}

TEST_CASE("empty selection misses the whole support") {
    Vector b = Vector::Zero(40);
    b.head(30).setOnes();
    const auto m = metrics({}, GroundTruth::from_beta(b, 1.0));
    CHECK(m.fn == 30);
    CHECK(m.tp == 0);
}

TEST_CASE("make_index_set sorts and deduplicates") {
    CHECK(make_index_set({5, 1, 5, 3}) == IndexSet{1, 3, 5});
}

TEST_CASE("WeightVector totals") {
    WeightVector w;
    w.values = {1, 4, 5};
    CHECK(w.total() == 10);
    CHECK(w.as_real() == std::vector<double>{1.0, 4.0, 5.0});
}
