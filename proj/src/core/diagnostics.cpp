#include "csubag/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "csubag/rng.hpp"

namespace csubag {

namespace {

struct PowerResult {
    double value = 0.0;
    bool zero = false;
};

// Dominant eigenvalue of a symmetric matrix whose spectrum is nonnegative.
PowerResult power_iteration(const Matrix& a, double tol) {
    const Eigen::Index n = a.rows();
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i + 1));
    v.normalize();
    const double norm_a = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    double rho = 0.0;
    int steady = 0;
    for (int it = 0; it < 100000; ++it) {
        const Vector av = a * v;
        const double len = av.norm();
        if (len == 0.0) return {0.0, true};
        const double next = v.dot(av);
        if ((av - next * v).norm() <= tol * norm_a) return {next, false};
        // the Rayleigh quotient converges quadratically faster than the vector
        steady = std::abs(next - rho) <= 1e-15 * norm_a ? steady + 1 : 0;
        rho = next;
        if (steady >= 20) break;
        v = av / len;
    }
    return {rho, false};
}

}  // namespace

Spectrum spectra(const Matrix& gram, double tol) {
    if (gram.rows() != gram.cols() || gram.rows() == 0) {
        throw Error(ErrorCode::NonSymmetric, "spectra needs a nonempty square matrix");
    }
    const double scale = std::max(gram.cwiseAbs().maxCoeff(), 1.0);
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw Error(ErrorCode::NonSymmetric, "matrix is not symmetric");
    }
    // shift so the spectrum is nonnegative: lambda + bound >= 0 (Gershgorin)
    const double bound = gram.cwiseAbs().rowwise().sum().maxCoeff();
    const Matrix eye = Matrix::Identity(gram.rows(), gram.cols());
    const auto top = power_iteration(gram + bound * eye, tol);
    const double max_eig = top.value - bound;
    const auto bottom = power_iteration(max_eig * eye - gram, tol);
    const double min_eig = bottom.zero ? max_eig : max_eig - bottom.value;

    Spectrum out{min_eig, max_eig, std::numeric_limits<double>::infinity()};
    if (min_eig > 0.0) out.condition_number = max_eig / min_eig;
    return out;
}

Matrix select_columns(const Matrix& x, const IndexSet& columns) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] >= static_cast<std::size_t>(x.cols())) {
            throw Error(ErrorCode::IndexOutOfRange, "column index out of range");
        }
        out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(columns[k]));
    }
    return out;
}

double ir_norm(const Matrix& x, const IndexSet& support, std::span<const double> signs) {
    if (support.empty()) return 0.0;
    if (!signs.empty() && signs.size() != support.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one sign per support index expected");
    }
    const Matrix xs = select_columns(x, support);
    IndexSet rest;
    for (std::size_t j = 0, k = 0; j < static_cast<std::size_t>(x.cols()); ++j) {
        if (k < support.size() && support[k] == j) {
            ++k;
        } else {
            rest.push_back(j);
        }
    }
    if (rest.empty()) return 0.0;
    const Matrix gram = xs.transpose() * xs;
    Eigen::FullPivLU<Matrix> lu(gram);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularGram, "X_S'X_S is singular");
    Vector sign = Vector::Ones(static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < signs.size(); ++k) {
        sign[static_cast<Eigen::Index>(k)] = signs[k] >= 0.0 ? 1.0 : -1.0;
    }
    const Vector direction = xs * lu.solve(sign);
    const Matrix xr = select_columns(x, rest);
    return (xr.transpose() * direction).cwiseAbs().maxCoeff();
}

double re_proxy(const Matrix& x_sub, const IndexSet& support, std::span<const double> weights,
                std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "re_proxy needs trials >= 1");
    if (support.empty()) throw Error(ErrorCode::InvalidArgument, "re_proxy needs a nonempty support");
    const Eigen::Index rows = x_sub.rows();
    const auto p = static_cast<std::size_t>(x_sub.cols());
    Vector w2 = Vector::Ones(rows);
    if (!weights.empty()) {
        if (static_cast<Eigen::Index>(weights.size()) != rows) {
            throw Error(ErrorCode::DimensionMismatch, "one weight per row expected");
        }
        for (Eigen::Index l = 0; l < rows; ++l) {
            w2[l] = weights[static_cast<std::size_t>(l)] * weights[static_cast<std::size_t>(l)];
        }
    }
    std::vector<char> in_support(p, 0);
    for (auto j : support) {
        if (j >= p) throw Error(ErrorCode::IndexOutOfRange, "support index out of range");
        in_support[j] = 1;
    }
    std::vector<std::size_t> rest;
    for (std::size_t j = 0; j < p; ++j) {
        if (!in_support[j]) rest.push_back(j);
    }

    Rng rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    std::exponential_distribution<double> expo;
    const double root_n = std::sqrt(static_cast<double>(rows));
    double best = std::numeric_limits<double>::infinity();
    Vector v(static_cast<Eigen::Index>(p));
    for (std::size_t t = 0; t < trials; ++t) {
        v.setZero();
        double l2 = 0.0;
        for (auto j : support) {
            const double z = normal(rng);
            v[static_cast<Eigen::Index>(j)] = z;
            l2 += z * z;
        }
        l2 = std::sqrt(l2);
        if (l2 == 0.0) continue;
        double l1 = 0.0;
        for (auto j : support) {
            v[static_cast<Eigen::Index>(j)] /= l2;
            l1 += std::abs(v[static_cast<Eigen::Index>(j)]);
        }
        if (!rest.empty()) {
            const double budget = 3.0 * l1 * unit(rng);
            std::uniform_int_distribution<std::size_t> count_draw(1, rest.size());
            const std::size_t count = count_draw(rng);
            std::vector<std::size_t> chosen = rest;
            std::shuffle(chosen.begin(), chosen.end(), rng);
            chosen.resize(count);
            std::vector<double> share(count);
            double total = 0.0;
            for (auto& s : share) total += (s = expo(rng));
            for (std::size_t c = 0; c < count; ++c) {
                const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
                v[static_cast<Eigen::Index>(chosen[c])] = sign * budget * share[c] / total;
            }
        }
        const Vector fitted = x_sub * v;
        best = std::min(best, w2.dot(fitted.cwiseAbs2()) / root_n);
    }
    return best;
}

double gram_condition(const Matrix& x, const IndexSet& columns, double cap) {
    if (columns.empty()) return 1.0;
    const Matrix xa = select_columns(x, columns);
    const auto s = spectra(xa.transpose() * xa);
    if (!(s.min_eig > 0.0) || s.condition_number > cap) return cap;
    return s.condition_number;
}

double gram_inverse_min_eig(const Matrix& x, const IndexSet& columns, double cap) {
    if (columns.empty()) return 0.0;
    const Matrix xa = select_columns(x, columns);
    const auto s = spectra(xa.transpose() * xa);
    if (!(s.min_eig > 0.0) || 1.0 / s.min_eig > cap) return cap;
    return 1.0 / s.min_eig;
}

}  // namespace csubag
