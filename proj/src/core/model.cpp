#include "csubag/model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace csubag {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::InvalidSize: return "InvalidSize";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::BadGrouping: return "BadGrouping";
        case ErrorCode::SingularGram: return "SingularGram";
        case ErrorCode::NonSymmetric: return "NonSymmetric";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

IndexSet make_index_set(std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return indices;
}

GroundTruth GroundTruth::from_beta(Vector beta_star, double sigma) {
    GroundTruth truth;
    for (Eigen::Index j = 0; j < beta_star.size(); ++j) {
        if (beta_star[j] != 0.0) truth.support.push_back(static_cast<std::size_t>(j));
    }
    truth.beta_star = std::move(beta_star);
    truth.sigma = sigma;
    return truth;
}

NormalizedColumns normalize_columns(const Matrix& x) {
    NormalizedColumns out{x, Vector(x.cols())};
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (!(norm >= 1e-12)) {
            throw Error(ErrorCode::ZeroVarianceColumn,
                        "column " + std::to_string(j + 1) + " has zero l2 norm");
        }
        out.scales[j] = norm;
        out.x.col(j) /= norm;
    }
    return out;
}

Dataset Dataset::from_raw(Vector y, Matrix x, std::optional<GroundTruth> truth, bool center) {
    if (x.rows() < 1 || x.cols() < 1) {
        throw Error(ErrorCode::InvalidSize, "dataset needs n >= 1 and p >= 1");
    }
    if (y.size() != x.rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "response length " + std::to_string(y.size()) + " differs from row count " +
                        std::to_string(x.rows()));
    }
    if (truth && truth->beta_star.size() != x.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "ground truth length differs from p");
    }
    if (center) {
        y.array() -= y.mean();
        x.rowwise() -= x.colwise().mean();
    }
    auto normalized = normalize_columns(x);
    return Dataset(std::move(y), std::move(normalized.x), std::move(normalized.scales),
                   std::move(truth));
}

Matrix Dataset::rows_x(std::span<const std::size_t> rows) const {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = x_.row(static_cast<Eigen::Index>(rows[r]));
    }
    return out;
}

Vector Dataset::rows_y(std::span<const std::size_t> rows) const {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out[static_cast<Eigen::Index>(r)] = y_[static_cast<Eigen::Index>(rows[r])];
    }
    return out;
}

Vector Dataset::to_original_scale(const Vector& beta) const {
    return beta.cwiseQuotient(scales_);
}

std::int64_t WeightVector::total() const {
    return std::accumulate(values.begin(), values.end(), std::int64_t{0});
}

std::vector<double> WeightVector::as_real() const {
    return {values.begin(), values.end()};
}

Metrics metrics(const IndexSet& selected, const GroundTruth& truth) {
    Metrics out;
    std::vector<std::size_t> common;
    std::set_intersection(selected.begin(), selected.end(), truth.support.begin(),
                          truth.support.end(), std::back_inserter(common));
    out.tp = common.size();
    out.fp = selected.size() - common.size();
    out.fn = truth.support.size() - common.size();
    return out;
}

}  // namespace csubag
