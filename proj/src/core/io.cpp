#include "csubag/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

namespace csubag {

namespace {

using nlohmann::json;

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw Error(ErrorCode::Parse, "bad number '" + s + "' in " + what);
    return v;
}

std::size_t to_size(const std::string& s, const std::string& what) {
    std::size_t v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw Error(ErrorCode::Parse, "bad integer '" + s + "' in " + what);
    return v;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

json one_based(const IndexSet& s) {
    json arr = json::array();
    for (auto j : s) arr.push_back(j + 1);
    return arr;
}

/// Flattens an ini tree to key -> value, dropping section names.
std::vector<std::pair<std::string, std::string>> ini_entries(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            out.emplace_back(key, trim(node.data()));
        } else {
            for (const auto& [sub, leaf] : node) out.emplace_back(sub, trim(leaf.data()));
        }
    }
    return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

RawData read_raw_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Parse, path + " is empty");
    const auto header = split(line, ',');
    if (header.size() < 2 || header[0] != "y") {
        throw Error(ErrorCode::Parse, path + ": header must be y,x1,...,xp");
    }
    const std::size_t p = header.size() - 1;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != p + 1) {
            throw Error(ErrorCode::DimensionMismatch, path + ": row " + std::to_string(rows + 1) +
                                                          " has " + std::to_string(cells.size()) +
                                                          " fields, expected " + std::to_string(p + 1));
        }
        for (const auto& c : cells) values.push_back(to_double(c, path));
        ++rows;
    }
    if (rows == 0) throw Error(ErrorCode::Parse, path + " has no data rows");
    RawData raw;
    raw.y.resize(static_cast<Eigen::Index>(rows));
    raw.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = values.data() + i * (p + 1);
        raw.y[static_cast<Eigen::Index>(i)] = row[0];
        for (std::size_t j = 0; j < p; ++j) {
            raw.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j + 1];
        }
    }
    return raw;
}

Dataset read_dataset_csv(const std::string& path, std::optional<GroundTruth> truth) {
    RawData raw = read_raw_csv(path);
    if (truth && static_cast<std::size_t>(truth->beta_star.size()) !=
                     static_cast<std::size_t>(raw.x.cols())) {
        throw Error(ErrorCode::DimensionMismatch, "truth length differs from p");
    }
    return Dataset::from_raw(std::move(raw.y), std::move(raw.x), std::move(truth));
}

void write_dataset_csv(const std::string& path, const Vector& y, const Matrix& x) {
    if (y.size() != x.rows()) throw Error(ErrorCode::DimensionMismatch, "y and x row counts differ");
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out.precision(17);
    out << 'y';
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << ",x" << j + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out << y[i];
        for (Eigen::Index j = 0; j < x.cols(); ++j) out << ',' << x(i, j);
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::string truth_to_json(const GroundTruth& truth) {
    json j;
    j["beta_star"] = to_std(truth.beta_star);
    j["support"] = one_based(truth.support);
    j["sigma"] = truth.sigma;
    return j.dump(2);
}

GroundTruth truth_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        const auto beta = j.at("beta_star").get<std::vector<double>>();
        Vector b = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
        auto truth = GroundTruth::from_beta(std::move(b), j.value("sigma", 1.0));
        if (j.contains("support")) {
            IndexSet listed;
            for (const auto& v : j.at("support")) {
                const auto k = v.get<long long>();
                if (k < 1) throw Error(ErrorCode::Parse, "support indices are 1-based");
                listed.push_back(static_cast<std::size_t>(k - 1));
            }
            if (make_index_set(std::move(listed)) != truth.support) {
                throw Error(ErrorCode::Parse, "support disagrees with the nonzeros of beta_star");
            }
        }
        return truth;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
}

std::string selection_to_json(const SelectionResult& result) {
    json j;
    j["lambda"] = result.lambda_used;
    j["tau"] = result.tau;
    j["pi"] = to_std(result.pi);
    j["selected"] = one_based(result.selected);
    j["beta"] = to_std(result.beta_agg);
    return j.dump(2);
}

void write_selection_csv(const std::string& path, const SelectionResult& result) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out.precision(17);
    out << "j,pi_j,selected,beta_j\n";
    for (Eigen::Index j = 0; j < result.pi.size(); ++j) {
        const bool sel = std::binary_search(result.selected.begin(), result.selected.end(),
                                            static_cast<std::size_t>(j));
        const double beta = j < result.beta_agg.size() ? result.beta_agg[j] : 0.0;
        out << j + 1 << ',' << result.pi[j] << ',' << (sel ? 1 : 0) << ',' << beta << '\n';
    }
}

std::string lasso_to_json(const LassoFit& fit) {
    json j;
    j["lambda"] = fit.lambda;
    j["beta"] = to_std(fit.beta);
    j["support"] = one_based(fit.active_set);
    j["iterations"] = fit.iterations;
    j["kkt_residual"] = fit.kkt_residual;
    j["converged"] = fit.converged;
    return j.dump(2);
}

std::string subagging_to_json(const SubaggingResult& result, const PartitionPlan& plan) {
    json j;
    j["lambda1"] = result.lambda;
    j["N"] = plan.subsample_size;
    j["d"] = plan.d();
    j["beta"] = to_std(result.beta_avg);
    j["support"] = one_based(result.support);
    j["union_support"] = one_based(result.union_support);
    j["unconverged_fits"] = result.unconverged_fits;
    return j.dump(2);
}

RunConfig parse_run_config(const std::string& text, RunConfig c) {
    for (const auto& [key, v] : ini_entries(text)) {
        if (key == "subsample_size" || key == "N") c.subsample_size = to_size(v, key);
        else if (key == "b") c.b = to_size(v, key);
        else if (key == "m") c.m = to_size(v, key);
        else if (key == "K") c.K = to_size(v, key);
        else if (key == "B") c.B = to_size(v, key);
        else if (key == "tau") c.tau = to_double(v, key);
        else if (key == "lambda_mode") c.lambda_mode = parse_lambda_mode(v);
        else if (key == "lambda") c.lambda = to_double(v, key);
        else if (key == "lambda_grid") {
            c.lambda_grid.clear();
            for (const auto& item : split(v, ',')) {
                if (!item.empty()) c.lambda_grid.push_back(to_double(item, key));
            }
        }
        else if (key == "calibration_size") c.calibration_size = to_size(v, key);
        else if (key == "seed") c.seed = to_size(v, key);
        else if (key == "weights") c.weights = parse_weight_scheme(v);
        else if (key == "optimal_iters") c.optimal_iters = to_size(v, key);
        else if (key == "max_pairs") c.max_pairs = to_size(v, key);
        else if (key == "adaptive_iters") c.adaptive_iters = to_size(v, key);
        else if (key == "nominal_n") c.nominal_n = to_double(v, key);
        else if (key == "threads") c.threads = to_size(v, key);
        else if (key == "solver_tol") c.solver_tol = to_double(v, key);
        else if (key == "solver_max_iters") c.solver_max_iters = to_size(v, key);
        else throw Error(ErrorCode::Parse, "unknown config key '" + key + "'");
    }
    return c;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    return parse_run_config(read_text_file(path), std::move(base));
}

Scenario parse_scenario(const std::string& text, Scenario s) {
    for (const auto& [key, v] : ini_entries(text)) {
        if (key == "n") s.n = to_size(v, key);
        else if (key == "p") s.p = to_size(v, key);
        else if (key == "rho") s.rho = to_double(v, key);
        else if (key == "signal") s.signal = to_double(v, key);
        else if (key == "s") s.s = to_size(v, key);
        else if (key == "sigma") s.sigma = to_double(v, key);
        else if (key == "replications") s.replications = to_size(v, key);
        else if (key == "seed") s.seed = to_size(v, key);
        else throw Error(ErrorCode::Parse, "unknown scenario key '" + key + "'");
    }
    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path, Scenario base) {
    return parse_scenario(read_text_file(path), base);
}

IndexSet parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& item : split(text, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            const auto j = to_size(item, "index list");
            if (j == 0) throw Error(ErrorCode::Parse, "indices are 1-based");
            out.push_back(j - 1);
        } else {
            const auto lo = to_size(trim(item.substr(0, dash)), "index list");
            const auto hi = to_size(trim(item.substr(dash + 1)), "index list");
            if (lo == 0 || hi < lo) throw Error(ErrorCode::Parse, "bad index range '" + item + "'");
            for (auto j = lo; j <= hi; ++j) out.push_back(j - 1);
        }
    }
    return make_index_set(std::move(out));
}

std::pair<std::size_t, std::size_t> parse_row_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) throw Error(ErrorCode::Parse, "row range must look like i..j");
    const auto lo = to_size(trim(text.substr(0, dots)), "row range");
    const auto hi = to_size(trim(text.substr(dots + 2)), "row range");
    if (lo == 0 || hi < lo) throw Error(ErrorCode::Parse, "bad row range '" + text + "'");
    return {lo - 1, hi};
}

}  // namespace csubag
