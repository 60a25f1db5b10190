#include "csubag/csubag.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "csubag/aggregate.hpp"
#include "csubag/baselines.hpp"
#include "csubag/diagnostics.hpp"
#include "csubag/io.hpp"
#include "csubag/partition.hpp"
#include "csubag/synth.hpp"
#include "csubag/weighting.hpp"

struct csubag_dataset {
    csubag::Dataset data;
};

struct csubag_config {
    csubag::RunConfig run;
};

struct csubag_selection {
    csubag::SelectionResult result;
};

namespace {

thread_local std::string g_last_error;

csubag_status status_of(csubag::ErrorCode code) {
    return static_cast<csubag_status>(static_cast<int>(code) + 1);
}

template <class F>
csubag_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return CSUBAG_OK;
    } catch (const csubag::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CSUBAG_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CSUBAG_E_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw csubag::Error(csubag::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

csubag_scenario to_c(const csubag::Scenario& s) {
    return {s.n, s.p, s.rho, s.signal, s.s, s.sigma, s.replications, s.seed};
}

csubag::Scenario from_c(const csubag_scenario& s) {
    return {s.n, s.p, s.rho, s.signal, s.s, s.sigma, s.replications, s.seed};
}

const char* mode_name(csubag::LambdaMode m) {
    switch (m) {
        case csubag::LambdaMode::Fixed: return "fixed";
        case csubag::LambdaMode::Reference: return "reference";
        case csubag::LambdaMode::Grid: return "grid";
        case csubag::LambdaMode::Adaptive: return "adaptive";
    }
    return "?";
}

}  // namespace

extern "C" {

const char* csubag_last_error(void) { return g_last_error.c_str(); }

const char* csubag_status_name(csubag_status status) {
    if (status == CSUBAG_OK) return "Ok";
    if (status == CSUBAG_E_INTERNAL) return "Internal";
    const int code = static_cast<int>(status) - 1;
    if (code < 0 || code > static_cast<int>(csubag::ErrorCode::Parse)) return "Unknown";
    return csubag::to_string(static_cast<csubag::ErrorCode>(code));
}

const char* csubag_version(void) { return "1.0.0"; }

void csubag_string_free(char* text) { delete[] text; }

csubag_status csubag_scenario_default(csubag_scenario* out) {
    return guarded([&] {
        require(out, "null output");
        *out = to_c(csubag::Scenario{});
    });
}

csubag_status csubag_scenario_preset(const char* name, csubag_scenario* out) {
    return guarded([&] {
        require(name && out, "null argument");
        *out = to_c(csubag::example_scenario(name));
    });
}

csubag_status csubag_scenario_load(const char* path, csubag_scenario* inout) {
    return guarded([&] {
        require(path && inout, "null argument");
        *inout = to_c(csubag::load_scenario(path, from_c(*inout)));
    });
}

csubag_status csubag_dataset_from_arrays(const double* y, const double* x, size_t n, size_t p,
                                         csubag_dataset** out) {
    return guarded([&] {
        require(y && x && out, "null argument");
        require(n > 0 && p > 0, "n and p must be positive");
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        csubag::Matrix xm = Eigen::Map<const RowMajor>(x, static_cast<Eigen::Index>(n),
                                                       static_cast<Eigen::Index>(p));
        csubag::Vector yv = Eigen::Map<const csubag::Vector>(y, static_cast<Eigen::Index>(n));
        *out = new csubag_dataset{csubag::Dataset::from_raw(std::move(yv), std::move(xm))};
    });
}

csubag_status csubag_dataset_read_csv(const char* path, const char* truth_json,
                                      csubag_dataset** out) {
    return guarded([&] {
        require(path && out, "null argument");
        std::optional<csubag::GroundTruth> truth;
        if (truth_json) truth = csubag::truth_from_json(csubag::read_text_file(truth_json));
        *out = new csubag_dataset{csubag::read_dataset_csv(path, std::move(truth))};
    });
}

csubag_status csubag_dataset_simulate(const csubag_scenario* scenario, size_t replication,
                                      csubag_dataset** out) {
    return guarded([&] {
        require(scenario && out, "null argument");
        *out = new csubag_dataset{csubag::generate(from_c(*scenario), replication)};
    });
}

csubag_status csubag_dataset_write_csv(const csubag_dataset* data, const char* path) {
    return guarded([&] {
        require(data && path, "null argument");
        csubag::write_dataset_csv(path, data->data.y(), data->data.x());
    });
}

csubag_status csubag_dataset_write_truth(const csubag_dataset* data, const char* path) {
    return guarded([&] {
        require(data && path, "null argument");
        require(data->data.truth().has_value(), "dataset has no ground truth");
        csubag::write_text_file(path, csubag::truth_to_json(*data->data.truth()) + "\n");
    });
}

size_t csubag_dataset_n(const csubag_dataset* data) { return data ? data->data.n() : 0; }
size_t csubag_dataset_p(const csubag_dataset* data) { return data ? data->data.p() : 0; }

csubag_status csubag_dataset_copy(const csubag_dataset* data, double* y, double* x) {
    return guarded([&] {
        require(data && y && x, "null argument");
        const auto& d = data->data;
        std::memcpy(y, d.y().data(), sizeof(double) * d.n());
        for (size_t i = 0; i < d.n(); ++i) {
            for (size_t j = 0; j < d.p(); ++j) {
                x[i * d.p() + j] = d.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
    });
}

void csubag_dataset_free(csubag_dataset* data) { delete data; }

csubag_status csubag_config_new(csubag_config** out) {
    return guarded([&] {
        require(out, "null output");
        *out = new csubag_config{};
    });
}

csubag_status csubag_config_load(csubag_config* cfg, const char* path) {
    return guarded([&] {
        require(cfg && path, "null argument");
        cfg->run = csubag::load_run_config(path, cfg->run);
    });
}

csubag_status csubag_config_set(csubag_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        require(cfg && key && value, "null argument");
        require(!std::strpbrk(key, "=\n[]") && !std::strchr(value, '\n'), "malformed key or value");
        cfg->run = csubag::parse_run_config(std::string(key) + " = " + value + "\n", cfg->run);
    });
}

csubag_status csubag_config_to_json(const csubag_config* cfg, char** out) {
    return guarded([&] {
        require(cfg && out, "null argument");
        const auto& c = cfg->run;
        nlohmann::json j;
        j["subsample_size"] = c.subsample_size;
        j["b"] = c.b;
        j["m"] = c.m;
        j["K"] = c.K;
        j["B"] = c.B;
        j["tau"] = c.tau;
        j["lambda_mode"] = mode_name(c.lambda_mode);
        j["lambda"] = c.lambda;
        j["lambda_grid"] = c.lambda_grid;
        j["calibration_size"] = c.calibration_size;
        j["seed"] = c.seed;
        j["weights"] = c.weights == csubag::WeightScheme::Optimal ? "optimal" : "multinomial";
        j["optimal_iters"] = c.optimal_iters;
        j["max_pairs"] = c.max_pairs;
        j["adaptive_iters"] = c.adaptive_iters;
        j["nominal_n"] = c.nominal_n;
        j["threads"] = c.threads;
        j["solver_tol"] = c.solver_tol;
        j["solver_max_iters"] = c.solver_max_iters;
        *out = dup_string(j.dump(2));
    });
}

void csubag_config_free(csubag_config* cfg) { delete cfg; }

csubag_status csubag_select(const csubag_dataset* data, const csubag_config* cfg,
                            csubag_selection** out) {
    return guarded([&] {
        require(data && cfg && out, "null argument");
        auto run = csubag::run_selection(data->data, cfg->run);
        *out = new csubag_selection{std::move(run.result)};
    });
}

size_t csubag_selection_p(const csubag_selection* sel) {
    return sel ? static_cast<size_t>(sel->result.pi.size()) : 0;
}
size_t csubag_selection_count(const csubag_selection* sel) {
    return sel ? sel->result.selected.size() : 0;
}
double csubag_selection_lambda(const csubag_selection* sel) {
    return sel ? sel->result.lambda_used : 0.0;
}
double csubag_selection_tau(const csubag_selection* sel) { return sel ? sel->result.tau : 0.0; }

csubag_status csubag_selection_pi(const csubag_selection* sel, double* out) {
    return guarded([&] {
        require(sel && out, "null argument");
        std::memcpy(out, sel->result.pi.data(), sizeof(double) * sel->result.pi.size());
    });
}

csubag_status csubag_selection_beta(const csubag_selection* sel, double* out) {
    return guarded([&] {
        require(sel && out, "null argument");
        std::memcpy(out, sel->result.beta_agg.data(), sizeof(double) * sel->result.beta_agg.size());
    });
}

csubag_status csubag_selection_indices(const csubag_selection* sel, size_t* out) {
    return guarded([&] {
        require(sel && (out || sel->result.selected.empty()), "null argument");
        for (size_t k = 0; k < sel->result.selected.size(); ++k) out[k] = sel->result.selected[k];
    });
}

csubag_status csubag_selection_to_json(const csubag_selection* sel, char** out) {
    return guarded([&] {
        require(sel && out, "null argument");
        *out = dup_string(csubag::selection_to_json(sel->result));
    });
}

csubag_status csubag_selection_write(const csubag_selection* sel, const char* json_path,
                                     const char* csv_path) {
    return guarded([&] {
        require(sel, "null selection");
        if (json_path) csubag::write_text_file(json_path, csubag::selection_to_json(sel->result) + "\n");
        if (csv_path) csubag::write_selection_csv(csv_path, sel->result);
    });
}

void csubag_selection_free(csubag_selection* sel) { delete sel; }

double csubag_reference_lambda(double n, size_t p) { return csubag::reference_lambda(n, p); }

csubag_status csubag_lasso_json(const csubag_dataset* data, double lambda, char** out) {
    return guarded([&] {
        require(data && out, "null argument");
        const auto& d = data->data;
        const double lam = lambda > 0.0 ? lambda : csubag::reference_lambda(static_cast<double>(d.n()), d.p());
        const auto fit = csubag::full_lasso(d, lam);
        auto j = nlohmann::json::parse(csubag::lasso_to_json(fit));
        if (d.truth()) {
            const auto m = csubag::metrics(fit.active_set, *d.truth());
            j["metrics"] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}};
        }
        *out = dup_string(j.dump(2));
    });
}

csubag_status csubag_subagging_json(const csubag_dataset* data, size_t subsample_size, size_t d,
                                    double lambda1, uint64_t seed, size_t threads, char** out) {
    return guarded([&] {
        require(data && out, "null argument");
        require(lambda1 > 0.0, "lambda1 must be positive");
        const auto plan = csubag::make_partition(data->data.n(), subsample_size, d, 1, seed);
        const auto res = csubag::classic_subagging(data->data, plan, lambda1, {}, threads);
        auto j = nlohmann::json::parse(csubag::subagging_to_json(res, plan));
        if (data->data.truth()) {
            const auto m = csubag::metrics(res.support, *data->data.truth());
            j["metrics"] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}};
        }
        *out = dup_string(j.dump(2));
    });
}

csubag_status csubag_weights_json(const csubag_dataset* data, size_t row_begin, size_t row_end,
                                  const char* mode, size_t count, uint64_t seed, double nominal_n,
                                  char** out) {
    return guarded([&] {
        require(data && mode && out, "null argument");
        const auto& d = data->data;
        if (row_begin >= row_end || row_end > d.n()) {
            throw csubag::Error(csubag::ErrorCode::IndexOutOfRange, "row range outside the dataset");
        }
        std::vector<size_t> rows(row_end - row_begin);
        for (size_t k = 0; k < rows.size(); ++k) rows[k] = row_begin + k;
        const double n = nominal_n > 0.0 ? nominal_n : static_cast<double>(d.n());
        const auto x_sub = d.rows_x(rows);
        const std::vector<double> uniform(rows.size(), n / static_cast<double>(rows.size()));

        nlohmann::json j;
        j["rows"] = {row_begin + 1, row_end};
        j["N"] = rows.size();
        j["n"] = n;
        j["mode"] = mode;
        j["uniform_min_eig"] = csubag::min_eigen_weighted_gram(x_sub, uniform);
        const auto scheme = csubag::parse_weight_scheme(mode);
        if (scheme == csubag::WeightScheme::Multinomial) {
            require(std::floor(n) == n && n <= 9.0e18, "multinomial weights need an integer n");
            auto draws = csubag::multinomial_weights(static_cast<std::int64_t>(n), rows.size(),
                                                     count == 0 ? 1 : count, seed);
            auto arr = nlohmann::json::array();
            for (const auto& w : draws) {
                arr.push_back({{"values", w.values},
                               {"total", w.total()},
                               {"min_eig", csubag::min_eigen_weighted_gram(x_sub, w.as_real())}});
            }
            j["draws"] = std::move(arr);
        } else {
            const auto opt = csubag::optimal_weights(x_sub, n);
            j["weights"] = opt.weights;
            j["min_eig"] = opt.objective;
            j["iterations"] = opt.history.size();
            if (std::floor(n) == n && n <= 9.0e18) {
                const auto rounded = csubag::round_weights(opt.weights, static_cast<std::int64_t>(n));
                j["rounded"] = rounded.values;
                j["rounded_min_eig"] = csubag::min_eigen_weighted_gram(x_sub, rounded.as_real());
            }
        }
        *out = dup_string(j.dump(2));
    });
}

csubag_status csubag_diag_json(const csubag_dataset* data, const size_t* support,
                               size_t support_size, size_t trials, uint64_t seed, char** out) {
    return guarded([&] {
        require(data && out && (support || support_size == 0), "null argument");
        const auto& d = data->data;
        csubag::IndexSet s(support, support + support_size);
        for (auto j : s) {
            if (j >= d.p()) throw csubag::Error(csubag::ErrorCode::IndexOutOfRange, "support index exceeds p");
        }
        s = csubag::make_index_set(std::move(s));
        require(!s.empty(), "support must not be empty");

        std::vector<double> signs;
        if (d.truth()) {
            for (auto j : s) {
                const double b = d.truth()->beta_star[static_cast<Eigen::Index>(j)];
                signs.push_back(b < 0.0 ? -1.0 : 1.0);
            }
        }
        const csubag::Matrix xs = csubag::select_columns(d.x(), s);
        const auto support_spec = csubag::spectra(xs.transpose() * xs);
        const csubag::Matrix gram = d.x().transpose() * d.x();
        const auto full_spec = csubag::spectra(gram);

        nlohmann::json j;
        j["support"] = nlohmann::json::array();
        for (auto k : s) j["support"].push_back(k + 1);
        j["ir_norm"] = csubag::ir_norm(d.x(), s, signs);
        j["ir_satisfied"] = j["ir_norm"].get<double>() < 1.0;
        j["re_proxy"] = csubag::re_proxy(d.x(), s, {}, trials == 0 ? 1 : trials, seed);
        j["re_trials"] = trials == 0 ? 1 : trials;
        j["support_gram"] = {{"min_eig", support_spec.min_eig},
                             {"max_eig", support_spec.max_eig},
                             {"condition_number", support_spec.condition_number}};
        j["full_gram"] = {{"min_eig", full_spec.min_eig},
                          {"max_eig", full_spec.max_eig},
                          {"condition_number", full_spec.condition_number}};
        *out = dup_string(j.dump(2));
    });
}

csubag_status csubag_bench(const char* example, size_t reps, const uint64_t* seed, size_t threads,
                           const char* out_dir, csubag_progress_fn progress, void* user) {
    return guarded([&] {
        require(example && out_dir, "null argument");
        auto protocols = csubag::example_protocols(example);
        std::filesystem::create_directories(out_dir);
        csubag::SweepTable table;
        for (auto& proto : protocols) {
            if (reps > 0) proto.scenario.replications = reps;
            if (seed) proto.scenario.seed = *seed;
            proto.sweep.threads = threads;
            if (progress) {
                proto.sweep.progress = [progress, user](const std::string& msg) {
                    progress(msg.c_str(), user);
                };
            }
            table.append(csubag::run_scenario_sweep(proto.scenario, proto.sizes, proto.methods,
                                                    proto.sweep));
        }
        const std::filesystem::path dir(out_dir);
        csubag::write_metrics_csv(table, (dir / "metrics.csv").string());
        csubag::write_selection_freq_csv(table, (dir / "selection_freq.csv").string());
        csubag::write_summary_csv(table, (dir / "summary.csv").string());
        csubag::write_pi_csv(table, (dir / "pi.csv").string());
    });
}

csubag_status csubag_subsample_size_from_alpha(double n, double alpha, size_t* out) {
    return guarded([&] {
        require(out, "null output");
        *out = csubag::subsample_size_from_alpha(n, alpha);
    });
}

}  // extern "C"
