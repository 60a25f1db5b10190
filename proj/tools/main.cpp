#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csubag/csubag.h"

namespace {

struct Failure : std::runtime_error {
    Failure(csubag_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
    csubag_status status;
};

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

void report_error(const std::string& code, const std::string& message) {
    std::cerr << "{\"error\": {\"code\": \"" << json_escape(code) << "\", \"message\": \""
              << json_escape(message) << "\"}}\n";
}

void check(csubag_status s) {
    if (s != CSUBAG_OK) throw Failure(s, csubag_last_error());
}

struct DatasetDeleter {
    void operator()(csubag_dataset* d) const { csubag_dataset_free(d); }
};
struct ConfigDeleter {
    void operator()(csubag_config* c) const { csubag_config_free(c); }
};
struct SelectionDeleter {
    void operator()(csubag_selection* s) const { csubag_selection_free(s); }
};
using DatasetPtr = std::unique_ptr<csubag_dataset, DatasetDeleter>;

std::string take(char* text) {
    std::string out(text);
    csubag_string_free(text);
    return out;
}

DatasetPtr load_dataset(const std::string& path, const std::string& truth) {
    csubag_dataset* d = nullptr;
    check(csubag_dataset_read_csv(path.c_str(), truth.empty() ? nullptr : truth.c_str(), &d));
    return DatasetPtr(d);
}

void emit(const std::string& json, const std::string& out_path) {
    std::cout << json << '\n';
    if (!out_path.empty()) {
        FILE* f = std::fopen(out_path.c_str(), "wb");
        if (!f) throw Failure(CSUBAG_E_IO, "cannot write " + out_path);
        std::fputs(json.c_str(), f);
        std::fputc('\n', f);
        std::fclose(f);
    }
}

void progress_to_stderr(const char* message, void*) { std::cerr << message << '\n'; }

std::vector<std::size_t> parse_support(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(start, comma - start);
        if (!item.empty()) {
            const auto dash = item.find('-');
            std::size_t lo = 0, hi = 0;
            try {
                if (dash == std::string::npos) {
                    lo = hi = std::stoul(item);
                } else {
                    lo = std::stoul(item.substr(0, dash));
                    hi = std::stoul(item.substr(dash + 1));
                }
            } catch (const std::logic_error&) {
                throw CLI::ValidationError("--support", "bad entry '" + item + "'");
            }
            if (lo == 0 || hi < lo) throw CLI::ValidationError("--support", "indices are 1-based");
            for (auto j = lo; j <= hi; ++j) out.push_back(j - 1);
        }
        start = comma + 1;
    }
    if (out.empty()) throw CLI::ValidationError("--support", "empty support");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted maximum-contrast subagging for sparse support recovery"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(csubag_version()));

    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Master seed");
        sub->add_option("--threads", threads, "Worker threads (default: CONTRAST_SUBAG_THREADS or all cores)");
    };

    // simulate
    std::string scenario_arg, out_dir;
    std::size_t sim_rep = 0;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset and its ground truth");
    simulate->add_option("--scenario", scenario_arg, "Preset (1a,1b,1c,1d,2,3) or key = value file")->required();
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--rep", sim_rep, "Replication index");
    common(simulate);

    // select
    std::string data_path, truth_path, config_path, out_path;
    std::vector<std::string> overrides;
    std::optional<std::size_t> sel_N;
    std::optional<double> sel_tau;
    std::optional<std::string> sel_mode;
    auto* select = app.add_subcommand("select", "Run weighted maximum-contrast subagging");
    select->add_option("--data", data_path, "Dataset CSV (y,x1..xp)")->required()->check(CLI::ExistingFile);
    select->add_option("--config", config_path, "key = value run configuration")->check(CLI::ExistingFile);
    select->add_option("--out", out_dir, "Output directory")->required();
    select->add_option("--set", overrides, "Override a config key: key=value");
    select->add_option("--N", sel_N, "Subsample size");
    select->add_option("--tau", sel_tau, "Selection threshold");
    select->add_option("--lambda-mode", sel_mode, "fixed|reference|grid|adaptive");
    common(select);

    // lasso
    std::string lambda_arg;
    auto* lasso = app.add_subcommand("lasso", "Full-data Lasso baseline");
    lasso->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
    lasso->add_option("--lambda", lambda_arg, "Penalty or 'auto'")->required();
    lasso->add_option("--truth", truth_path, "Truth JSON for FP/FN")->check(CLI::ExistingFile);
    lasso->add_option("--out", out_path, "Also write the JSON here");
    common(lasso);

    // subag
    std::size_t sub_N = 0, sub_d = 0;
    double lambda1 = 0.0;
    auto* subag = app.add_subcommand("subag", "Classic subagging baseline");
    subag->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
    subag->add_option("--N", sub_N, "Subsample size")->required()->check(CLI::PositiveNumber);
    subag->add_option("--d", sub_d, "Number of subsamples")->required()->check(CLI::PositiveNumber);
    subag->add_option("--lambda1", lambda1, "Penalty of every sub-fit")->required()->check(CLI::PositiveNumber);
    subag->add_option("--truth", truth_path, "Truth JSON for FP/FN")->check(CLI::ExistingFile);
    subag->add_option("--out", out_path, "Also write the JSON here");
    common(subag);

    // weights
    std::string rows_arg, mode_arg;
    std::size_t count = 1;
    double nominal_n = 0.0;
    auto* weights = app.add_subcommand("weights", "Inspect weight vectors for a block of rows");
    weights->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
    weights->add_option("--rows", rows_arg, "1-based inclusive range i..j")->required();
    weights->add_option("--mode", mode_arg, "multinomial|optimal")
        ->required()
        ->check(CLI::IsMember({"multinomial", "optimal"}));
    weights->add_option("--count", count, "Multinomial draws")->check(CLI::PositiveNumber);
    weights->add_option("--nominal-n", nominal_n, "Total sample size n (default: rows in the file)");
    weights->add_option("--out", out_path, "Also write the JSON here");
    common(weights);

    // bench
    std::string example;
    std::size_t reps = 0;
    auto* bench = app.add_subcommand("bench", "Reproduce a simulation protocol");
    bench->add_option("--example", example, "1a|1b|1c|1d|2|3")
        ->required()
        ->check(CLI::IsMember({"1a", "1b", "1c", "1d", "2", "3"}));
    bench->add_option("--reps", reps, "Replications (default: protocol value)")->check(CLI::PositiveNumber);
    bench->add_option("--out", out_dir, "Output directory (default: bench-<example>)");
    common(bench);

    // diag
    std::string support_arg;
    std::size_t trials = 1000;
    auto* diag = app.add_subcommand("diag", "Condition diagnostics for a support");
    diag->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
    diag->add_option("--support", support_arg, "1-based indices, e.g. 1-30 or 1,4,9")->required();
    diag->add_option("--trials", trials, "Cone directions for the RE proxy")->check(CLI::PositiveNumber);
    diag->add_option("--truth", truth_path, "Truth JSON (signs for the IR norm)")->check(CLI::ExistingFile);
    diag->add_option("--out", out_path, "Also write the JSON here");
    common(diag);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("BadArgument", e.what());
        return 2;
    }

    try {
        if (*simulate) {
            csubag_scenario sc{};
            if (std::filesystem::is_regular_file(scenario_arg)) {
                check(csubag_scenario_default(&sc));
                check(csubag_scenario_load(scenario_arg.c_str(), &sc));
            } else {
                check(csubag_scenario_preset(scenario_arg.c_str(), &sc));
            }
            if (seed) sc.seed = *seed;
            csubag_dataset* raw = nullptr;
            check(csubag_dataset_simulate(&sc, sim_rep, &raw));
            DatasetPtr data(raw);
            std::filesystem::create_directories(out_dir);
            const auto csv = (std::filesystem::path(out_dir) / "data.csv").string();
            const auto truth = (std::filesystem::path(out_dir) / "truth.json").string();
            check(csubag_dataset_write_csv(data.get(), csv.c_str()));
            check(csubag_dataset_write_truth(data.get(), truth.c_str()));
            std::cout << "{\"data\": \"" << json_escape(csv) << "\", \"truth\": \"" << json_escape(truth)
                      << "\", \"n\": " << csubag_dataset_n(data.get())
                      << ", \"p\": " << csubag_dataset_p(data.get()) << "}\n";
        } else if (*select) {
            auto data = load_dataset(data_path, "");
            csubag_config* raw = nullptr;
            check(csubag_config_new(&raw));
            std::unique_ptr<csubag_config, ConfigDeleter> cfg(raw);
            if (!config_path.empty()) check(csubag_config_load(cfg.get(), config_path.c_str()));
            for (const auto& kv : overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw Failure(CSUBAG_E_INVALID_ARGUMENT, "--set expects key=value");
                check(csubag_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
            }
            if (sel_N) check(csubag_config_set(cfg.get(), "subsample_size", std::to_string(*sel_N).c_str()));
            if (sel_tau) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", *sel_tau);
                check(csubag_config_set(cfg.get(), "tau", buf));
            }
            if (sel_mode) check(csubag_config_set(cfg.get(), "lambda_mode", sel_mode->c_str()));
            if (seed) check(csubag_config_set(cfg.get(), "seed", std::to_string(*seed).c_str()));
            if (threads) check(csubag_config_set(cfg.get(), "threads", std::to_string(threads).c_str()));

            std::cerr << "selecting on n=" << csubag_dataset_n(data.get())
                      << " p=" << csubag_dataset_p(data.get()) << '\n';
            csubag_selection* sel_raw = nullptr;
            check(csubag_select(data.get(), cfg.get(), &sel_raw));
            std::unique_ptr<csubag_selection, SelectionDeleter> sel(sel_raw);
            std::filesystem::create_directories(out_dir);
            const auto json_path = (std::filesystem::path(out_dir) / "selection.json").string();
            const auto csv_path = (std::filesystem::path(out_dir) / "selection.csv").string();
            check(csubag_selection_write(sel.get(), json_path.c_str(), csv_path.c_str()));
            char* cfg_json = nullptr;
            check(csubag_config_to_json(cfg.get(), &cfg_json));
            const std::string config_text = take(cfg_json);
            FILE* f = std::fopen((std::filesystem::path(out_dir) / "config.json").string().c_str(), "wb");
            if (f) {
                std::fputs(config_text.c_str(), f);
                std::fputc('\n', f);
                std::fclose(f);
            }
            std::vector<std::size_t> idx(csubag_selection_count(sel.get()));
            check(csubag_selection_indices(sel.get(), idx.data()));
            std::cout << "{\"selected\": [";
            for (std::size_t k = 0; k < idx.size(); ++k) std::cout << (k ? ", " : "") << idx[k] + 1;
            std::cout << "], \"lambda\": " << csubag_selection_lambda(sel.get())
                      << ", \"tau\": " << csubag_selection_tau(sel.get()) << ", \"json\": \""
                      << json_escape(json_path) << "\", \"csv\": \"" << json_escape(csv_path) << "\"}\n";
        } else if (*lasso) {
            double lambda = 0.0;
            if (lambda_arg != "auto") {
                try {
                    std::size_t used = 0;
                    lambda = std::stod(lambda_arg, &used);
                    if (used != lambda_arg.size() || !(lambda > 0.0)) throw std::invalid_argument(lambda_arg);
                } catch (const std::logic_error&) {
                    report_error("BadArgument", "--lambda must be a positive number or 'auto'");
                    return 2;
                }
            }
            auto data = load_dataset(data_path, truth_path);
            char* out = nullptr;
            check(csubag_lasso_json(data.get(), lambda, &out));
            emit(take(out), out_path);
        } else if (*subag) {
            auto data = load_dataset(data_path, truth_path);
            char* out = nullptr;
            check(csubag_subagging_json(data.get(), sub_N, sub_d, lambda1, seed.value_or(1), threads, &out));
            emit(take(out), out_path);
        } else if (*weights) {
            const auto dots = rows_arg.find("..");
            std::size_t lo = 0, hi = 0;
            try {
                if (dots == std::string::npos) throw std::invalid_argument(rows_arg);
                lo = std::stoul(rows_arg.substr(0, dots));
                hi = std::stoul(rows_arg.substr(dots + 2));
            } catch (const std::logic_error&) {
                report_error("BadArgument", "--rows must look like i..j");
                return 2;
            }
            if (lo == 0 || hi < lo) {
                report_error("BadArgument", "--rows is 1-based and needs i <= j");
                return 2;
            }
            auto data = load_dataset(data_path, "");
            char* out = nullptr;
            check(csubag_weights_json(data.get(), lo - 1, hi, mode_arg.c_str(), count, seed.value_or(1),
                                      nominal_n, &out));
            emit(take(out), out_path);
        } else if (*bench) {
            if (out_dir.empty()) out_dir = "bench-" + example;
            const std::uint64_t s = seed.value_or(0);
            check(csubag_bench(example.c_str(), reps, seed ? &s : nullptr, threads, out_dir.c_str(),
                               progress_to_stderr, nullptr));
            std::cout << "{\"out\": \"" << json_escape(out_dir)
                      << "\", \"files\": [\"metrics.csv\", \"selection_freq.csv\", \"summary.csv\", \"pi.csv\"]}\n";
        } else if (*diag) {
            std::vector<std::size_t> support;
            try {
                support = parse_support(support_arg);
            } catch (const CLI::Error& e) {
                report_error("BadArgument", e.what());
                return 2;
            }
            auto data = load_dataset(data_path, truth_path);
            char* out = nullptr;
            check(csubag_diag_json(data.get(), support.data(), support.size(), trials, seed.value_or(1), &out));
            emit(take(out), out_path);
        }
    } catch (const Failure& e) {
        report_error(csubag_status_name(e.status), e.what());
        return e.status == CSUBAG_E_INVALID_ARGUMENT ? 2 : 1;
    } catch (const std::exception& e) {
        report_error("Internal", e.what());
        return 1;
    }
    return 0;
}
