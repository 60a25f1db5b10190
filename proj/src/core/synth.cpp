#include "csubag/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <tuple>

#include "csubag/baselines.hpp"
#include "csubag/parallel.hpp"
#include "csubag/partition.hpp"

namespace csubag {

namespace {

constexpr std::uint64_t kDataStream = 11;
constexpr std::uint64_t kSubaggingStream = 12;
constexpr std::uint64_t kSelectionStream = 13;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out.precision(10);
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void validate(const Scenario& scenario) {
    if (!(std::abs(scenario.rho) < 1.0)) throw Error(ErrorCode::InvalidArgument, "|rho| must be < 1");
    if (scenario.p == 0 || scenario.n == 0) throw Error(ErrorCode::InvalidArgument, "n and p must be positive");
    if (scenario.s > scenario.p) throw Error(ErrorCode::InvalidArgument, "s cannot exceed p");
    if (!(scenario.sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
}

Vector ar1_sample(std::size_t p, double rho, Rng& rng) {
    if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::InvalidArgument, "|rho| must be < 1");
    std::normal_distribution<double> z(0.0, 1.0);
    const double innovation = std::sqrt(1.0 - rho * rho);
    Vector row(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        row[j] = j == 0 ? z(rng) : rho * row[j - 1] + innovation * z(rng);
    }
    return row;
}

Dataset generate(const Scenario& scenario, std::size_t replication, std::size_t rows) {
    validate(scenario);
    const std::size_t n = rows == 0 ? scenario.n : rows;
    const auto p = static_cast<Eigen::Index>(scenario.p);
    Rng rng = make_rng(scenario.seed, {kDataStream, replication});
    Matrix x(static_cast<Eigen::Index>(n), p);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) = ar1_sample(scenario.p, scenario.rho, rng);

    Vector beta = Vector::Zero(p);
    beta.head(static_cast<Eigen::Index>(scenario.s)).setConstant(scenario.signal);
    std::normal_distribution<double> noise(0.0, 1.0);
    Vector y = x * beta;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += scenario.sigma * noise(rng);
    return Dataset::from_raw(std::move(y), std::move(x), GroundTruth::from_beta(beta, scenario.sigma));
}

std::size_t subsample_size_from_alpha(double n, double alpha) {
    if (!(n > 1.0) || !(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "need n > 1 and alpha > 0");
    return static_cast<std::size_t>(std::llround(std::pow(std::log(n), alpha)));
}

double total_size_from_alpha(std::size_t subsample_size, double alpha) {
    if (subsample_size == 0 || !(alpha > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "need N >= 1 and alpha > 0");
    }
    return std::exp(std::pow(static_cast<double>(subsample_size), 1.0 / alpha));
}

MethodSpec parse_method(const std::string& text) {
    MethodSpec spec;
    spec.name = text;
    if (text == "lasso") {
        spec.kind = MethodKind::Lasso;
    } else if (text == "subagging") {
        spec.kind = MethodKind::Subagging;
    } else if (text == "wmcsub") {
        spec.kind = MethodKind::WeightedContrast;
    } else if (text.rfind("wmcsub_tau=", 0) == 0 || text.rfind("wmcsub_B=", 0) == 0) {
        const auto eq = text.find('=');
        const std::string value = text.substr(eq + 1);
        try {
            std::size_t used = 0;
            if (text[7] == 't') {
                spec.tau = std::stod(value, &used);
            } else {
                spec.B = static_cast<std::size_t>(std::stoul(value, &used));
                if (spec.B == 0) throw Error(ErrorCode::InvalidArgument, "B must be >= 1");
            }
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::InvalidArgument, "bad method parameter in '" + text + "'");
        }
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown method '" + text + "'");
    }
    return spec;
}

std::vector<SummaryRow> SweepTable::summary() const {
    std::map<std::pair<std::string, std::size_t>, std::array<std::vector<double>, 3>> groups;
    std::vector<std::pair<std::string, std::size_t>> order;
    for (const auto& r : metrics) {
        auto key = std::make_pair(r.method, r.N);
        if (!groups.contains(key)) order.push_back(key);
        auto& g = groups[key];
        g[0].push_back(static_cast<double>(r.fp));
        g[1].push_back(static_cast<double>(r.fn));
        g[2].push_back(static_cast<double>(r.tp));
    }
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& g = groups[key];
        out.push_back(SummaryRow{key.first, key.second, mean_of(g[0]), sd_of(g[0]), mean_of(g[1]),
                                 sd_of(g[1]), mean_of(g[2]), sd_of(g[2])});
    }
    return out;
}

void SweepTable::append(const SweepTable& other) {
    metrics.insert(metrics.end(), other.metrics.begin(), other.metrics.end());
    frequencies.insert(frequencies.end(), other.frequencies.begin(), other.frequencies.end());
    pi.insert(pi.end(), other.pi.begin(), other.pi.end());
    nested_fraction.insert(nested_fraction.end(), other.nested_fraction.begin(),
                           other.nested_fraction.end());
}

SweepTable run_scenario_sweep(const Scenario& scenario, std::span<const std::size_t> sizes,
                              std::span<const MethodSpec> methods, const SweepConfig& config) {
    validate(scenario);
    if (sizes.empty() || methods.empty()) {
        throw Error(ErrorCode::InvalidArgument, "sweep needs at least one N and one method");
    }
    const std::size_t rows = config.rows == 0 ? scenario.n : config.rows;
    const std::size_t reps = scenario.replications;
    if (reps == 0) throw Error(ErrorCode::InvalidArgument, "replications must be >= 1");
    const std::size_t cells = sizes.size() * methods.size();

    struct Cell {
        MetricsRow row;
        IndexSet selected;
        Vector pi;
        double nested = -1.0;
    };
    // results[rep][size * methods + method]
    std::vector<std::vector<Cell>> results(reps, std::vector<Cell>(cells));
    std::mutex progress_mutex;

    // replications first, leftover threads go to the fits inside each one
    const std::size_t budget = config.threads == 0 ? default_threads() : config.threads;
    const std::size_t outer = std::min(budget, reps);
    const std::size_t inner = std::max<std::size_t>(1, budget / outer);

    parallel_for(reps, outer, [&](std::size_t rep) {
        const Dataset data = generate(scenario, rep, rows);
        const IndexSet& truth = data.truth()->support;
        const double n_total = config.run.nominal_n > 0.0 ? config.run.nominal_n
                                                          : static_cast<double>(rows);
        SolverConfig solver;
        solver.tol = config.run.solver_tol;
        solver.max_iters = config.run.solver_max_iters;

        std::optional<IndexSet> lasso_support;
        for (std::size_t si = 0; si < sizes.size(); ++si) {
            const std::size_t N = sizes[si];
            const std::size_t b_eff =
                std::min(config.run.b, rows / std::max<std::size_t>(1, config.run.m * N));
            if (b_eff == 0) {
                throw Error(ErrorCode::InsufficientSamples,
                            "N = " + std::to_string(N) + " leaves no room for a single group");
            }
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                const MethodSpec& method = methods[mi];
                Cell& cell = results[rep][si * methods.size() + mi];
                switch (method.kind) {
                    case MethodKind::Lasso: {
                        if (!lasso_support) {
                            const double lambda = config.lasso_lambda > 0.0
                                                      ? config.lasso_lambda
                                                      : reference_lambda(n_total, data.p());
                            lasso_support = full_lasso(data, lambda, solver).active_set;
                        }
                        cell.selected = *lasso_support;
                        break;
                    }
                    case MethodKind::Subagging: {
                        const auto plan =
                            make_partition(rows, N, b_eff, config.run.m,
                                           derive_seed(scenario.seed, {kSubaggingStream, rep, N}));
                        const double lambda = config.subagging_lambda > 0.0
                                                  ? config.subagging_lambda
                                                  : reference_lambda(n_total, data.p());
                        const auto sub = classic_subagging(data, plan, lambda, solver, inner);
                        cell.selected = sub.support;
                        cell.row.union_size = sub.union_support.size();
                        break;
                    }
                    case MethodKind::WeightedContrast: {
                        RunConfig run = config.run;
                        run.subsample_size = N;
                        run.b = b_eff;
                        run.tau = method.tau;
                        if (method.B != 0) run.B = method.B;
                        run.threads = inner;
                        run.seed = derive_seed(scenario.seed, {kSelectionStream, rep, N});
                        const auto out = run_selection(data, run);
                        cell.selected = out.result.selected;
                        cell.pi = out.result.pi;
                        std::size_t nested = 0, total = 0;
                        for (const auto& per_rep : out.subsample_supports) {
                            for (const auto& s : per_rep) {
                                ++total;
                                if (std::includes(s.begin(), s.end(), truth.begin(), truth.end())) ++nested;
                            }
                        }
                        cell.nested = total ? static_cast<double>(nested) / static_cast<double>(total) : 0.0;
                        break;
                    }
                }
                const Metrics m = metrics(cell.selected, *data.truth());
                cell.row.method = method.name;
                cell.row.N = N;
                cell.row.rep = rep;
                cell.row.fp = m.fp;
                cell.row.fn = m.fn;
                cell.row.tp = m.tp;
                if (config.progress) {
                    std::lock_guard lock(progress_mutex);
                    config.progress("rep " + std::to_string(rep + 1) + "/" + std::to_string(reps) +
                                    " N=" + std::to_string(N) + " " + method.name +
                                    ": fp=" + std::to_string(m.fp) + " fn=" + std::to_string(m.fn));
                }
            }
        }
    });

    SweepTable table;
    for (std::size_t c = 0; c < cells; ++c) {
        std::vector<double> freq(scenario.p, 0.0);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const Cell& cell = results[rep][c];
            table.metrics.push_back(cell.row);
            if (cell.nested >= 0.0) table.nested_fraction.push_back(cell.nested);
            for (auto j : cell.selected) freq[j] += 1.0;
            for (Eigen::Index j = 0; j < cell.pi.size(); ++j) {
                table.pi.push_back(PiRow{cell.row.method, cell.row.N, rep,
                                         static_cast<std::size_t>(j) + 1, cell.pi[j]});
            }
        }
        const Cell& head = results[0][c];
        for (std::size_t j = 0; j < scenario.p; ++j) {
            table.frequencies.push_back(
                FrequencyRow{head.row.method, head.row.N, j + 1, freq[j] / static_cast<double>(reps)});
        }
    }
    // replication-major order inside each (method, N) block reads better sorted by method
    std::stable_sort(table.metrics.begin(), table.metrics.end(), [](const auto& a, const auto& b) {
        return std::tie(a.method, a.N) < std::tie(b.method, b.N);
    });
    return table;
}

void write_metrics_csv(const SweepTable& table, const std::string& path) {
    auto out = open_out(path);
    out << "method,N,rep,fp,fn,tp\n";
    for (const auto& r : table.metrics) {
        out << r.method << ',' << r.N << ',' << r.rep + 1 << ',' << r.fp << ',' << r.fn << ','
            << r.tp << '\n';
    }
}

void write_selection_freq_csv(const SweepTable& table, const std::string& path) {
    auto out = open_out(path);
    out << "method,N,j,freq\n";
    for (const auto& r : table.frequencies) {
        out << r.method << ',' << r.N << ',' << r.j << ',' << r.freq << '\n';
    }
}

void write_pi_csv(const SweepTable& table, const std::string& path) {
    auto out = open_out(path);
    out << "method,N,rep,j,pi\n";
    for (const auto& r : table.pi) {
        out << r.method << ',' << r.N << ',' << r.rep + 1 << ',' << r.j << ',' << r.pi << '\n';
    }
}

void write_summary_csv(const SweepTable& table, const std::string& path) {
    auto out = open_out(path);
    out << "method,N,mean_fp,sd_fp,mean_fn,sd_fn,mean_tp,sd_tp\n";
    for (const auto& r : table.summary()) {
        out << r.method << ',' << r.N << ',' << r.mean_fp << ',' << r.sd_fp << ',' << r.mean_fn
            << ',' << r.sd_fn << ',' << r.mean_tp << ',' << r.sd_tp << '\n';
    }
}

Scenario example_scenario(const std::string& name) {
    return example_protocols(name).front().scenario;
}

std::vector<BenchProtocol> example_protocols(const std::string& name) {
    auto example1 = [](const std::string& label, double rho, double signal) {
        BenchProtocol p;
        p.name = label;
        p.scenario = Scenario{10000, 500, rho, signal, 30, 1.0, 100, 2024};
        p.sizes = {50, 75, 100, 130, 250};
        for (const char* m : {"lasso", "subagging", "wmcsub_tau=1", "wmcsub"}) {
            p.methods.push_back(parse_method(m));
        }
        p.sweep.run.b = 100;
        p.sweep.run.m = 1;
        p.sweep.run.K = 3;
        p.sweep.run.B = 2;
        p.sweep.run.lambda_mode = LambdaMode::Reference;
        return p;
    };
    if (name == "1a") return {example1(name, 0.8, 1.0)};
    if (name == "1b") return {example1(name, 0.2, 1.0)};
    if (name == "1c") return {example1(name, 0.2, 0.3)};
    if (name == "1d") return {example1(name, 0.8, 0.3)};
    if (name == "2") {
        BenchProtocol p = example1(name, 0.2, 1.0);
        p.sizes = {75};
        p.methods.clear();
        for (const char* m : {"wmcsub_B=1", "wmcsub_B=2", "wmcsub_B=5", "wmcsub_B=10"}) {
            p.methods.push_back(parse_method(m));
        }
        return {p};
    }
    if (name == "3") {
        struct Setting {
            double alpha;
            std::size_t N, p;
            WeightScheme weights;
        };
        const Setting settings[] = {{2.0, 500, 500, WeightScheme::Multinomial},
                                    {1.25, 500, 500, WeightScheme::Optimal},
                                    {2.0, 500, 250, WeightScheme::Multinomial},
                                    {2.0, 1000, 500, WeightScheme::Optimal}};
        std::vector<BenchProtocol> out;
        for (const auto& s : settings) {
            BenchProtocol p;
            p.name = "3";
            p.scenario = Scenario{0, s.p, 0.3, 1.0, 30, 1.0, 10, 2024};
            p.sizes = {s.N};
            MethodSpec m = parse_method("wmcsub");
            char label[96];
            std::snprintf(label, sizeof label, "wmcsub_alpha=%g_N=%zu_p=%zu", s.alpha, s.N, s.p);
            m.name = label;
            p.methods = {m};
            auto& run = p.sweep.run;
            run.b = 20;
            run.m = 1;
            run.K = 1;
            run.B = 1;
            run.weights = s.weights;
            run.optimal_iters = 50;
            run.nominal_n = total_size_from_alpha(s.N, s.alpha);
            p.sweep.rows = run.b * s.N;
            p.scenario.n = p.sweep.rows;
            // universal threshold for the per-row weight n/N on unit-norm columns
            run.lambda_mode = LambdaMode::Fixed;
            run.lambda = p.scenario.sigma *
                         std::sqrt(2.0 * std::log(static_cast<double>(s.p)) /
                                   (static_cast<double>(s.N) * static_cast<double>(p.sweep.rows)));
            out.push_back(std::move(p));
        }
        return out;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown example '" + name + "' (1a, 1b, 1c, 1d, 2, 3)");
}

}  // namespace csubag
