#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "csubag/aggregate.hpp"
#include "csubag/model.hpp"
#include "csubag/rng.hpp"

namespace csubag {

struct Scenario {
    std::size_t n = 10000;
    std::size_t p = 500;
    double rho = 0.2;
    double signal = 1.0;
    std::size_t s = 30;
    double sigma = 1.0;
    std::size_t replications = 1;
    std::uint64_t seed = 1;
};

void validate(const Scenario& scenario);

/// One row with x_1 ~ N(0,1), x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j, so
/// cov(x_i, x_j) = rho^|i-j|.
Vector ar1_sample(std::size_t p, double rho, Rng& rng);

/// Normalized dataset with ground truth: beta*_{1..s} = signal, the rest 0,
/// Y = X beta* + N(0, sigma^2). `rows` overrides scenario.n when nonzero.
Dataset generate(const Scenario& scenario, std::size_t replication = 0, std::size_t rows = 0);

/// N = round((ln n)^alpha) and its inverse n = exp(N^(1/alpha)).
std::size_t subsample_size_from_alpha(double n, double alpha);
double total_size_from_alpha(std::size_t subsample_size, double alpha);

enum class MethodKind { Lasso, Subagging, WeightedContrast };

struct MethodSpec {
    std::string name;
    MethodKind kind = MethodKind::WeightedContrast;
    double tau = 0.5;
    std::size_t B = 0;  // 0: take the sweep's RunConfig value
};

/// "lasso", "subagging", "wmcsub", "wmcsub_tau=<x>" or "wmcsub_B=<k>".
MethodSpec parse_method(const std::string& text);

struct SweepConfig {
    /// Template for the weighted contrast runs; N, tau, B and seed are set per cell.
    RunConfig run;
    /// 0: reference_lambda(n, p).
    double lasso_lambda = 0.0;
    double subagging_lambda = 0.0;
    /// Rows actually generated (0: scenario.n); run.nominal_n may exceed it.
    std::size_t rows = 0;
    std::size_t threads = 0;
    std::function<void(const std::string&)> progress;
};

struct MetricsRow {
    std::string method;
    std::size_t N = 0;
    std::size_t rep = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tp = 0;
    std::size_t union_size = 0;  // subagging only: union of per-fit supports
};

struct FrequencyRow {
    std::string method;
    std::size_t N = 0;
    std::size_t j = 0;  // 1-based
    double freq = 0.0;
};

struct PiRow {
    std::string method;
    std::size_t N = 0;
    std::size_t rep = 0;
    std::size_t j = 0;  // 1-based
    double pi = 0.0;
};

struct SummaryRow {
    std::string method;
    std::size_t N = 0;
    double mean_fp = 0.0, sd_fp = 0.0;
    double mean_fn = 0.0, sd_fn = 0.0;
    double mean_tp = 0.0, sd_tp = 0.0;
};

struct SweepTable {
    std::vector<MetricsRow> metrics;
    std::vector<FrequencyRow> frequencies;
    std::vector<PiRow> pi;
    /// Fraction of subsamples whose union support contains S, per wmcsub row.
    std::vector<double> nested_fraction;

    std::vector<SummaryRow> summary() const;
    void append(const SweepTable& other);
};

/// Per (method, N, replication): FP/FN/TP; per (method, N, j): the fraction
/// of replications that selected j.
SweepTable run_scenario_sweep(const Scenario& scenario, std::span<const std::size_t> sizes,
                              std::span<const MethodSpec> methods, const SweepConfig& config);

void write_metrics_csv(const SweepTable& table, const std::string& path);
void write_selection_freq_csv(const SweepTable& table, const std::string& path);
void write_pi_csv(const SweepTable& table, const std::string& path);
void write_summary_csv(const SweepTable& table, const std::string& path);

struct BenchProtocol {
    std::string name;
    Scenario scenario;
    std::vector<std::size_t> sizes;
    std::vector<MethodSpec> methods;
    SweepConfig sweep;
};

/// Simulation protocols "1a", "1b", "1c", "1d", "2" and "3" (the latter has
/// four settings). Throws InvalidArgument for other names.
std::vector<BenchProtocol> example_protocols(const std::string& name);

/// Scenario preset for the same names (first setting for "3").
Scenario example_scenario(const std::string& name);

}  // namespace csubag
