#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "csubag/aggregate.hpp"
#include "csubag/baselines.hpp"
#include "csubag/model.hpp"
#include "csubag/synth.hpp"

namespace csubag {

/// Raw columns as read from disk, before normalization.
struct RawData {
    Vector y;
    Matrix x;
};

/// CSV with header `y,x1,...,xp`, one observation per row.
RawData read_raw_csv(const std::string& path);
Dataset read_dataset_csv(const std::string& path, std::optional<GroundTruth> truth = std::nullopt);
void write_dataset_csv(const std::string& path, const Vector& y, const Matrix& x);

/// {"beta_star": [...], "support": [1-based], "sigma": x}
std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const std::string& text);

/// {"lambda", "tau", "pi", "selected" (1-based), "beta"}
std::string selection_to_json(const SelectionResult& result);
/// Rows `j,pi_j,selected,beta_j` with 1-based j.
void write_selection_csv(const std::string& path, const SelectionResult& result);

std::string lasso_to_json(const LassoFit& fit);
std::string subagging_to_json(const SubaggingResult& result, const PartitionPlan& plan);

/// key = value text, optionally inside [sections]; keys are RunConfig field
/// names. Unknown keys are rejected with Parse.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

/// Same format with Scenario field names (n, p, rho, signal, s, sigma,
/// replications, seed).
Scenario parse_scenario(const std::string& text, Scenario base = {});
Scenario load_scenario(const std::string& path, Scenario base = {});

/// "1,4,7-9" (1-based, inclusive ranges) -> 0-based index set.
IndexSet parse_index_list(const std::string& text);
/// "i..j" (1-based, inclusive) -> [i-1, j).
std::pair<std::size_t, std::size_t> parse_row_range(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace csubag
