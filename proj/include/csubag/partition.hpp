#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "csubag/model.hpp"

namespace csubag {

/// Shuffles 0..n-1 and cuts d = b*m consecutive blocks of size N.
PartitionPlan make_partition(std::size_t n, std::size_t subsample_size, std::size_t b,
                             std::size_t m, std::uint64_t seed);

/// Subset ids (0-based, plan order) of contrast group q in [0, b): the m
/// consecutive subsets q*m .. q*m + m - 1.
std::vector<std::size_t> group(const PartitionPlan& plan, std::size_t q);

/// Uniform random subset of size `size` from the indices outside subset i.
/// Unused leftover indices are taken first so calibration rows stay disjoint
/// from every fitted subset whenever possible.
IndexSet complement_block(const PartitionPlan& plan, std::size_t i, std::size_t size,
                          std::uint64_t seed);

/// JSON with 1-based subset indices.
std::string plan_to_json(const PartitionPlan& plan);
PartitionPlan plan_from_json(const std::string& text);

}  // namespace csubag
