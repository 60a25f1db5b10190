#include "csubag/partition.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "csubag/rng.hpp"

namespace csubag {

PartitionPlan make_partition(std::size_t n, std::size_t subsample_size, std::size_t b,
                             std::size_t m, std::uint64_t seed) {
    if (subsample_size < 1 || b < 1 || m < 1) {
        throw Error(ErrorCode::InvalidArgument, "partition needs N >= 1, b >= 1, m >= 1");
    }
    const std::size_t d = b * m;
    if (d * subsample_size > n) {
        throw Error(ErrorCode::InsufficientSamples,
                    "b*m*N = " + std::to_string(d * subsample_size) + " exceeds n = " +
                        std::to_string(n));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    PartitionPlan plan;
    plan.b = b;
    plan.m = m;
    plan.n = n;
    plan.subsample_size = subsample_size;
    plan.seed = seed;
    plan.subsets.reserve(d);
    auto it = perm.begin();
    for (std::size_t i = 0; i < d; ++i, it += static_cast<std::ptrdiff_t>(subsample_size)) {
        plan.subsets.push_back(
            make_index_set({it, it + static_cast<std::ptrdiff_t>(subsample_size)}));
    }
    plan.leftover.assign(it, perm.end());
    return plan;
}

std::vector<std::size_t> group(const PartitionPlan& plan, std::size_t q) {
    if (q >= plan.b) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "group " + std::to_string(q + 1) + " outside 1.." + std::to_string(plan.b));
    }
    std::vector<std::size_t> ids(plan.m);
    std::iota(ids.begin(), ids.end(), q * plan.m);
    return ids;
}

IndexSet complement_block(const PartitionPlan& plan, std::size_t i, std::size_t size,
                          std::uint64_t seed) {
    if (i >= plan.d()) throw Error(ErrorCode::IndexOutOfRange, "subset index out of range");
    const std::size_t available = plan.n - plan.subsets[i].size();
    if (size > available) {
        throw Error(ErrorCode::InsufficientSamples,
                    "calibration block of " + std::to_string(size) + " exceeds the " +
                        std::to_string(available) + " rows outside the subset");
    }
    Rng rng(seed);
    std::vector<std::size_t> pool = plan.leftover;
    std::shuffle(pool.begin(), pool.end(), rng);
    if (pool.size() >= size) {
        pool.resize(size);
        return make_index_set(std::move(pool));
    }
    // leftover exhausted: top up with rows of the other subsets
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < plan.d(); ++k) {
        if (k != i) others.insert(others.end(), plan.subsets[k].begin(), plan.subsets[k].end());
    }
    std::shuffle(others.begin(), others.end(), rng);
    others.resize(size - pool.size());
    pool.insert(pool.end(), others.begin(), others.end());
    return make_index_set(std::move(pool));
}

std::string plan_to_json(const PartitionPlan& plan) {
    nlohmann::json j;
    j["n"] = plan.n;
    j["N"] = plan.subsample_size;
    j["b"] = plan.b;
    j["m"] = plan.m;
    j["seed"] = plan.seed;
    auto subsets = nlohmann::json::array();
    for (const auto& s : plan.subsets) {
        auto arr = nlohmann::json::array();
        for (auto idx : s) arr.push_back(idx + 1);
        subsets.push_back(std::move(arr));
    }
    j["subsets"] = std::move(subsets);
    return j.dump();
}

PartitionPlan plan_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
    PartitionPlan plan;
    try {
        plan.n = j.at("n").get<std::size_t>();
        plan.subsample_size = j.at("N").get<std::size_t>();
        plan.b = j.at("b").get<std::size_t>();
        plan.m = j.at("m").get<std::size_t>();
        plan.seed = j.at("seed").get<std::uint64_t>();
        std::vector<char> used(plan.n, 0);
        for (const auto& arr : j.at("subsets")) {
            IndexSet s;
            for (const auto& v : arr) {
                const auto idx = v.get<std::size_t>();
                if (idx < 1 || idx > plan.n || used[idx - 1]) {
                    throw Error(ErrorCode::Parse, "subset index invalid or repeated");
                }
                used[idx - 1] = 1;
                s.push_back(idx - 1);
            }
            plan.subsets.push_back(make_index_set(std::move(s)));
        }
        for (std::size_t k = 0; k < plan.n; ++k) {
            if (!used[k]) plan.leftover.push_back(k);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
    if (plan.subsets.size() != plan.b * plan.m) {
        throw Error(ErrorCode::BadGrouping, "plan has " + std::to_string(plan.subsets.size()) +
                                                " subsets, expected b*m");
    }
    return plan;
}

}  // namespace csubag
