#include <doctest.h>

#include <map>
#include <set>

#include "csubag/partition.hpp"

using namespace csubag;

namespace {

void check_disjoint(const PartitionPlan& plan) {
    std::set<std::size_t> seen;
    for (const auto& s : plan.subsets) {
        CHECK(s.size() == plan.subsample_size);
        for (auto i : s) {
            CHECK(i < plan.n);
            CHECK(seen.insert(i).second);
        }
    }
    for (auto i : plan.leftover) CHECK(seen.insert(i).second);
    CHECK(seen.size() == plan.n);
}

}  // namespace

TEST_CASE("three disjoint pairs out of ten") {
    const auto plan = make_partition(10, 2, 1, 3, 7);
    CHECK(plan.d() == 3);
    CHECK(plan.leftover.size() == 4);
    check_disjoint(plan);
}

TEST_CASE("too few samples") {
    try {
        make_partition(4, 2, 2, 2, 1);
        FAIL("expected InsufficientSamples");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientSamples);
    }
    CHECK_THROWS_AS(make_partition(10, 0, 1, 1, 1), Error);
}

TEST_CASE("plans are deterministic in the seed") {
    const auto a = make_partition(100, 7, 3, 2, 11);
    const auto b = make_partition(100, 7, 3, 2, 11);
    CHECK(a.subsets == b.subsets);
    CHECK(a.leftover == b.leftover);
    const auto c = make_partition(100, 7, 3, 2, 12);
    CHECK(a.subsets != c.subsets);
}

TEST_CASE("disjointness across many seeds") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) check_disjoint(make_partition(53, 4, 3, 4, seed));
}

TEST_CASE("ordered pairs are uniform") {
    // n = 6, N = 1, d = 2: each of the 30 ordered pairs has probability 1/30
    const int trials = 10000;
    std::map<std::pair<std::size_t, std::size_t>, int> counts;
    for (int s = 0; s < trials; ++s) {
        const auto plan = make_partition(6, 1, 2, 1, static_cast<std::uint64_t>(s));
        ++counts[{plan.subsets[0][0], plan.subsets[1][0]}];
    }
    CHECK(counts.size() == 30);
    const double p = 1.0 / 30.0;
    const double se = std::sqrt(p * (1 - p) / trials);
    for (const auto& [pair, c] : counts) {
        CHECK(std::abs(static_cast<double>(c) / trials - p) < 5 * se);
    }
}

TEST_CASE("group ids") {
    const auto plan = make_partition(40, 2, 4, 2, 1);
    // 1-based groups q = 1 and q = 3 hold sets {1, 2} and {5, 6}
    CHECK(group(plan, 0) == std::vector<std::size_t>{0, 1});
    CHECK(group(plan, 2) == std::vector<std::size_t>{4, 5});
    CHECK_THROWS_AS(group(plan, 4), Error);

    const auto single = make_partition(40, 2, 5, 1, 1);
    for (std::size_t q = 0; q < 5; ++q) CHECK(group(single, q) == std::vector<std::size_t>{q});
}

TEST_CASE("complement_block") {
    const auto plan = make_partition(30, 5, 2, 2, 3);
    SUBCASE("full complement") {
        const auto c = complement_block(plan, 1, 25, 9);
        CHECK(c.size() == 25);
        for (auto i : plan.subsets[1]) CHECK(!std::binary_search(c.begin(), c.end(), i));
    }
    SUBCASE("empty") { CHECK(complement_block(plan, 0, 0, 9).empty()); }
    SUBCASE("leftover first") {
        const auto c = complement_block(plan, 0, plan.leftover.size(), 4);
        std::vector<std::size_t> left = plan.leftover;
        std::sort(left.begin(), left.end());
        CHECK(c == left);
    }
    SUBCASE("random draws avoid the subset") {
        for (std::uint64_t s = 0; s < 50; ++s) {
            const auto c = complement_block(plan, 2, 17, s);
            CHECK(c.size() == 17);
            for (auto i : plan.subsets[2]) CHECK(!std::binary_search(c.begin(), c.end(), i));
        }
    }
    SUBCASE("too large") { CHECK_THROWS_AS(complement_block(plan, 0, 26, 1), Error); }
}

TEST_CASE("plan JSON round trip with 1-based indices") {
    const auto plan = make_partition(20, 3, 2, 1, 5);
    const std::string text = plan_to_json(plan);
    CHECK(text.find("\"subsets\"") != std::string::npos);
    const auto back = plan_from_json(text);
    CHECK(back.subsets == plan.subsets);
    CHECK(back.n == 20);
    CHECK(back.b == 2);
    CHECK(back.leftover.size() == plan.leftover.size());
    CHECK_THROWS_AS(plan_from_json("{\"n\": 3, \"N\": 1, \"b\": 1, \"m\": 1, \"seed\": 0, \"subsets\": [[0]]}"),
                    Error);
    CHECK_THROWS_AS(plan_from_json("not json"), Error);
}
