#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "tanglefl/rng.hpp"

using namespace tanglefl;

TEST_CASE("rng: identical (seed, stream) pairs replay the same sequence") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: distinct streams of one seed diverge") {
    RngStream a(42, 0), b(42, 1);
    int equal = 0;
    for (int i = 0; i < 64; ++i) equal += a.next_u64() == b.next_u64();
    CHECK(equal < 4);
}

TEST_CASE("rng: distinct seeds diverge on the same stream") {
    RngStream a(1, 5), b(2, 5);
    int equal = 0;
    for (int i = 0; i < 64; ++i) equal += a.next_u64() == b.next_u64();
    CHECK(equal < 4);
}

TEST_CASE("rng: uniform01 stays in [0,1) with a sane mean") {
    RngStream r(123, 0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("rng: uniform_below covers the range without bias artifacts") {
    RngStream r(9, 3);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t v = r.uniform_below(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (const int c : counts) CHECK(std::abs(c - n / 7) < 600);
    CHECK(r.uniform_below(1) == 0);
}

TEST_CASE("rng: normal has standard moments") {
    RngStream r(77, 0);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("rng: weighted_choice tracks the weights") {
    RngStream r(5, 1);
    const std::vector<double> weights = {1.0, 3.0, 6.0};
    std::vector<int> counts(3, 0);
    const int n = 50000;
    for (int i = 0; i < n; ++i) ++counts[r.weighted_choice(weights)];
    CHECK(std::abs(counts[0] - 5000) < 400);
    CHECK(std::abs(counts[1] - 15000) < 700);
    CHECK(std::abs(counts[2] - 30000) < 800);
}

TEST_CASE("rng: weighted_choice never picks a zero weight") {
    RngStream r(5, 2);
    const std::vector<double> weights = {0.0, 1.0, 0.0};
    for (int i = 0; i < 2000; ++i) CHECK(r.weighted_choice(weights) == 1);
}

TEST_CASE("rng: shuffle permutes and is seed-stable") {
    RngStream a(11, 0), b(11, 0);
    std::vector<int> va(20), vb(20);
    std::iota(va.begin(), va.end(), 0);
    std::iota(vb.begin(), vb.end(), 0);
    a.shuffle(va);
    b.shuffle(vb);
    CHECK(va == vb);

    std::vector<int> sorted = va;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(20);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(sorted == expect);
}

TEST_CASE("rng: sample_without_replacement yields k sorted distinct values") {
    RngStream r(31, 4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto picks = r.sample_without_replacement(30, 10);
        REQUIRE(picks.size() == 10);
        CHECK(std::is_sorted(picks.begin(), picks.end()));
        const std::set<std::uint64_t> unique(picks.begin(), picks.end());
        CHECK(unique.size() == 10);
        CHECK(*picks.rbegin() < 30);
    }
    const auto all = r.sample_without_replacement(8, 8);
    std::vector<std::uint64_t> expect(8);
    std::iota(expect.begin(), expect.end(), 0u);
    CHECK(all == expect);
}

TEST_CASE("rng: sample_without_replacement visits every subset eventually") {
    RngStream r(2, 9);
    std::vector<int> seen(6, 0);
    for (int i = 0; i < 3000; ++i) {
        for (const auto v : r.sample_without_replacement(6, 2)) ++seen[v];
    }
    for (const int c : seen) CHECK(c > 700); // each index expected 1000 times
}
