#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "iovpr/rng.hpp"

using namespace iovpr;

// Frozen values come from tests/oracles/reference_values.py, an independent
// Python implementation of mt19937_64 and the seed derivation.
TEST_CASE("engine is the standard mt19937_64") {
    Rng rng(5489);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) {
        x = rng.next_u64();
    }
    CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("derive_seed reference values") {
    CHECK(derive_seed(0, "mining") == 191645431496682234ULL);
    CHECK(derive_seed(42, "mining") == 13630604017408952562ULL);
    CHECK(derive_seed(std::uint64_t{7}, std::uint64_t{3}) == 1769619689948346377ULL);
    CHECK(derive_seed(0, "mining") != derive_seed(0, "training"));
    CHECK(derive_seed(std::uint64_t{1}, std::uint64_t{0}) != derive_seed(std::uint64_t{1}, std::uint64_t{1}));
}

TEST_CASE("uniform uses the top 53 bits") {
    Rng a(17), b(17);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u == static_cast<double>(b.next_u64() >> 11) / 9007199254740992.0);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("below stays in range and covers every value") {
    Rng rng(3);
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < 7000; ++i) {
        const auto v = rng.below(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    CHECK(counts.size() == 7);
    for (auto [v, n] : counts) {
        CHECK(n > 800);
        CHECK(n < 1200);
    }
    CHECK(rng.below(1) == 0);
}

TEST_CASE("normal has roughly zero mean and unit variance") {
    Rng rng(8);
    double s = 0, s2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.03);
    CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("sample draws without replacement") {
    Rng rng(21);
    std::vector<int> items(50);
    for (int i = 0; i < 50; ++i) {
        items[i] = i;
    }
    const auto s = rng.sample(items, 20);
    CHECK(s.size() == 20);
    CHECK(std::set<int>(s.begin(), s.end()).size() == 20);
    const auto all = rng.sample(items, 80);
    CHECK(std::set<int>(all.begin(), all.end()).size() == 50);

    // A longer draw with the same stream starts with the shorter one.
    Rng r1(4), r2(4);
    const auto short_draw = r1.sample(items, 10);
    const auto long_draw = r2.sample(items, 30);
    CHECK(std::equal(short_draw.begin(), short_draw.end(), long_draw.begin()));
}
