#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "logifit/errors.hpp"
#include "logifit/lhs.hpp"

using namespace logifit;

namespace {

std::size_t bin_of(double x, std::size_t k) {
    auto b = static_cast<std::size_t>((x + 1.0) / 2.0 * static_cast<double>(k));
    return b >= k ? k - 1 : b;
}

/// One point per axis bin, all coordinates inside [-1, 1).
void check_latin(const std::vector<Eigen::VectorXd>& pts, std::size_t k, std::size_t d) {
    REQUIRE(pts.size() == k);
    for (std::size_t a = 0; a < d; ++a) {
        std::vector<int> hits(k, 0);
        for (const auto& p : pts) {
            REQUIRE(static_cast<std::size_t>(p.size()) == d);
            REQUIRE(p(a) >= -1.0);
            REQUIRE(p(a) < 1.0);
            hits[bin_of(p(a), k)]++;
        }
        for (std::size_t b = 0; b < k; ++b) CHECK(hits[b] == 1);
    }
}

std::size_t largest_block_count(std::size_t k, std::size_t d) {
    std::size_t s = 0;
    for (std::size_t cand = 2;; ++cand) {
        std::size_t cells = 1;
        bool over = false;
        for (std::size_t a = 0; a < d; ++a) {
            if (cells > k / cand) { over = true; break; }
            cells *= cand;
        }
        if (over || cells > k) break;
        if (k % cells == 0) s = cand;
    }
    return s;
}

/// Every s^d subcube holds exactly k/s^d points.
void check_blocks(const std::vector<Eigen::VectorXd>& pts, std::size_t k, std::size_t d,
                  std::size_t s) {
    std::map<std::vector<std::size_t>, std::size_t> counts;
    for (const auto& p : pts) {
        std::vector<std::size_t> cell(d);
        for (std::size_t a = 0; a < d; ++a) cell[a] = bin_of(p(a), s);
        counts[cell]++;
    }
    std::size_t cells = 1;
    for (std::size_t a = 0; a < d; ++a) cells *= s;
    REQUIRE(counts.size() == cells);
    for (const auto& [cell, n] : counts) CHECK(n == k / cells);
}

} // namespace

TEST_CASE("latin hypercube covers every axis bin once", "[lhs]") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        check_latin(lhs(16, 3, seed), 16, 3);
        check_latin(lhs(5, 1, seed), 5, 1);
    }
}

TEST_CASE("single point designs stay inside the cube", "[lhs]") {
    auto p = lhs(1, 4, 9);
    REQUIRE(p.size() == 1);
    for (int a = 0; a < 4; ++a) {
        CHECK(p[0](a) >= -1.0);
        CHECK(p[0](a) < 1.0);
    }
}

TEST_CASE("orthogonal design fills every subcube evenly", "[lhs]") {
    struct Combo {
        std::size_t k, d, s;
    };
    for (Combo c : {Combo{48, 2, 4}, Combo{16, 2, 4}, Combo{27, 3, 3}, Combo{8, 3, 2},
                    Combo{12, 2, 2}, Combo{100, 2, 10}, Combo{6, 1, 6}}) {
        REQUIRE(largest_block_count(c.k, c.d) == c.s);
        std::vector<std::string> warnings;
        auto pts = orthogonal_lhs(c.k, c.d, 17, &warnings);
        CHECK(warnings.empty());
        check_latin(pts, c.k, c.d);
        check_blocks(pts, c.k, c.d, c.s);
    }
}

TEST_CASE("coarser blockings inherit the balance", "[lhs]") {
    // s = 4 on 48 points in 2 dimensions puts 12 in each quadrant.
    auto pts = orthogonal_lhs(48, 2, 23);
    check_blocks(pts, 48, 2, 2);
    check_blocks(pts, 48, 2, 4);
}

TEST_CASE("sizes without a block factor fall back to plain latin", "[lhs]") {
    std::vector<std::string> warnings;
    auto pts = orthogonal_lhs(7, 2, 5, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("falling back to plain latin hypercube") != std::string::npos);
    check_latin(pts, 7, 2);

    warnings.clear();
    auto one = orthogonal_lhs(1, 2, 5, &warnings);
    REQUIRE(one.size() == 1);
    CHECK(warnings.size() == 1);

    // A null warning sink is allowed.
    CHECK_NOTHROW(orthogonal_lhs(7, 2, 5));
}

TEST_CASE("designs are reproducible by seed", "[lhs]") {
    auto a = orthogonal_lhs(48, 2, 31);
    auto b = orthogonal_lhs(48, 2, 31);
    auto c = orthogonal_lhs(48, 2, 32);
    REQUIRE(a.size() == b.size());
    bool all_equal = true, any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        all_equal = all_equal && a[i] == b[i];
        any_diff = any_diff || a[i] != c[i];
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("degenerate design requests are rejected", "[lhs]") {
    CHECK_THROWS_AS(lhs(0, 2, 1), ValidationError);
    CHECK_THROWS_AS(lhs(4, 0, 1), ValidationError);
    CHECK_THROWS_AS(orthogonal_lhs(0, 2, 1), ValidationError);
    CHECK_THROWS_AS(orthogonal_lhs(4, 0, 1), ValidationError);
}
