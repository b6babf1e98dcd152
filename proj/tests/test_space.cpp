#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "logifit.hpp"

using namespace logifit;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ParameterSpace rumour_like() {
    ParameterSpace s;
    s.axes = {{"ks", 0.1, 10.0, Scale::Log}, {"kr", 0.08, 8.0, Scale::Log}};
    return s;
}

} // namespace

TEST_CASE("normalize and denormalize are mutually inverse", "[space]") {
    ParameterSpace s = rumour_like();
    s.axes.push_back({"off", -3.0, 5.0, Scale::Linear});
    s.validate();

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> u = {unit(rng), unit(rng), unit(rng)};
        std::vector<double> theta = s.denormalize(u);
        std::vector<double> back = s.normalize(theta);
        for (std::size_t k = 0; k < u.size(); ++k) {
            REQUIRE_THAT(back[k], WithinAbs(u[k], 1e-10));
            REQUIRE(theta[k] >= s.axes[k].lower);
            REQUIRE(theta[k] <= s.axes[k].upper);
        }
        std::vector<double> again = s.denormalize(back);
        for (std::size_t k = 0; k < u.size(); ++k)
            REQUIRE_THAT(again[k], WithinRel(theta[k], 1e-10));
    }
}

TEST_CASE("box corners map to unit corners", "[space]") {
    ParameterSpace s = rumour_like();
    auto lo = s.normalize({0.1, 0.08});
    auto hi = s.normalize({10.0, 8.0});
    CHECK_THAT(lo[0], WithinAbs(-1.0, 1e-12));
    CHECK_THAT(lo[1], WithinAbs(-1.0, 1e-12));
    CHECK_THAT(hi[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(hi[1], WithinAbs(1.0, 1e-12));
    // Log midpoint of the unit box is the geometric mean.
    auto mid = s.denormalize({0.0, 0.0});
    CHECK_THAT(mid[0], WithinRel(1.0, 1e-12));
    CHECK_THAT(mid[1], WithinRel(0.8, 1e-12));
}

TEST_CASE("denormalize clamps roundoff back into the box", "[space]") {
    ParameterSpace s = rumour_like();
    auto t = s.denormalize({1.0 + 1e-12, -1.0 - 1e-12});
    CHECK(t[0] <= 10.0);
    CHECK(t[1] >= 0.08);
}

TEST_CASE("validation rejects malformed spaces", "[space]") {
    ParameterSpace inverted;
    inverted.axes = {{"x", 5.0, 2.0, Scale::Linear}};
    CHECK_THROWS_WITH(inverted.validate(), ContainsSubstring("not increasing"));

    ParameterSpace bad_log;
    bad_log.axes = {{"x", 0.0, 1.0, Scale::Log}};
    CHECK_THROWS_WITH(bad_log.validate(),
                      ContainsSubstring("log scale requires strictly positive bounds"));

    ParameterSpace both;
    both.axes = {{"x", 0.1, 1.0, Scale::Log}};
    both.fixed["x"] = 0.5;
    CHECK_THROWS_WITH(both.validate(), ContainsSubstring("both free and fixed"));
}

TEST_CASE("normalize rejects out-of-range and mis-sized input", "[space]") {
    ParameterSpace s = rumour_like();
    CHECK_THROWS_AS(s.normalize({0.05, 1.0}), ValidationError);
    CHECK_THROWS_AS(s.normalize({1.0}), ValidationError);
    CHECK_THROWS_AS(s.denormalize({0.0}), ValidationError);
}

TEST_CASE("jacobian matches finite differences of denormalize", "[space]") {
    ParameterSpace s = rumour_like();
    s.axes.push_back({"off", -3.0, 5.0, Scale::Linear});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(-0.9, 0.9);
    const double h = 1e-6;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> u = {unit(rng), unit(rng), unit(rng)};
        std::vector<double> theta = s.denormalize(u);
        for (std::size_t k = 0; k < 3; ++k) {
            auto up = u, dn = u;
            up[k] += h;
            dn[k] -= h;
            double fd = (s.denormalize(up)[k] - s.denormalize(dn)[k]) / (2 * h);
            REQUIRE_THAT(s.jacobian(k, theta[k]), WithinRel(fd, 1e-6));
        }
    }
}

TEST_CASE("bind merges free values over the fixed block", "[space]") {
    ParameterSpace s = rumour_like();
    s.fixed = {{"N", 100.0}, {"kavg", 20.0}};
    auto env = s.bind({1.0, 0.8});
    CHECK(env.size() == 4);
    CHECK(env.at("ks") == 1.0);
    CHECK(env.at("kr") == 0.8);
    CHECK(env.at("N") == 100.0);
    CHECK(env.at("kavg") == 20.0);
}
