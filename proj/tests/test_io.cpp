#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "logifit/io.hpp"
#include "logifit/rng.hpp"
#include "logifit/trajectory.hpp"

using namespace logifit;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::filesystem::path scratch() {
    auto dir = std::filesystem::current_path() / "io_scratch";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string put(const std::string& name, const std::string& content) {
    auto path = scratch() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    return path.string();
}

} // namespace

TEST_CASE("csv fields are split and trimmed", "[io]") {
    using detail::split_csv_line;
    CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_csv_line(" a , b\t, c\r") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(split_csv_line("a,b,") == std::vector<std::string>{"a", "b", ""});
    CHECK(split_csv_line("one") == std::vector<std::string>{"one"});
}

TEST_CASE("doubles survive a text round trip", "[io]") {
    RngStream rng(701, 0);
    for (int i = 0; i < 200; ++i) {
        double x = (rng.uniform() - 0.5) * std::pow(10.0, -30.0 + 60.0 * rng.uniform());
        CHECK(std::strtod(detail::format_double(x).c_str(), nullptr) == x);
    }
    CHECK(detail::format_double(0.5) == "0.5");
    CHECK(detail::format_double(-3.0) == "-3");
}

TEST_CASE("missing files are reported by name", "[io]") {
    CHECK_THROWS_WITH(read_file("/nonexistent/path/x.csv"),
                      ContainsSubstring("cannot open file: /nonexistent/path/x.csv"));
}

TEST_CASE("digests match the reference vectors", "[io]") {
    CHECK(fnv1a_digest("") == "cbf29ce484222325");
    CHECK(fnv1a_digest("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_digest("foobar") == "85944171f73967e8");
    CHECK(fnv1a_digest("ab") != fnv1a_digest("ba"));

    std::string path = put("digest.txt", "foobar");
    CHECK(digest_file(path) == "85944171f73967e8");
}

TEST_CASE("trajectories are written with a time column", "[io]") {
    Trajectory traj;
    traj.names = {"A", "B"};
    traj.times = {0.0, 0.5, 1.25};
    traj.values = {1.0, 2.0, 3.0, 4.0, 5.5, 6.5};
    traj.horizon = 2.0;
    auto path = (scratch() / "traj.csv").string();
    write_trajectory_csv(path, traj);

    std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,A,B");
    REQUIRE(std::getline(in, line));
    CHECK(line == "0,1,2");
    REQUIRE(std::getline(in, line));
    CHECK(line == "0.5,3,4");
    REQUIRE(std::getline(in, line));
    CHECK(line == "1.25,5.5,6.5");
    CHECK(!std::getline(in, line));

    CHECK_THROWS_WITH(write_trajectory_csv("/nonexistent/dir/t.csv", traj),
                      ContainsSubstring("cannot write file"));
}

TEST_CASE("observation matrices round trip", "[io]") {
    DesignMatrix data;
    data.names = {"phi1", "phi2"};
    data.rows = {0, 1, 2, 3, 2};
    auto path = (scratch() / "obs.csv").string();
    write_observations_csv(path, data);

    DesignMatrix back = read_observations_csv(path);
    CHECK(back.names == data.names);
    CHECK(back.rows == data.rows);

    // Row encoding: first formula is the leading bit.
    std::string content = read_file(path);
    CHECK(content == "phi1,phi2\n0,0\n0,1\n1,0\n1,1\n1,0\n");
}

TEST_CASE("malformed observation files are rejected with positions", "[io]") {
    CHECK_THROWS_WITH(read_observations_csv(put("obs_empty.csv", "")),
                      ContainsSubstring("empty observation file"));
    CHECK_THROWS_WITH(read_observations_csv(put("obs_headonly.csv", "phi1,phi2\n")),
                      ContainsSubstring("no data rows"));
    CHECK_THROWS_WITH(read_observations_csv(put("obs_bad.csv", "phi1\n0\n2\n")),
                      ContainsSubstring(":3: observation entries must be 0 or 1, found '2'"));
    CHECK_THROWS_WITH(read_observations_csv(put("obs_short.csv", "phi1,phi2\n0\n")),
                      ContainsSubstring(":2: expected 2 fields, found 1"));
    CHECK_THROWS_WITH(read_observations_csv(put("obs_noname.csv", ",phi2\n0,1\n")),
                      ContainsSubstring("empty formula name in header"));

    std::string wide;
    for (int i = 0; i < 21; ++i) wide += (i ? ",f" : "f") + std::to_string(i);
    CHECK_THROWS_WITH(read_observations_csv(put("obs_wide.csv", wide + "\n")),
                      ContainsSubstring("too many formula columns"));

    // Blank lines and trailing carriage returns are tolerated.
    DesignMatrix ok = read_observations_csv(put("obs_crlf.csv", "phi1\r\n\r\n1\r\n0\r\n"));
    CHECK(ok.rows == std::vector<std::uint32_t>{1, 0});
}

TEST_CASE("target distributions round trip", "[io]") {
    std::vector<double> target{0.125, 0.25, 0.375, 0.25};
    auto path = (scratch() / "target.csv").string();
    write_target_csv(path, target, 2);
    CHECK(read_file(path) == "00,0.125\n01,0.25\n10,0.375\n11,0.25\n");

    std::vector<double> back = read_target_csv(path, 2);
    REQUIRE(back.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) CHECK_THAT(back[j], WithinAbs(target[j], 1e-15));

    // Comments and row order do not matter.
    std::vector<double> shuffled = read_target_csv(
        put("target_ok.csv", "# joint target\n11,0.25\n00,0.125\n10,0.375\n01,0.25\n"), 2);
    CHECK(shuffled == back);
}

TEST_CASE("malformed target files are rejected", "[io]") {
    CHECK_THROWS_WITH(read_target_csv(put("tgt_missing.csv", "00,0.5\n01,0.25\n10,0.25\n"), 2),
                      ContainsSubstring("missing outcome '11'"));
    CHECK_THROWS_WITH(read_target_csv(put("tgt_dup.csv", "00,0.5\n00,0.5\n01,0\n10,0\n11,0\n"), 2),
                      ContainsSubstring("duplicate outcome '00'"));
    CHECK_THROWS_WITH(read_target_csv(put("tgt_len.csv", "000,0.5\n"), 2),
                      ContainsSubstring("does not have 2 bits"));
    CHECK_THROWS_WITH(read_target_csv(put("tgt_chars.csv", "0x,0.5\n"), 2),
                      ContainsSubstring("character other than 0/1"));
    CHECK_THROWS_WITH(read_target_csv(put("tgt_prob.csv", "0,half\n1,0.5\n"), 1),
                      ContainsSubstring("bad probability 'half'"));
    CHECK_THROWS_WITH(read_target_csv(put("tgt_fields.csv", "00,0.5,extra\n"), 2),
                      ContainsSubstring("expected 'bitstring,probability'"));
    CHECK_THROWS_WITH(read_target_csv(put("tgt_neg.csv", "0,-0.2\n1,1.2\n"), 1),
                      ContainsSubstring("negative probability '-0.2'"));
    CHECK_THROWS_WITH(read_target_csv(put("tgt_sum.csv", "0,0.6\n1,0.6\n"), 1),
                      ContainsSubstring("sum to"));
    CHECK_THROWS_AS(read_target_csv("irrelevant.csv", 0), ValidationError);
    CHECK_THROWS_AS(read_target_csv("irrelevant.csv", 21), ValidationError);
}
