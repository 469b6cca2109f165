#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "wavestab/config.hpp"
#include "wavestab/errors.hpp"
#include "wavestab/serialize.hpp"

using namespace wavestab;
using nlohmann::json;

TEST_CASE("default config validates and round-trips") {
    const RunConfig c;
    c.validate();
    const json j = to_json(c);
    CHECK(to_json(config_from_json(j)) == j);
}

TEST_CASE("config rules") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"grid": {"M": 100}})")).validate(), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"grid": {"L": 30}})")).validate(), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"newton": {"tol": -1}})")).validate(), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"target": {"alpha": 0.9}})")).validate(), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"colour": 1})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"grid": {"M": "many"}})")), ConfigError);
    const RunConfig c = config_from_json(json::parse(R"({"grid": {"M": 8192}, "workers": 3})"));
    CHECK(c.grid.M == 8192);
    CHECK(c.grid.L == 120.0);
    CHECK(c.growth.workers == 3);
}

TEST_CASE("fmt17 round-trips doubles") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.7824})
        CHECK(std::strtod(fmt17(x).c_str(), nullptr) == x);
}

TEST_CASE("branch JSON and CSV") {
    const Spectral sp(GridSpec{60.0, 1024, 1.0, 1.0});
    const WaveState start = initial_wave(sp, 1.05, fixtures::loose());
    ContinuationTarget t;
    t.alpha = 0.25;
    BranchRecord b = continue_branch(start, t, {}, fixtures::loose());
    if (!b.derivatives_ready) branch_derivatives_and_extrema(b);

    const json j = branch_to_json(b);
    const BranchRecord back = branch_from_json(json::parse(j.dump()));
    REQUIRE(back.points.size() == b.points.size());
    for (size_t i = 0; i < b.points.size(); ++i) {
        CHECK((back.points[i].wave.w - b.points[i].wave.w).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(back.points[i].wave.lambda_p == b.points[i].wave.lambda_p);
        CHECK(back.points[i].obs.E == b.points[i].obs.E);
    }
    const json again = branch_to_json(back);
    CHECK(again["speed_maxima"] == j["speed_maxima"]);
    CHECK(again["energy_maxima"] == j["energy_maxima"]);

    std::ostringstream os;
    write_branch_csv(os, b);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# wavestab branch.csv v", 0) == 0);
    std::getline(in, line);
    CHECK(std::count(line.begin(), line.end(), ',') + 1 == static_cast<long>(branch_csv_columns().size()));
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') + 1 == static_cast<long>(branch_csv_columns().size()));
        ++rows;
    }
    CHECK(rows == static_cast<int>(b.points.size()));
}

TEST_CASE("malformed branch JSON is a config error") {
    CHECK_THROWS_AS(branch_from_json(json::parse(R"({"points": 3})")), ConfigError);
    CHECK_THROWS_AS(branch_from_json(json::parse("[]")), ConfigError);
}
