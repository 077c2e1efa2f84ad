#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>

#include <json.hpp>

#include "natclock/error.hpp"
#include "natclock/runner.hpp"

using namespace natclock;
using json = nlohmann::json;

namespace {

const OutputFile* find_file(const RunResult& r, const std::string& name) {
  for (const auto& f : r.files)
    if (f.name == name) return &f;
  return nullptr;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return Errc::io;
}

}  // namespace

TEST_SUITE("runner") {
  TEST_CASE("config json") {
    const auto c = config_from_json(
        R"({"process": "absbm", "r": [0.5, 1], "paths": 123, "seed": 9, "checks": "check_lower_EaT", "d": [1, 2]})");
    CHECK(c.processes == std::vector<std::string>{"absbm"});
    CHECK(c.levels == std::vector<double>{0.5, 1.0});
    CHECK(c.n_paths == 123);
    CHECK(c.seed == 9);
    CHECK(c.checks == std::vector<std::string>{"check_lower_EaT"});
    CHECK(c.d_list == std::vector<int>{1, 2});
    const auto back = config_from_json(config_to_json(c));
    CHECK(back.processes == c.processes);
    CHECK(back.levels == c.levels);
    CHECK(back.seed == c.seed);
    CHECK(code_of([] { config_from_json(R"({"proces": "absbm"})"); }) == Errc::config);
    CHECK(code_of([] { config_from_json(R"({"paths": -3})"); }) == Errc::config);
    CHECK(code_of([] { config_from_json("not json"); }) == Errc::config);
  }

  TEST_CASE("validation names the problem") {
    ExperimentConfig c;
    c.processes = {"absbm"};
    CHECK_NOTHROW(validate_config(c));
    c.checks = {"CHECK_LOWER_EAT"};
    CHECK_NOTHROW(validate_config(c));
    c.checks = {"check_everything"};
    CHECK(code_of([&] { validate_config(c); }) == Errc::config);
    c.checks.clear();
    c.processes = {"whirlpool(x=1)"};
    CHECK(code_of([&] { validate_config(c); }) == Errc::config);
    c.processes = {"absbm"};
    c.n_paths = 1;
    CHECK(code_of([&] { validate_config(c); }) == Errc::config);
    c.n_paths = 10;
    c.grid = "uniform:0:10";
    CHECK(code_of([&] { validate_config(c); }) == Errc::config);
  }

  TEST_CASE("zoo table lists every variant") {
    const auto t = zoo_table();
    const auto lines = std::count(t.begin(), t.end(), '\n');
    CHECK(lines == 1 + 10);
    CHECK(t.find("positivepartbm") != std::string::npos);
    CHECK(t.find("markov=false") != std::string::npos);
    CHECK(t.find("sharpness-witness") != std::string::npos);
  }

  TEST_CASE("estimate writes the curve csv") {
    ExperimentConfig c;
    c.processes = {"ramp(slope=1)"};
    c.grid = "uniform:1:5";
    c.n_paths = 10;
    const auto r = run_command("estimate", c);
    const auto* f = find_file(r, "envelope.csv");
    REQUIRE(f);
    CHECK(f->data == "t,a_hat,se,kappa_hat,eta_hat\n0,0,0,0,0\n0.25,0.25,0,0.25,0.25\n0.5,0.5,0,0.5,0.5\n"
                     "0.75,0.75,0,0.75,0.75\n1,1,0,1,1\n");
    CHECK(find_file(r, "manifest.json"));
  }

  TEST_CASE("hit writes one row per path") {
    ExperimentConfig c;
    c.processes = {"ramp"};
    c.grid = "uniform:1:5";
    c.n_paths = 3;
    c.levels = {0.5, 2.0};
    const auto r = run_command("hit", c);
    const auto* a = find_file(r, "hitting_r0.5.csv");
    const auto* b = find_file(r, "hitting_r2.csv");
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->data == "path_index,tau,censored\n0,0.5,0\n1,0.5,0\n2,0.5,0\n");
    CHECK(b->data == "path_index,tau,censored\n0,1,1\n1,1,1\n2,1,1\n");
  }

  TEST_CASE("bounds on the sharp indicator") {
    ExperimentConfig c;
    c.processes = {"sharpindicator(r=1)"};
    c.grid = "uniform:1:201";
    c.n_paths = 20000;
    c.checks = {"check_lower_EaT"};
    const auto r = run_command("bounds", c);
    REQUIRE(r.reports.size() == 1);
    // Equality case: tested two-sided at the witness level.
    CHECK(r.reports[0].relation == Relation::eq);
    CHECK(r.reports[0].verdict == Verdict::pass);
    CHECK(std::fabs(r.reports[0].margin) <= 4.0 * r.reports[0].rhs_se);
    CHECK_FALSE(r.any_fail());
    const auto m = json::parse(find_file(r, "manifest.json")->data);
    CHECK(m["reports"][0]["name"] == "check_lower_EaT");
    CHECK(m["reports"][0]["verdict"] == "PASS");
    CHECK(m["complete"] == true);
    CHECK(find_file(r, "summary.md")->data.find("| check_lower_EaT |") != std::string::npos);
  }

  TEST_CASE("report on the ramp") {
    ExperimentConfig c;
    c.processes = {"ramp"};
    c.n_paths = 200;
    c.checks = {"check_lower_EaT", "check_concave_lower_ET", "check_upper_EaT", "check_upper_ET", "check_sandwich",
                "stability_ratio", "check_eta_lower", "check_kappa_upper"};
    c.levels = {0.5, 1.0, 2.0};
    const auto r = run_command("report", c);
    CHECK_FALSE(r.reports.empty());
    for (const auto& rep : r.reports) {
      CAPTURE(rep.name);
      CHECK(rep.verdict == Verdict::pass);
      if (rep.name == "stability_ratio.upper") CHECK(rep.lhs == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  TEST_CASE("outputs do not depend on worker count") {
    ExperimentConfig c;
    c.processes = {"absbm", "besselmax3d(d=2)"};
    c.n_paths = 300;
    c.checks = {"check_lower_EaT", "check_upper_ET", "orderstats_check", "wald_decoupling_demo"};
    c.workers = 1;
    const auto one = run_command("report", c);
    c.workers = 3;
    const auto three = run_command("report", c);
    REQUIRE(one.files.size() == three.files.size());
    for (std::size_t i = 0; i < one.files.size(); ++i) {
      CAPTURE(one.files[i].name);
      CHECK(one.files[i].data == three.files[i].data);
    }
  }

  TEST_CASE("a cancelled run is marked incomplete") {
    std::atomic<bool> cancel{true};
    ExperimentConfig c;
    c.processes = {"absbm"};
    c.n_paths = 100;
    const auto r = run_command("bounds", c, &cancel);
    CHECK_FALSE(r.complete);
    const auto m = json::parse(find_file(r, "manifest.json")->data);
    CHECK(m["complete"] == false);
    CHECK(find_file(r, "summary.md")->data.find("INCOMPLETE") != std::string::npos);
  }

  TEST_CASE("commands needing a process say so") {
    ExperimentConfig c;
    CHECK(code_of([&] { run_command("estimate", c); }) == Errc::config);
    CHECK(code_of([&] { run_command("bounds", c); }) == Errc::config);
    CHECK(code_of([&] { run_command("launch", c); }) == Errc::config);
  }
}
