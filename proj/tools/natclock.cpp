// SPDX-License-Identifier: Apache-2.0
// Command-line front end over the C API.
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "natclock/natclock.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitFail = 2;
constexpr int kExitConfig = 3;
constexpr int kExitInterrupted = 130;

const char* kGrammar = R"(Process specs: name(key=value,...), case-insensitive.
  ramp(slope=1)             X_t = slope * t
  sharpindicator(r=1)       r * 1{t >= U}, U ~ uniform(0,1)
  linslope(exp,rate=1)      X_t = Y t with Y drawn from a distribution
  bm | absbm | squaredbm    Brownian motion, |W|, W^2
  absw2minust               |W_t^2 - t|
  positivepartbm            max(W, 0)
  besselmax3d(d=10)         max of d independent 3-d Bessel processes
  renewal(exp,rate=1)       renewal counting process
Distributions: exp(rate), det(value), uniform(lo,hi), pareto(alpha,scale),
weibull(shape,scale).
Grids: uniform:T:n or geom:tmin:T:n (geometric grids include t=0).
Seed: --seed, else the config file, else $NATCLOCK_SEED, else 1.
Exit codes: 0 no FAIL verdict, 2 some FAIL, 3 config error, 130 interrupted.)";

void on_signal(int) { nc_cancel(); }

struct Options {
  std::string config_file;
  std::vector<std::string> processes;
  std::string grid;
  std::string envelope_grid;
  std::vector<double> levels;
  std::size_t paths = 0;
  std::size_t envelope_paths = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> checks;
  std::string out;
  unsigned workers = 0;
  std::vector<int> d;
  double z_crit = 0.0;
};

struct Given {
  CLI::Option* paths = nullptr;
  CLI::Option* envelope_paths = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* z_crit = nullptr;
};

Given add_options(CLI::App* sub, Options& o) {
  Given g;
  sub->add_option("--config", o.config_file, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  sub->add_option("--process", o.processes, "process spec (repeatable)");
  sub->add_option("--grid", o.grid, "hitting-time grid, uniform:T:n or geom:tmin:T:n");
  sub->add_option("--envelope-grid", o.envelope_grid, "grid for envelope estimates");
  sub->add_option("--r", o.levels, "level r (repeatable)");
  g.paths = sub->add_option("--paths", o.paths, "paths per estimate (>= 2)");
  g.envelope_paths = sub->add_option("--envelope-paths", o.envelope_paths, "paths for envelopes (default --paths)");
  g.seed = sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--checks", o.checks, "check names, comma separated, or all")->delimiter(',');
  sub->add_option("--out", o.out, "output directory");
  g.workers = sub->add_option("--workers", o.workers, "worker threads; outputs do not depend on it");
  sub->add_option("--d", o.d, "d values for table1 and Bessel checks")->delimiter(',');
  g.z_crit = sub->add_option("--z-crit", o.z_crit, "critical z for verdicts");
  return g;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool config_has_seed(const std::string& json) { return json.find("\"seed\"") != std::string::npos; }

int report_error(nc_status st) {
  std::cerr << "natclock: " << nc_last_error() << "\n";
  switch (st) {
    case NC_CONFIG:
    case NC_INVALID_ARGUMENT:
    case NC_UNSUPPORTED:
      return kExitConfig;
    default:
      return kExitInternal;
  }
}

// Fails early, before any simulation, when the output directory cannot be written.
bool output_dir_writable(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return false;
  const fs::path probe = fs::path(dir) / ".natclock-write-probe";
  {
    std::ofstream f(probe);
    if (!f) return false;
  }
  fs::remove(probe, ec);
  return true;
}

int run(const std::string& command, const Options& o, const Given& g) {
  nc_config* cfg = nullptr;
  std::string json;
  nc_status st;
  if (!o.config_file.empty()) {
    json = read_file(o.config_file);
    st = nc_config_from_json(json.c_str(), &cfg);
  } else {
    st = nc_config_create(&cfg);
  }
  if (st != NC_OK) return report_error(st);
  std::unique_ptr<nc_config, void (*)(nc_config*)> guard(cfg, nc_config_free);

  auto apply = [&](nc_status s) {
    if (s != NC_OK && st == NC_OK) st = s;
  };
  for (const auto& p : o.processes) apply(nc_config_add_process(cfg, p.c_str()));
  if (!o.grid.empty()) apply(nc_config_set_grid(cfg, o.grid.c_str()));
  if (!o.envelope_grid.empty()) apply(nc_config_set_envelope_grid(cfg, o.envelope_grid.c_str()));
  if (!o.levels.empty()) apply(nc_config_set_levels(cfg, o.levels.data(), o.levels.size()));
  if (g.paths->count()) apply(nc_config_set_paths(cfg, o.paths));
  if (g.envelope_paths->count()) apply(nc_config_set_envelope_paths(cfg, o.envelope_paths));
  if (g.seed->count()) {
    apply(nc_config_set_seed(cfg, o.seed));
  } else if (!config_has_seed(json)) {
    if (const char* env = std::getenv("NATCLOCK_SEED")) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (!*env || *end) {
        std::cerr << "natclock: NATCLOCK_SEED must be a non-negative integer\n";
        return kExitConfig;
      }
      apply(nc_config_set_seed(cfg, v));
    }
  }
  if (!o.checks.empty()) {
    std::string joined;
    for (const auto& c : o.checks) joined += (joined.empty() ? "" : ",") + c;
    apply(nc_config_set_checks(cfg, joined.c_str()));
  }
  if (!o.out.empty()) apply(nc_config_set_out(cfg, o.out.c_str()));
  if (g.workers->count()) apply(nc_config_set_workers(cfg, o.workers));
  if (!o.d.empty()) apply(nc_config_set_d(cfg, o.d.data(), o.d.size()));
  if (g.z_crit->count()) apply(nc_config_set_z_crit(cfg, o.z_crit));
  if (st != NC_OK) return report_error(st);

  if (command != "zoo") {
    if ((st = nc_config_validate(cfg)) != NC_OK) return report_error(st);
    if (!output_dir_writable(nc_config_out(cfg))) {
      std::cerr << "natclock: output directory '" << nc_config_out(cfg) << "' is not writable\n";
      return kExitConfig;
    }
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  nc_result* res = nullptr;
  if ((st = nc_run(cfg, command.c_str(), &res)) != NC_OK) return report_error(st);
  std::unique_ptr<nc_result, void (*)(nc_result*)> rguard(res, nc_result_free);

  std::cout << nc_result_summary(res);
  for (std::size_t i = 0; i < nc_result_warning_count(res); ++i)
    std::cerr << "warning: " << nc_result_warning(res, i) << "\n";
  if (command == "zoo") return kExitOk;

  if ((st = nc_result_write(res, nc_config_out(cfg))) != NC_OK) {
    std::cerr << "natclock: " << nc_last_error() << "\n";
    return st == NC_IO ? kExitConfig : kExitInternal;
  }
  if (!nc_result_complete(res)) return kExitInterrupted;
  return nc_result_any_fail(res) ? kExitFail : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("natclock ") + nc_version() + ": first-passage simulation and bound checks"};
  app.footer(kGrammar);
  app.set_version_flag("--version", nc_version());
  app.require_subcommand(1);

  Options opts;
  std::vector<std::pair<CLI::App*, Given>> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"zoo", "list process variants and their hypothesis flags"},
      {"estimate", "write envelope.csv: t, a_hat, se, kappa_hat, eta_hat"},
      {"hit", "write hitting.csv: path_index, tau, censored"},
      {"bounds", "run bound checks; write manifest.json and summary.md"},
      {"table1", "write table1.csv of E[sqrt(Y_d)] against published values"},
      {"report", "run every check and write the full bundle"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->footer(kGrammar);
    subs.emplace_back(sub, add_options(sub, opts));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  for (const auto& [sub, given] : subs)
    if (sub->parsed()) return run(sub->get_name(), opts, given);
  return kExitInternal;
}
