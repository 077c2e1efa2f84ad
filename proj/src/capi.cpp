// SPDX-License-Identifier: Apache-2.0
#include "natclock/natclock.h"

#include <atomic>
#include <cmath>
#include <memory>
#include <new>
#include <string>

#include "natclock/error.hpp"
#include "natclock/estimators.hpp"
#include "natclock/format.hpp"
#include "natclock/runner.hpp"

using namespace natclock;

struct nc_process {
  Process process;
  std::string description;
};

struct nc_grid {
  std::shared_ptr<const TimeGrid> grid;
};

struct nc_config {
  ExperimentConfig config;
  std::string json;
};

struct nc_result {
  RunResult result;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_zoo;
std::atomic<bool> g_cancel{false};

nc_status to_status(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return NC_INVALID_ARGUMENT;
    case Errc::unsupported: return NC_UNSUPPORTED;
    case Errc::decoupling_violation: return NC_DECOUPLING_VIOLATION;
    case Errc::infinite_mean: return NC_INFINITE_MEAN;
    case Errc::config: return NC_CONFIG;
    case Errc::io: return NC_IO;
  }
  return NC_INTERNAL;
}

template <class F>
nc_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return NC_OK;
  } catch (const Error& e) {
    g_last_error = std::string(errc_name(e.code())) + ": " + e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = std::string("internal: ") + e.what();
  } catch (...) {
    g_last_error = "internal: unknown exception";
  }
  return NC_INTERNAL;
}

void need(const void* p, const char* what) {
  if (!p) fail(Errc::invalid_argument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* nc_version(void) { return kVersion; }
const char* nc_last_error(void) { return g_last_error.c_str(); }

const char* nc_status_name(nc_status status) {
  switch (status) {
    case NC_OK: return "ok";
    case NC_INVALID_ARGUMENT: return "invalid-argument";
    case NC_UNSUPPORTED: return "unsupported";
    case NC_DECOUPLING_VIOLATION: return "decoupling-violation";
    case NC_INFINITE_MEAN: return "infinite-mean";
    case NC_CONFIG: return "config";
    case NC_IO: return "io";
    case NC_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* nc_zoo_table(void) {
  g_zoo = zoo_table();
  return g_zoo.c_str();
}

nc_status nc_process_parse(const char* spec, nc_process** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = nullptr;
    Process p = parse_process(spec);
    std::string d = p.describe();
    *out = new nc_process{std::move(p), std::move(d)};
  });
}

void nc_process_free(nc_process* process) { delete process; }

const char* nc_process_describe(const nc_process* process) { return process ? process->description.c_str() : ""; }

nc_status nc_process_flags(const nc_process* process, nc_flags* out) {
  return guarded([&] {
    need(process, "process");
    need(out, "out");
    const auto& f = process->process.flags();
    *out = {f.nonnegative, f.continuous_paths, f.time_homogeneous_markov, f.submartingale, f.upper_bound_claimed,
            f.sharpness_witness};
  });
}

nc_status nc_grid_parse(const char* spec, nc_grid** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new nc_grid{std::make_shared<const TimeGrid>(parse_grid(spec))};
  });
}

nc_status nc_grid_uniform(double t_max, size_t n, nc_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new nc_grid{std::make_shared<const TimeGrid>(make_uniform_grid(t_max, n))};
  });
}

nc_status nc_grid_geometric(double t_min, double t_max, size_t n, nc_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new nc_grid{std::make_shared<const TimeGrid>(make_geometric_grid(t_min, t_max, n))};
  });
}

void nc_grid_free(nc_grid* grid) { delete grid; }
size_t nc_grid_size(const nc_grid* grid) { return grid ? grid->grid->size() : 0; }
const double* nc_grid_times(const nc_grid* grid) { return grid ? grid->grid->times().data() : nullptr; }

nc_status nc_sample_path(const nc_process* process, const nc_grid* grid, uint64_t seed, uint64_t path_index,
                         double* out, size_t size) {
  return guarded([&] {
    need(process, "process");
    need(grid, "grid");
    need(out, "out");
    if (size != grid->grid->size()) fail(Errc::invalid_argument, "output size must equal the grid size");
    generate_path(process->process, *grid->grid, StreamKey{seed, path_index, 0}, std::span<double>(out, size));
  });
}

nc_status nc_first_crossing(const nc_grid* grid, const double* values, size_t size, double r, double* tau,
                            int* censored) {
  return guarded([&] {
    need(grid, "grid");
    need(values, "values");
    need(tau, "tau");
    const auto h = first_crossing(*grid->grid, std::span<const double>(values, size), r);
    *tau = h.tau;
    if (censored) *censored = h.censored ? 1 : 0;
  });
}

nc_status nc_estimate_envelope(const nc_process* process, const nc_grid* grid, size_t n_paths, nc_envelope_kind kind,
                               uint64_t seed, unsigned workers, double* values, double* se) {
  return guarded([&] {
    need(process, "process");
    need(grid, "grid");
    need(values, "values");
    EnvelopeKind k;
    switch (kind) {
      case NC_ENVELOPE_A: k = EnvelopeKind::a; break;
      case NC_ENVELOPE_KAPPA: k = EnvelopeKind::kappa; break;
      case NC_ENVELOPE_ETA: k = EnvelopeKind::eta; break;
      default: fail(Errc::invalid_argument, "unknown envelope kind");
    }
    const auto e = estimate_envelope(process->process, grid->grid, n_paths, k, seed, Exec{workers});
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      values[i] = e.values[i];
      if (se) se[i] = e.se[i];
    }
  });
}

nc_status nc_hitting_times(const nc_process* process, const nc_grid* grid, double r, size_t n_paths, uint64_t seed,
                           unsigned workers, double* taus, int* censored) {
  return guarded([&] {
    need(process, "process");
    need(grid, "grid");
    need(taus, "taus");
    const auto b = sample_hitting_times(process->process, grid->grid, r, n_paths, seed, Exec{workers});
    for (std::size_t i = 0; i < b.samples.size(); ++i) {
      taus[i] = b.samples[i].tau;
      if (censored) censored[i] = b.samples[i].censored ? 1 : 0;
    }
  });
}

nc_status nc_invert_monotone(const nc_grid* grid, const double* curve, size_t size, double xi, double* t) {
  return guarded([&] {
    need(grid, "grid");
    need(curve, "curve");
    need(t, "t");
    if (size != grid->grid->size()) fail(Errc::invalid_argument, "curve size must equal the grid size");
    *t = invert_monotone(*grid->grid, std::span<const double>(curve, size), xi).time;
  });
}

nc_status nc_config_create(nc_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new nc_config{};
  });
}

nc_status nc_config_from_json(const char* json, nc_config** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    *out = new nc_config{config_from_json(json), {}};
  });
}

void nc_config_free(nc_config* config) { delete config; }

#define NC_SETTER(body)           \
  return guarded([&] {            \
    need(config, "config");       \
    auto& c = config->config;     \
    body;                         \
  })

nc_status nc_config_add_process(nc_config* config, const char* spec) {
  NC_SETTER(need(spec, "spec"); c.processes.emplace_back(spec));
}
nc_status nc_config_set_grid(nc_config* config, const char* spec) {
  NC_SETTER(if (spec) c.grid = spec; else c.grid.reset());
}
nc_status nc_config_set_envelope_grid(nc_config* config, const char* spec) {
  NC_SETTER(if (spec) c.envelope_grid = spec; else c.envelope_grid.reset());
}
nc_status nc_config_set_levels(nc_config* config, const double* levels, size_t count) {
  NC_SETTER(need(levels, "levels"); c.levels.assign(levels, levels + count));
}
nc_status nc_config_set_paths(nc_config* config, size_t n_paths) { NC_SETTER(c.n_paths = n_paths); }
nc_status nc_config_set_envelope_paths(nc_config* config, size_t n_paths) {
  NC_SETTER(c.n_envelope_paths = n_paths);
}
nc_status nc_config_set_seed(nc_config* config, uint64_t seed) { NC_SETTER(c.seed = seed); }
nc_status nc_config_set_checks(nc_config* config, const char* checks) {
  NC_SETTER(need(checks, "checks"); c.checks.clear(); for (auto& s : split(checks, ',')) {
    auto t = trim(s);
    if (!t.empty()) c.checks.emplace_back(t);
  });
}
nc_status nc_config_set_out(nc_config* config, const char* dir) { NC_SETTER(need(dir, "dir"); c.out_dir = dir); }
nc_status nc_config_set_workers(nc_config* config, unsigned workers) { NC_SETTER(c.workers = workers); }
nc_status nc_config_set_d(nc_config* config, const int* d, size_t count) {
  NC_SETTER(if (count) need(d, "d"); c.d_list.assign(d, d + count));
}
nc_status nc_config_set_z_crit(nc_config* config, double z_crit) { NC_SETTER(c.z_crit = z_crit); }

#undef NC_SETTER

const char* nc_config_out(const nc_config* config) { return config ? config->config.out_dir.c_str() : ""; }

const char* nc_config_to_json(nc_config* config) {
  if (!config) return "";
  config->json = config_to_json(config->config);
  return config->json.c_str();
}

nc_status nc_config_validate(const nc_config* config) {
  return guarded([&] {
    need(config, "config");
    validate_config(config->config);
  });
}

nc_status nc_run(const nc_config* config, const char* command, nc_result** out) {
  return guarded([&] {
    need(config, "config");
    need(command, "command");
    need(out, "out");
    *out = nullptr;
    auto r = std::make_unique<nc_result>();
    r->result = run_command(command, config->config, &g_cancel);
    *out = r.release();
  });
}

void nc_cancel(void) { g_cancel.store(true); }
void nc_cancel_clear(void) { g_cancel.store(false); }

void nc_result_free(nc_result* result) { delete result; }

size_t nc_result_file_count(const nc_result* result) { return result ? result->result.files.size() : 0; }

const char* nc_result_file_name(const nc_result* result, size_t index) {
  if (!result || index >= result->result.files.size()) return nullptr;
  return result->result.files[index].name.c_str();
}

const char* nc_result_file_data(const nc_result* result, size_t index, size_t* size) {
  if (!result || index >= result->result.files.size()) return nullptr;
  const auto& d = result->result.files[index].data;
  if (size) *size = d.size();
  return d.c_str();
}

int nc_result_any_fail(const nc_result* result) { return result && result->result.any_fail() ? 1 : 0; }
int nc_result_complete(const nc_result* result) { return result && result->result.complete ? 1 : 0; }

size_t nc_result_verdict_count(const nc_result* result, nc_verdict verdict) {
  if (!result) return 0;
  const Verdict want = verdict == NC_PASS           ? Verdict::pass
                       : verdict == NC_FAIL         ? Verdict::fail
                       : verdict == NC_INCONCLUSIVE ? Verdict::inconclusive
                                                    : Verdict::not_applicable;
  std::size_t n = 0;
  for (const auto& r : result->result.reports) n += r.verdict == want;
  return n;
}

const char* nc_result_summary(const nc_result* result) { return result ? result->result.summary.c_str() : ""; }
size_t nc_result_warning_count(const nc_result* result) { return result ? result->result.warnings.size() : 0; }

const char* nc_result_warning(const nc_result* result, size_t index) {
  if (!result || index >= result->result.warnings.size()) return nullptr;
  return result->result.warnings[index].c_str();
}

nc_status nc_result_write(const nc_result* result, const char* dir) {
  return guarded([&] {
    need(result, "result");
    need(dir, "dir");
    write_outputs(result->result, dir);
  });
}

}  // extern "C"
