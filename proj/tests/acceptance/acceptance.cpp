// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "natclock/bounds.hpp"
#include "natclock/dist.hpp"
#include "natclock/estimators.hpp"
#include "natclock/experiments.hpp"
#include "natclock/grid.hpp"
#include "natclock/natclock.h"
#include "natclock/parallel.hpp"
#include "natclock/process.hpp"
#include "natclock/renewal.hpp"
#include "natclock/rng.hpp"

using namespace natclock;

namespace {

constexpr double kZ = 4.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void need(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [violated: " << what << "]";
    }
  }
};

std::string f(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::shared_ptr<const TimeGrid> grid(const std::string& spec) {
  return std::make_shared<const TimeGrid>(parse_grid(spec));
}

std::shared_ptr<const TimeGrid> uniform(double t_max, std::size_t n) {
  return std::make_shared<const TimeGrid>(make_uniform_grid(t_max, n));
}

double combined_se(const BoundReport& r) { return std::hypot(r.lhs_se, r.rhs_se); }

// lhs <= rhs allowing k combined standard errors.
bool le_within(const BoundReport& r, double k = kZ) { return r.lhs <= r.rhs + k * combined_se(r); }

Exec exec() { return Exec{0}; }

std::uint64_t seed_for(int criterion) { return derive_seed(20240601, static_cast<std::uint64_t>(criterion)); }

void c1(Outcome& o) {
  CheckConfig cc;
  cc.grid = grid("uniform:1:201");
  cc.n_paths = 100000;
  cc.envelope_seed = derive_seed(seed_for(1), 0);
  cc.hitting_seed = derive_seed(seed_for(1), 1);
  cc.exec = exec();
  Workbench wb(cc);
  const auto rep = check_lower_EaT(wb, Process(zoo::SharpIndicator{1.0}), 1.0);
  o.detail << "E[a(T_1)]=" << f(rep.rhs) << " se=" << f(rep.rhs_se) << " margin=" << f(rep.margin)
           << " verdict=" << verdict_name(rep.verdict);
  o.need(std::fabs(rep.rhs - 0.5) <= 0.01, "estimate within 0.5 +- 0.01");
  o.need(rep.verdict == Verdict::pass, "verdict PASS");
  o.need(std::fabs(rep.margin) <= 4.0 * combined_se(rep), "|margin| <= 4 SE");
}

// Non-negative zoo variants at level r; the sharp witness is built for r.
std::vector<Process> nonnegative_variants(double r) {
  std::vector<Process> out;
  for (const auto& p : zoo_catalog()) {
    if (!p.flags().nonnegative) continue;
    if (p.as<zoo::SharpIndicator>()) out.emplace_back(zoo::SharpIndicator{r});
    else out.push_back(p);
  }
  return out;
}

void c2(Outcome& o) {
  const double levels[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  constexpr int kReps = 20;
  std::size_t pass = 0, fail = 0, other = 0, variants = 0;
  std::string worst;
  double worst_z = kInf;
  for (std::size_t li = 0; li < std::size(levels); ++li) {
    const double r = levels[li];
    const auto procs = nonnegative_variants(r);
    variants = procs.size();
    for (std::size_t pi = 0; pi < procs.size(); ++pi) {
      const auto& p = procs[pi];
      const double t_max = p.flags().diffusive ? 20.0 * std::max(1.0, r * r) : std::max(10.0, 4.0 * r);
      for (int rep = 0; rep < kReps; ++rep) {
        CheckConfig cc;
        cc.grid = uniform(t_max, 2001);
        cc.n_paths = 2000;
        const std::uint64_t s = derive_seed(seed_for(2), li * 1000 + pi * 100 + rep);
        cc.envelope_seed = derive_seed(s, 0);
        cc.hitting_seed = derive_seed(s, 1);
        cc.exec = exec();
        Workbench wb(cc);
        const auto b = check_lower_EaT(wb, p, r);
        if (b.verdict == Verdict::pass) ++pass;
        else if (b.verdict == Verdict::fail) ++fail;
        else ++other;
        if (b.z < worst_z) {
          worst_z = b.z;
          worst = p.describe() + " r=" + f(r) + " z=" + f(b.z);
        }
      }
    }
  }
  const std::size_t total = pass + fail + other;
  const double rate = static_cast<double>(pass) / static_cast<double>(total);
  o.detail << variants << " variants, " << total << " checks: pass=" << pass << " fail=" << fail
           << " other=" << other << " rate=" << f(rate) << " lowest z: " << worst;
  o.need(variants == 9, "9 non-negative variants");
  o.need(fail == 0, "no FAIL");
  o.need(rate >= 0.99, "PASS rate >= 99%");
}

void c3(Outcome& o) {
  const Process absbm(zoo::AbsBM{});
  CheckConfig cc;
  cc.grid = uniform(20.0, 40001);
  cc.envelope_grid = uniform(8.0, 8001);
  cc.n_paths = 100000;
  cc.envelope_seed = derive_seed(seed_for(3), 0);
  cc.hitting_seed = derive_seed(seed_for(3), 1);
  cc.exec = exec();
  Workbench wb(cc);
  const auto mt = wb.hits(absbm, 1.0).mean_tau();
  const auto& kappa = wb.envelope(absbm, EnvelopeKind::kappa);
  const double k1 = kappa.at(1.0);
  const auto ku = check_kappa_upper(wb, absbm, 1.0);
  o.detail << "E[T_1]=" << f(mt.value) << " (se " << f(mt.se) << ") kappa(1)=" << f(k1) << " kappa_upper "
           << verdict_name(ku.verdict) << " rhs=" << f(ku.rhs);
  o.need(std::fabs(mt.value - 1.0) <= 0.05, "E[T_1] within 5% of 1");
  o.need(std::fabs(k1 - 0.798) <= 0.01, "kappa(1) = 0.798 +- 0.01");
  o.need(ku.verdict == Verdict::pass, "check_kappa_upper PASS");
  o.need(std::fabs(ku.rhs - 2.0 * std::acos(-1.0)) <= 0.05, "kappa^-1(2) close to 2 pi");

  const auto rows = refinement_sweep(absbm, 1.0, {uniform(20.0, 201), uniform(20.0, 2001), uniform(20.0, 20001)}, 1.0,
                                     100000, derive_seed(seed_for(3), 2), exec());
  o.detail << " sweep E[T_1]:";
  for (const auto& row : rows) o.detail << " " << f(row.step) << "->" << f(row.mean_tau.value);
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    monotone = monotone && rows[i].mean_tau.value < rows[i - 1].mean_tau.value;
  o.need(monotone, "refinement decreases E[T_1] toward 1");
  o.need(rows.back().mean_tau.value > 1.0 - 4.0 * rows.back().mean_tau.se, "finest grid approaches from above");
}

void c4(Outcome& o) {
  const Process p(zoo::AbsW2MinusT{});
  CheckConfig cc;
  cc.grid = uniform(20.0, 20001);
  cc.envelope_grid = grid("geom:0.0001:20:2001");
  cc.n_paths = 100000;
  cc.n_envelope_paths = 20000;
  cc.envelope_seed = derive_seed(seed_for(4), 0);
  cc.hitting_seed = derive_seed(seed_for(4), 1);
  cc.exec = exec();
  Workbench wb(cc);
  const auto mt = wb.hits(p, 1.0).mean_tau();
  const auto eta = check_eta_lower(wb, p, 1.0);
  o.detail << "E[T_1]=" << f(mt.value) << " se=" << f(mt.se) << " eta_lower " << verdict_name(eta.verdict)
           << " (E[eta(T)]=" << f(eta.rhs) << ")";
  o.need(mt.value >= 0.5116 - 4.0 * mt.se, "E[T_1] >= 0.5116 - 4 SE");
  o.need(eta.verdict == Verdict::pass, "check_eta_lower PASS");
}

void c5(Outcome& o) {
  const auto t = table1_reproduce(table1_d_values(), 100000, seed_for(5), exec());
  std::size_t matched = 0;
  for (const auto& row : t.rows) {
    if (row.match) ++matched;
    else o.detail << "d=" << row.d << " " << f(row.estimate) << " vs " << f(row.reference) << "; ";
  }
  o.detail << matched << "/" << t.rows.size() << " entries match, monotone=" << (t.monotone ? "yes" : "no");
  o.need(t.rows.size() == 12 && matched == 12, "all 12 entries match");
  o.need(t.monotone, "monotone in d");
}

void c6(Outcome& o) {
  for (int d : {1, 2, 5, 10, 50, 100}) {
    const auto r = chi_max_harmonic_bound(d, 100000, derive_seed(seed_for(6), d), exec());
    o.detail << "d=" << d << " " << f(r.lhs) << "<=" << f(r.rhs) << " ";
    o.need(le_within(r), "E[Y_" + std::to_string(d) + "] <= 3 H_d + 4 SE");
  }
}

void c7(Outcome& o) {
  BesselConfig bc;
  bc.grid = uniform(5.0, 5001);
  bc.n_paths = 20000;
  bc.n_chi = 100000;
  bc.exec = exec();
  for (int d : {1, 5, 10}) {
    bc.seed = derive_seed(seed_for(7), d);
    const auto b = bessel_bounds(d, 1.0, bc);
    const auto by_name = [&](const std::string& n) -> const BoundReport& {
      for (const auto& r : b.reports)
        if (r.name == n) return r;
      throw std::runtime_error("missing report " + n);
    };
    const auto& lo41 = by_name("bessel_lower_mean_y");
    const auto& lo42 = by_name("bessel_lower_harmonic");
    const auto& up43 = by_name("bessel_upper_sqrt_y");
    const auto& rel = by_name("bessel_harmonic_le_mean_y");
    const auto mi = min_iid_bound(d, 1.0, bc);
    o.detail << "d=" << d << " E[T]=" << f(b.mean_T.value) << " in [" << f(lo41.lhs) << ", " << f(up43.rhs)
             << "] min_iid " << verdict_name(mi.verdict) << "; ";
    const std::string tag = " (d=" + std::to_string(d) + ")";
    o.need(le_within(lo41), "r^2/(2E[Y_d]) <= E[T]" + tag);
    o.need(le_within(up43), "E[T] <= 4r^2/(E sqrt(Y_d))^2" + tag);
    o.need(le_within(rel), "r^2/(6H_d) <= r^2/(2E[Y_d])" + tag);
    o.need(mi.verdict == Verdict::pass, "min_iid_bound PASS" + tag);
    const double min_iid = 1.0 / (3.0 * (d + 1));
    o.need(min_iid <= lo42.lhs * (1.0 + 1e-12), "min_iid bound <= r^2/(6H_d)" + tag);
  }
}

void c8(Outcome& o) {
  const Process procs[] = {Process(zoo::AbsBM{}), Process(zoo::BesselMax3D{1})};
  int k = 0;
  for (const auto& p : procs) {
    for (double r : {0.5, 1.0, 2.0, 4.0}) {
      CheckConfig cc;
      cc.grid = uniform(20.0 * r * r, 20001);
      cc.n_paths = 20000;
      cc.envelope_seed = derive_seed(seed_for(8), 2 * k);
      cc.hitting_seed = derive_seed(seed_for(8), 2 * k + 1);
      cc.exec = exec();
      ++k;
      Workbench wb(cc);
      const double lv[] = {r};
      const auto reps = stability_ratio(wb, p, lv);
      for (const auto& rep : reps) {
        o.need(le_within(rep), rep.name + " " + p.describe() + " r=" + f(r));
        if (rep.name == "stability_ratio.upper")
          o.detail << p.name() << " r=" << f(r) << " ratio=" << f(rep.lhs) << "; ";
      }
    }
  }
}

std::vector<double> draws(const NonnegDist& d, std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    Stream s({seed, i, 0});
    v[i] = d.sample(s);
  }
  return v;
}

void c9(Outcome& o) {
  const auto m = renewal_function({NonnegDist::exponential(1.0), 10.0}, 5.0, 100000, derive_seed(seed_for(9), 0),
                                  exec());
  o.detail << "M(5)=" << f(m.mean) << " (se " << f(m.se) << ")";
  o.need(std::fabs(m.mean - 5.0) <= 0.05, "M(5) = 5.00 +- 0.05");

  std::vector<double> pts;
  for (int i = 0; i <= 4000; ++i) pts.push_back(0.01 * i);
  const auto fexp = tabulate_survival(NonnegDist::exponential(1.0), pts);
  const auto g = stationary_renewal(fexp, 1.0);
  double gap = 0.0;
  for (double t : pts) gap = std::max(gap, std::fabs(g(t) - fexp(t)));
  o.detail << " fixed-point gap=" << f(gap);
  o.need(gap <= 1e-3, "exponential is its own stationary law within 1e-3");

  const auto hits = sample_hitting_times(Process(zoo::AbsBM{}), uniform(20.0, 20001), 1.0, 20000,
                                         derive_seed(seed_for(9), 1), exec());
  const auto taus = hits.taus();
  const auto bm = nbu_check(empirical_survival(taus));
  const auto par = nbu_check(empirical_survival(draws(NonnegDist::pareto(2.0), 20000, derive_seed(seed_for(9), 2))));
  o.detail << " absbm nbu " << (bm.holds ? "holds" : "fails") << ", pareto nbu " << (par.holds ? "holds" : "fails")
           << " (excess " << f(par.worst_excess) << " > slack " << f(par.slack) << ")";
  o.need(bm.holds, "AbsBM T_1 passes nbu_check");
  o.need(!par.holds, "Pareto control fails nbu_check");
}

void c10(Outcome& o) {
  WplusConfig w;
  w.seed = seed_for(10);
  w.exec = exec();
  const auto res = wplus_counterexample(w);
  // P(T_1 > t) = erf(1/sqrt(2t)), so the median solves erf(1/sqrt(2t)) = 1/2.
  const double inv = boost::math::erf_inv(0.5);
  const double oracle = 1.0 / (2.0 * inv * inv);
  o.detail << "median=" << f(res.median) << " (se " << f(res.median_se) << ", oracle " << f(oracle) << ") ladder:";
  for (const auto& row : res.ladder) o.detail << " " << f(row.t_max) << "->" << f(row.sqrt_T.mean);
  o.detail << " upper " << verdict_name(res.upper.verdict);
  o.need(std::fabs(res.median - 2.20) <= 0.05, "median T_1 = 2.20 +- 0.05");
  o.need(std::fabs(oracle - 2.20) <= 0.01, "reflection oracle near 2.20");
  bool inc = res.ladder.size() == 3;
  for (std::size_t i = 1; i < res.ladder.size(); ++i)
    inc = inc && res.ladder[i].sqrt_T.mean > res.ladder[i - 1].sqrt_T.mean;
  o.need(inc && res.strictly_increasing, "E[sqrt(T_1 ^ t_max)] strictly increasing");
  o.need(res.upper.verdict == Verdict::not_applicable, "check_upper_EaT NOT_APPLICABLE");
}

void c11(Outcome& o) {
  const auto w = wald_decoupling_demo({WalkSpec::Step::rademacher, 1.0}, StoppingRule::barriers(3, 3), 100000,
                                      seed_for(11), exec());
  const BoundReport* dec = nullptr;
  for (const auto& r : w.reports)
    if (r.name == "wald_decoupling") dec = &r;
  o.detail << "E[T]=" << f(w.T.mean) << " (se " << f(w.T.se) << ") E[S_T^2]=" << f(w.S_T2.mean)
           << " 2E[S~_T^2]=" << f(2.0 * w.S_tilde2.mean) << " support={";
  for (std::size_t i = 0; i < w.support.size(); ++i) o.detail << (i ? "," : "") << f(w.support[i]);
  o.detail << "}";
  o.need(std::fabs(w.T.mean - 9.0) <= 0.15, "E[T] = 9.0 +- 0.15");
  o.need(dec && dec->verdict == Verdict::pass, "decoupling inequality PASS");
  bool support = w.support_ok && !w.support.empty();
  for (double v : w.support) support = support && (v == 3.0 || v == -3.0);
  o.need(support, "S_T in {-3, 3}");
}

void c12(Outcome& o) {
  const auto u = orderstats_check(OrderStatModel::iid(NonnegDist::uniform(0.0, 1.0), 10), 5, 100000,
                                  derive_seed(seed_for(12), 0), exec());
  // Sum of n iid uniforms evaluated at their r-th order statistic: n r/(n+1).
  const double oracle = 10.0 * 5.0 / 11.0;
  o.detail << "iid " << f(u.estimate.mean) << " (oracle " << f(oracle) << ")";
  o.need(std::fabs(u.estimate.mean - oracle) <= 0.05, "iid uniform estimate within 0.05 of 50/11");
  o.need(u.estimate.mean >= 2.5, "estimate >= r/2");
  int k = 1;
  for (double rho : {0.0, 0.5, 0.9}) {
    const auto c = orderstats_check(OrderStatModel::gaussian_copula(NonnegDist::exponential(1.0), 10, rho), 5,
                                    100000, derive_seed(seed_for(12), k++), exec());
    o.detail << "; rho=" << f(rho) << " " << f(c.estimate.mean) << " " << verdict_name(c.report.verdict);
    o.need(c.report.verdict == Verdict::pass, "copula rho=" + f(rho) + " PASS");
  }
}

struct Bundle {
  std::vector<std::pair<std::string, std::string>> files;
};

bool run_report(unsigned workers, Bundle& out, std::string& err) {
  nc_config* cfg = nullptr;
  if (nc_config_create(&cfg) != NC_OK) return err = nc_last_error(), false;
  std::unique_ptr<nc_config, void (*)(nc_config*)> g(cfg, nc_config_free);
  nc_config_set_paths(cfg, 1000);
  nc_config_set_seed(cfg, 13);
  nc_config_set_workers(cfg, workers);
  nc_result* res = nullptr;
  if (nc_run(cfg, "report", &res) != NC_OK) return err = nc_last_error(), false;
  std::unique_ptr<nc_result, void (*)(nc_result*)> rg(res, nc_result_free);
  for (std::size_t i = 0; i < nc_result_file_count(res); ++i) {
    std::size_t n = 0;
    const char* data = nc_result_file_data(res, i, &n);
    out.files.emplace_back(nc_result_file_name(res, i), std::string(data, n));
  }
  return nc_result_complete(res) != 0;
}

void c13(Outcome& o) {
  Bundle one, four;
  std::string err;
  const bool ok1 = run_report(1, one, err);
  const bool ok4 = run_report(4, four, err);
  o.need(ok1 && ok4, "both runs complete " + err);
  std::size_t same = 0;
  bool identical = one.files.size() == four.files.size() && !one.files.empty();
  for (std::size_t i = 0; identical && i < one.files.size(); ++i) {
    if (one.files[i] == four.files[i]) ++same;
    else identical = false;
  }
  o.detail << same << "/" << one.files.size() << " files byte-identical across worker counts 1 and 4";
  o.need(identical, "byte-identical outputs");
}

}  // namespace

int main(int argc, char** argv) {
  const std::pair<const char*, void (*)(Outcome&)> criteria[] = {
      {"sharpness of the lower bound", c1},
      {"universal lower bound over the zoo", c2},
      {"abs BM closed forms", c3},
      {"submartingale eta bound", c4},
      {"E sqrt(Y_d) table", c5},
      {"chi-max harmonic bound", c6},
      {"Bessel two-sided bounds", c7},
      {"stability ratio", c8},
      {"renewal machinery", c9},
      {"positive-part BM counterexample", c10},
      {"Wald decoupling demo", c11},
      {"order statistics", c12},
      {"determinism across worker counts", c13}};
  // Optional argument: run a single criterion by number.
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    if (only && only != static_cast<int>(i + 1)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.ok) ++failed;
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
