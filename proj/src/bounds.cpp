// SPDX-License-Identifier: Apache-2.0
#include "natclock/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "natclock/error.hpp"
#include "natclock/format.hpp"

namespace natclock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) { return format_double(x); }

BoundReport base_report(Workbench& wb, const Process& process, double r, std::string name, std::string claim) {
  BoundReport rep;
  rep.name = std::move(name);
  rep.claim = std::move(claim);
  rep.hypotheses = hypothesis_list(process.flags());
  rep.provenance = wb.provenance(process, r);
  return rep;
}

void note_censoring(BoundReport& rep, double censored_fraction) {
  if (censored_fraction > 0.0)
    rep.notes.push_back("censored fraction " + fmt(censored_fraction) +
                        "; censored hitting times count as t_max, so the E[T_r] side is a lower bound");
}

// Censored means underestimate E[T_r]. Where that bias favours PASS (upper
// checks) or FAIL (lower checks), a verdict resting on heavy censoring is
// downgraded.
void downgrade_pass_on_censoring(BoundReport& rep, double censored_fraction, double max_censored) {
  if (rep.verdict == Verdict::pass && censored_fraction > max_censored) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("PASS downgraded: censored fraction " + fmt(censored_fraction) + " exceeds " +
                        fmt(max_censored) + "; extend t_max");
  }
}

void downgrade_fail_on_censoring(BoundReport& rep, double censored_fraction, double max_censored) {
  if (rep.verdict == Verdict::fail && censored_fraction > max_censored) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("FAIL downgraded: censored fraction " + fmt(censored_fraction) + " exceeds " +
                        fmt(max_censored) + "; extend t_max");
  }
}

void note_divergence(BoundReport& rep, const Process& process, double r) {
  if (auto mt = exact_curve(process, CurveKind::mean_T); mt && std::isinf((*mt)(r)))
    rep.notes.push_back("divergence: E[T_r] is infinite for this process; estimates grow with t_max and n_paths");
}

void note_plugin(BoundReport& rep, const PluginEstimate& p) {
  if (p.lower_bound_only)
    rep.notes.push_back("censored fraction " + fmt(p.censored_fraction) +
                        "; E[a(T_r)] estimate is a lower bound");
  if (p.extrapolated) rep.notes.push_back("some hitting times exceed the envelope grid; a_hat clamped at its end");
}

bool upper_claimed(const Process& process) { return process.flags().upper_bound_claimed; }

const char* kUpperMissing =
    "upper-bound hypotheses (non-negative, continuous, time-homogeneous Markov, increment condition) not claimed";

}  // namespace

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
    case Verdict::not_applicable: return "NOT_APPLICABLE";
  }
  return "?";
}

void decide(BoundReport& rep, double z_crit, double se_combined) {
  const double se = se_combined >= 0.0 ? se_combined : std::hypot(rep.lhs_se, rep.rhs_se);
  rep.margin = rep.rhs - rep.lhs;
  if (std::isnan(rep.margin)) {
    rep.z = 0.0;
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("margin undefined (both sides infinite)");
    return;
  }
  if (std::isnan(se)) {
    rep.z = 0.0;
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("standard error undefined");
    return;
  }
  const double scale = std::max({1.0, std::isfinite(rep.lhs) ? std::fabs(rep.lhs) : 0.0,
                                 std::isfinite(rep.rhs) ? std::fabs(rep.rhs) : 0.0});
  const double tol = 1e-12 * scale;
  if (se > 0.0 && std::isfinite(se)) rep.z = rep.margin / se;
  else rep.z = rep.margin > tol ? kInf : (rep.margin < -tol ? -kInf : 0.0);

  if (rep.relation == Relation::le) {
    if (rep.margin >= -tol) rep.verdict = Verdict::pass;
    else if (rep.z < -z_crit) rep.verdict = Verdict::fail;
    else rep.verdict = Verdict::inconclusive;
  } else {
    rep.verdict = (std::fabs(rep.margin) <= tol || std::fabs(rep.z) <= z_crit) ? Verdict::pass : Verdict::fail;
  }
}

void mark_not_applicable(BoundReport& rep, const std::string& why) {
  rep.verdict = Verdict::not_applicable;
  rep.notes.push_back("not applicable: " + why + "; values logged only");
}

std::vector<std::string> hypothesis_list(const ProcessFlags& f) {
  auto b = [](bool x) { return x ? "true" : "false"; };
  return {std::string("nonnegative=") + b(f.nonnegative), std::string("continuous_paths=") + b(f.continuous_paths),
          std::string("time_homogeneous_markov=") + b(f.time_homogeneous_markov),
          std::string("submartingale=") + b(f.submartingale),
          std::string("upper_bound_claimed=") + b(f.upper_bound_claimed)};
}

Workbench::Workbench(CheckConfig config) : config_(std::move(config)) {
  require(config_.grid != nullptr, "check configuration needs a grid");
  if (!config_.envelope_grid) config_.envelope_grid = config_.grid;
  if (config_.n_envelope_paths == 0) config_.n_envelope_paths = config_.n_paths;
  require(config_.n_paths >= 2, "n_paths must be >= 2");
  require(config_.z_crit > 0.0, "z_crit must be positive");
  if (config_.envelope_seed == config_.hitting_seed)
    fail(Errc::decoupling_violation, "envelope and hitting seeds must differ");
}

const EnvelopeEstimate& Workbench::envelope(const Process& process, EnvelopeKind kind) {
  const std::string key = process.describe() + "|" + envelope_kind_name(kind);
  auto it = envelopes_.find(key);
  if (it == envelopes_.end()) {
    it = envelopes_
             .emplace(key, estimate_envelope(process, config_.envelope_grid, config_.n_envelope_paths, kind,
                                             config_.envelope_seed, config_.exec))
             .first;
  }
  return it->second;
}

const HittingBatch& Workbench::hits(const Process& process, double r) {
  const std::string key = process.describe() + "|" + fmt(r);
  auto it = batches_.find(key);
  if (it == batches_.end()) {
    it = batches_
             .emplace(key, sample_hitting_times(process, config_.grid, r, config_.n_paths, config_.hitting_seed,
                                                config_.exec))
             .first;
  }
  return it->second;
}

Provenance Workbench::provenance(const Process& process, double r) const {
  return {process.describe(), r, config_.n_paths, config_.envelope_seed, config_.hitting_seed,
          config_.grid->describe() +
              (*config_.envelope_grid == *config_.grid ? "" : ";envelope=" + config_.envelope_grid->describe())};
}

BoundReport check_lower_EaT(Workbench& wb, const Process& process, double r) {
  auto rep = base_report(wb, process, r, "check_lower_EaT", "r/2 <= E[a(T_r)]");
  const auto p = plugin_mean_a_of_T(wb.envelope(process, EnvelopeKind::a), wb.hits(process, r));
  rep.lhs = 0.5 * r;
  rep.rhs = p.value;
  rep.rhs_se = p.se;
  // At its own level the witness attains the bound, so equality is what is tested.
  const auto* sharp = process.as<zoo::SharpIndicator>();
  if (sharp && sharp->r == r) {
    rep.relation = Relation::eq;
    rep.claim = "r/2 = E[a(T_r)]";
  }
  decide(rep, wb.config().z_crit);
  if (!process.flags().nonnegative)
    rep.notes.push_back("hypothesis-violation: process is not flagged non-negative; the bound is claimed only for "
                        "non-negative processes");
  note_plugin(rep, p);
  note_divergence(rep, process, r);
  if (sharp && sharp->r == r) rep.notes.push_back("sharpness witness: E[a(T_r)] = r/2 exactly");
  downgrade_fail_on_censoring(rep, p.censored_fraction, wb.config().max_censored);
  return rep;
}

BoundReport check_concave_lower_ET(Workbench& wb, const Process& process, double r) {
  auto rep = base_report(wb, process, r, "check_concave_lower_ET", "a^-1(r/2) <= E[T_r] (a concave)");
  const auto& env = wb.envelope(process, EnvelopeKind::a);
  const auto& hits = wb.hits(process, r);
  const auto gate = concavity_check(env, wb.config().z_crit);
  const auto inv = invert_monotone(env, 0.5 * r);
  const auto mt = hits.mean_tau();
  rep.lhs = inv.time;
  rep.lhs_se = inv.se;
  rep.rhs = mt.value;
  rep.rhs_se = mt.se;
  decide(rep, wb.config().z_crit);
  if (inv.infinite()) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("a_hat stays below r/2 on the envelope grid; extend t_max");
  }
  if (inv.at_first_point) rep.notes.push_back("a_hat already reaches r/2 at the first grid point");
  if (!gate.concave) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("concavity gate failed at t=" + fmt((*env.grid)[gate.worst_index]) + " (excess " +
                        fmt(gate.max_violation) + ")");
  }
  note_censoring(rep, hits.censored_fraction);
  downgrade_fail_on_censoring(rep, hits.censored_fraction, wb.config().max_censored);
  return rep;
}

BoundReport check_upper_EaT(Workbench& wb, const Process& process, double r) {
  auto rep = base_report(wb, process, r, "check_upper_EaT", "E[a(T_r)] <= 2r");
  const auto p = plugin_mean_a_of_T(wb.envelope(process, EnvelopeKind::a), wb.hits(process, r));
  rep.lhs = p.value;
  rep.lhs_se = p.se;
  rep.rhs = 2.0 * r;
  decide(rep, wb.config().z_crit);
  note_plugin(rep, p);
  note_divergence(rep, process, r);
  downgrade_pass_on_censoring(rep, p.censored_fraction, wb.config().max_censored);
  if (!upper_claimed(process)) mark_not_applicable(rep, kUpperMissing);
  return rep;
}

namespace {

BoundReport upper_ET_report(Workbench& wb, const Process& process, double r, std::string name) {
  auto rep = base_report(wb, process, r, std::move(name), "E[T_r] <= a^-1(2r)");
  const auto& env = wb.envelope(process, EnvelopeKind::a);
  const auto& hits = wb.hits(process, r);
  const auto inv = invert_monotone(env, 2.0 * r);
  const auto mt = hits.mean_tau();
  rep.lhs = mt.value;
  rep.lhs_se = mt.se;
  rep.rhs = inv.time;
  rep.rhs_se = inv.se;
  decide(rep, wb.config().z_crit);
  if (inv.infinite()) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("a_hat stays below 2r on the envelope grid; a^-1(2r) lies beyond t_max");
  }
  note_censoring(rep, hits.censored_fraction);
  note_divergence(rep, process, r);
  downgrade_pass_on_censoring(rep, hits.censored_fraction, wb.config().max_censored);
  if (!upper_claimed(process)) mark_not_applicable(rep, kUpperMissing);
  return rep;
}

}  // namespace

BoundReport check_upper_ET(Workbench& wb, const Process& process, double r) {
  return upper_ET_report(wb, process, r, "check_upper_ET");
}

std::vector<BoundReport> check_sandwich(Workbench& wb, const Process& process, double r) {
  const auto& env = wb.envelope(process, EnvelopeKind::a);
  const auto& hits = wb.hits(process, r);
  const auto gate = concavity_check(env, wb.config().z_crit);
  const double factor = gate.concave ? 1.0 : 0.5;
  auto lower = base_report(wb, process, r, "check_sandwich.lower",
                           gate.concave ? "a^-1(r/2) <= E[T_r] (concave form)" : "a^-1(r/2)/2 <= E[T_r]");
  const auto inv = invert_monotone(env, 0.5 * r);
  const auto mt = hits.mean_tau();
  lower.lhs = factor * inv.time;
  lower.lhs_se = factor * inv.se;
  lower.rhs = mt.value;
  lower.rhs_se = mt.se;
  decide(lower, wb.config().z_crit);
  if (inv.infinite()) {
    lower.verdict = Verdict::inconclusive;
    lower.notes.push_back("a_hat stays below r/2 on the envelope grid; extend t_max");
  }
  if (!gate.concave) lower.notes.push_back("concavity gate failed; using the general form");
  note_censoring(lower, hits.censored_fraction);
  downgrade_fail_on_censoring(lower, hits.censored_fraction, wb.config().max_censored);
  return {lower, upper_ET_report(wb, process, r, "check_sandwich.upper")};
}

std::vector<BoundReport> stability_ratio(Workbench& wb, const Process& process, std::span<const double> levels) {
  require(!levels.empty(), "stability_ratio needs at least one level");
  std::vector<BoundReport> out;
  for (double r : levels) {
    const auto p = plugin_mean_a_of_T(wb.envelope(process, EnvelopeKind::a), wb.hits(process, r));
    const double ratio = (p.value - r) / r;
    const double se = p.se / r;

    auto lo = base_report(wb, process, r, "stability_ratio.lower", "-1/2 <= (E[a(T_r)] - r)/r");
    lo.lhs = -0.5;
    lo.rhs = ratio;
    lo.rhs_se = se;
    decide(lo, wb.config().z_crit);
    note_plugin(lo, p);
    downgrade_fail_on_censoring(lo, p.censored_fraction, wb.config().max_censored);

    auto hi = base_report(wb, process, r, "stability_ratio.upper", "(E[a(T_r)] - r)/r <= 1");
    hi.lhs = ratio;
    hi.lhs_se = se;
    hi.rhs = 1.0;
    decide(hi, wb.config().z_crit);
    note_plugin(hi, p);
    downgrade_pass_on_censoring(hi, p.censored_fraction, wb.config().max_censored);
    if (!upper_claimed(process)) mark_not_applicable(hi, kUpperMissing);

    out.push_back(std::move(lo));
    out.push_back(std::move(hi));
  }
  return out;
}

BoundReport check_eta_lower(Workbench& wb, const Process& process, double r) {
  auto rep = base_report(wb, process, r, "check_eta_lower", "r/2 <= E[eta(T_r)]");
  rep.lhs = 0.5 * r;
  const auto& hits = wb.hits(process, r);
  const auto exact = exact_curve(process, CurveKind::eta);
  if (exact) {
    std::vector<double> vals;
    vals.reserve(hits.samples.size());
    for (const auto& s : hits.samples) vals.push_back((*exact)(s.tau));
    const auto ms = mean_se(vals);
    rep.rhs = ms.mean;
    rep.rhs_se = ms.se;
    rep.notes.push_back("eta exact: " + exact->note);
    const double c = (*exact)(1.0);
    if (c > 0.0 && std::fabs((*exact)(2.0) - 2.0 * c) <= 1e-12 * c) {
      const auto mt = hits.mean_tau();
      rep.notes.push_back("eta linear with slope " + fmt(c) + ": implies E[T_r] >= " + fmt(0.5 * r / c) +
                          "; E[T_hat_r] = " + fmt(mt.value) + " (se " + fmt(mt.se) + ")");
    }
  } else {
    const auto p = plugin_mean_a_of_T(wb.envelope(process, EnvelopeKind::eta), hits);
    rep.rhs = p.value;
    rep.rhs_se = p.se;
    note_plugin(rep, p);
  }
  decide(rep, wb.config().z_crit);
  note_censoring(rep, hits.censored_fraction);
  downgrade_fail_on_censoring(rep, hits.censored_fraction, wb.config().max_censored);
  if (!process.flags().submartingale) mark_not_applicable(rep, "process is not flagged as a submartingale");
  return rep;
}

BoundReport check_kappa_upper(Workbench& wb, const Process& process, double r) {
  auto rep = base_report(wb, process, r, "check_kappa_upper", "E[T_r] <= kappa^-1(2r)");
  const auto& hits = wb.hits(process, r);
  const auto mt = hits.mean_tau();
  rep.lhs = mt.value;
  rep.lhs_se = mt.se;
  Inversion inv;
  if (const auto exact = exact_curve(process, CurveKind::kappa)) {
    inv = invert_monotone(*exact, 2.0 * r);
    rep.notes.push_back("kappa exact: " + exact->note);
  } else {
    inv = invert_monotone(wb.envelope(process, EnvelopeKind::kappa), 2.0 * r);
  }
  rep.rhs = inv.time;
  rep.rhs_se = inv.se;
  decide(rep, wb.config().z_crit);
  if (inv.infinite() && !exact_curve(process, CurveKind::kappa)) {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("kappa_hat stays below 2r on the envelope grid; extend t_max");
  }
  note_censoring(rep, hits.censored_fraction);
  downgrade_pass_on_censoring(rep, hits.censored_fraction, wb.config().max_censored);
  if (!upper_claimed(process)) mark_not_applicable(rep, kUpperMissing);
  return rep;
}

double WalkSpec::mean() const noexcept { return step == Step::constant ? scale : 0.0; }

double WalkSpec::variance() const noexcept {
  switch (step) {
    case Step::rademacher:
    case Step::gaussian: return scale * scale;
    case Step::constant: return 0.0;
  }
  return 0.0;
}

std::string WalkSpec::describe() const {
  switch (step) {
    case Step::rademacher: return "rademacher(scale=" + fmt(scale) + ")";
    case Step::gaussian: return "gaussian(sd=" + fmt(scale) + ")";
    case Step::constant: return "constant(step=" + fmt(scale) + ")";
  }
  return "?";
}

StoppingRule StoppingRule::barriers(double upper, double lower) {
  require(upper > 0.0 && lower > 0.0, "barriers must be positive distances from 0");
  StoppingRule s;
  s.kind = Kind::barriers;
  s.upper = upper;
  s.lower = lower;
  return s;
}

StoppingRule StoppingRule::fixed(std::size_t n) {
  require(n >= 1, "horizon must be >= 1");
  StoppingRule s;
  s.kind = Kind::horizon;
  s.horizon = n;
  return s;
}

std::string StoppingRule::describe() const {
  if (kind == Kind::horizon) return "horizon(n=" + std::to_string(horizon) + ")";
  return "barriers(upper=" + fmt(upper) + ",lower=" + fmt(lower) + ")";
}

WaldReport wald_decoupling_demo(const WalkSpec& walk, const StoppingRule& rule, std::size_t n, std::uint64_t seed,
                                const Exec& exec, double z_crit) {
  require(n >= 2, "wald demo needs n >= 2");
  require(walk.scale > 0.0 && std::isfinite(walk.scale), "step scale must be positive");
  if (rule.kind == StoppingRule::Kind::barriers)
    require(rule.upper > 0.0 && rule.lower > 0.0, "barriers must be positive distances from 0");
  else
    require(rule.horizon >= 1, "horizon must be >= 1");

  auto step = [&](Stream& s) {
    switch (walk.step) {
      case WalkSpec::Step::rademacher: return (s() >> 63) ? walk.scale : -walk.scale;
      case WalkSpec::Step::gaussian: return walk.scale * s.normal();
      case WalkSpec::Step::constant: return walk.scale;
    }
    return 0.0;
  };

  std::vector<double> T(n), S(n), St(n);
  std::vector<char> censored(n, 0);
  const auto blocks = make_blocks(n);
  parallel_for(blocks.size(), exec, [&](std::size_t b) {
    for (std::size_t i = blocks[b].begin; i < blocks[b].end; ++i) {
      Stream s(StreamKey{seed, i, 0});
      Stream tilde(StreamKey{seed, i, 1});
      double sum = 0.0;
      std::size_t t = 0;
      if (rule.kind == StoppingRule::Kind::horizon) {
        for (t = 1; t <= rule.horizon; ++t) sum += step(s);
        t = rule.horizon;
      } else {
        bool hit = false;
        while (t < rule.max_steps) {
          ++t;
          sum += step(s);
          if (sum >= rule.upper || sum <= -rule.lower) {
            hit = true;
            break;
          }
        }
        censored[i] = !hit;
      }
      double sum_t = 0.0;
      for (std::size_t k = 0; k < t; ++k) sum_t += step(tilde);
      T[i] = static_cast<double>(t);
      S[i] = sum;
      St[i] = sum_t;
    }
  });

  WaldReport out;
  out.walk = walk;
  out.rule = rule;
  const auto n_cens = static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1));
  out.censored_fraction = static_cast<double>(n_cens) / static_cast<double>(n);
  if (out.censored_fraction > 0.001)
    fail(Errc::infinite_mean, "stopping rule " + rule.describe() + " leaves " + fmt(out.censored_fraction) +
                                  " of replicates unstopped after " + std::to_string(rule.max_steps) + " steps");

  std::vector<double> t_kept, s_kept, s2, st2, d1, d2, d3;
  std::set<double> support;
  const double mu = walk.mean(), var = walk.variance();
  for (std::size_t i = 0; i < n; ++i) {
    if (censored[i]) continue;
    t_kept.push_back(T[i]);
    s_kept.push_back(S[i]);
    s2.push_back(S[i] * S[i]);
    st2.push_back(St[i] * St[i]);
    d1.push_back(mu * T[i] - S[i]);
    d2.push_back(var * T[i] - S[i] * S[i]);
    d3.push_back(2.0 * St[i] * St[i] - S[i] * S[i]);
    if (support.size() < 32) support.insert(S[i]);
    if (rule.kind == StoppingRule::Kind::barriers && S[i] < rule.upper && S[i] > -rule.lower) out.support_ok = false;
  }
  out.n = t_kept.size();
  out.T = mean_se(t_kept);
  out.S_T = mean_se(s_kept);
  out.S_T2 = mean_se(s2);
  out.S_tilde2 = mean_se(st2);
  out.support.assign(support.begin(), support.end());

  Provenance prov{walk.describe() + ";" + rule.describe(), 0.0, n, seed, seed, ""};
  auto make = [&](std::string name, std::string claim, Relation rel, double lhs, double rhs,
                  const std::vector<double>& diffs) {
    BoundReport rep;
    rep.name = std::move(name);
    rep.claim = std::move(claim);
    rep.relation = rel;
    rep.lhs = lhs;
    rep.rhs = rhs;
    const auto d = mean_se(diffs);
    rep.lhs_se = rep.rhs_se = 0.0;
    decide(rep, z_crit, d.se);
    rep.notes.push_back("paired-difference se " + fmt(d.se));
    rep.hypotheses = {"iid steps", "finite variance"};
    rep.provenance = prov;
    if (n_cens > 0) rep.notes.push_back(std::to_string(n_cens) + " unstopped replicates dropped");
    return rep;
  };
  out.reports.push_back(make("wald_first", "E[S_T] = mu E[T]", Relation::eq, out.S_T.mean, mu * out.T.mean, d1));
  auto second = make("wald_second", "E[S_T^2] = sigma^2 E[T]", Relation::eq, out.S_T2.mean, var * out.T.mean, d2);
  if (mu != 0.0) mark_not_applicable(second, "the second identity needs zero-mean steps");
  out.reports.push_back(std::move(second));
  auto dec = make("wald_decoupling", "E[S_T^2] <= 2 E[S~_T^2]", Relation::le, out.S_T2.mean, 2.0 * out.S_tilde2.mean,
                  d3);
  dec.hypotheses.push_back("S~ independent of T");
  out.reports.push_back(std::move(dec));
  return out;
}

}  // namespace natclock
