// SPDX-License-Identifier: Apache-2.0
#include "natclock/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

#include "natclock/error.hpp"
#include "natclock/format.hpp"

namespace natclock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_median(std::vector<double> xs) {
  const std::size_t n = xs.size();
  auto mid = xs.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(xs.begin(), mid);
  return 0.5 * (lo + hi);
}

// Half-width of the distribution-free band x_(n/2 - sqrt(n)/2) .. x_(n/2 + sqrt(n)/2).
double median_band_se(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(0.5 * n - 0.5 * std::sqrt(n))));
  const auto hi = static_cast<std::size_t>(std::min(n - 1.0, std::ceil(0.5 * n + 0.5 * std::sqrt(n))));
  return 0.5 * (xs[hi] - xs[lo]);
}

}  // namespace

double SurvivalCurve::operator()(double t) const {
  if (x.empty()) return 0.0;
  if (interp == Interp::step) {
    if (t < x.front()) return 1.0;
    const auto i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
    return sbar[i];
  }
  if (t <= x.front()) return sbar.front();
  if (t >= x.back()) return sbar.back();
  const auto i = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
  const double w = (t - x[i]) / (x[i + 1] - x[i]);
  return sbar[i] + w * (sbar[i + 1] - sbar[i]);
}

double SurvivalCurve::quantile(double p) const {
  require(!x.empty(), "quantile of an empty curve");
  const double target = 1.0 - p + 1e-12;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (sbar[i] <= target) return x[i];
  return x.back();
}

SurvivalCurve empirical_survival(std::span<const double> samples) {
  require(samples.size() >= 2, "empirical survival needs at least 2 samples");
  std::vector<double> xs(samples.begin(), samples.end());
  for (double v : xs) require(v >= 0.0 && std::isfinite(v), "survival samples must be finite and >= 0");
  std::sort(xs.begin(), xs.end());
  SurvivalCurve c;
  c.n_samples = xs.size();
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    c.x.push_back(xs[i]);
    c.sbar.push_back(static_cast<double>(xs.size() - j) / n);
    i = j;
  }
  return c;
}

SurvivalCurve kaplan_meier(std::span<const double> times, std::span<const char> censored) {
  require(times.size() == censored.size(), "times and censoring flags differ in length");
  require(times.size() >= 2, "Kaplan-Meier needs at least 2 observations");
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double v : times) require(v >= 0.0 && std::isfinite(v), "survival times must be finite and >= 0");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  SurvivalCurve c;
  c.n_samples = times.size();
  double s = 1.0;
  std::size_t at_risk = times.size();
  for (std::size_t i = 0; i < order.size();) {
    const double t = times[order[i]];
    std::size_t events = 0, total = 0;
    while (i < order.size() && times[order[i]] == t) {
      if (!censored[order[i]]) ++events;
      ++total;
      ++i;
    }
    if (events > 0) s *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
    at_risk -= total;
    c.x.push_back(t);
    c.sbar.push_back(s);
  }
  c.truncated_mass = c.sbar.back();
  return c;
}

SurvivalCurve tabulate_survival(const NonnegDist& dist, std::span<const double> points) {
  require(points.size() >= 2, "tabulation needs at least 2 points");
  SurvivalCurve c;
  c.interp = SurvivalCurve::Interp::linear;
  c.x.assign(points.begin(), points.end());
  for (std::size_t i = 1; i < c.x.size(); ++i) require(c.x[i] > c.x[i - 1], "tabulation points must increase");
  for (double t : c.x) c.sbar.push_back(dist.survival(t));
  c.truncated_mass = c.sbar.back();
  return c;
}

double dkw_epsilon(std::size_t n, double alpha) {
  require(n > 0, "DKW band needs n > 0");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

NbuResult nbu_check(const SurvivalCurve& curve, std::optional<std::vector<std::pair<double, double>>> probes,
                    std::optional<double> slack) {
  require(!curve.x.empty(), "nbu_check needs a non-empty curve");
  NbuResult res;
  res.slack = slack ? *slack : (curve.n_samples > 0 ? 3.0 * dkw_epsilon(curve.n_samples) : 1e-9);
  if (!probes) {
    std::vector<double> q;
    for (int k = 1; k <= 9; ++k) q.push_back(curve.quantile(0.1 * k));
    probes.emplace();
    for (double a : q)
      for (double b : q) probes->emplace_back(a, b);
  }
  for (const auto& [a, b] : *probes) {
    const double excess = curve(a + b) - curve(a) * curve(b);
    ++res.n_probes;
    if (excess > res.worst_excess) {
      res.worst_excess = excess;
      res.worst_x = a;
      res.worst_y = b;
    }
  }
  res.holds = res.worst_excess <= res.slack;
  return res;
}

StochOrderResult stochastic_order_check(const SurvivalCurve& large, const SurvivalCurve& small,
                                        std::optional<double> slack) {
  StochOrderResult res;
  auto band = [](const SurvivalCurve& c) { return c.n_samples > 0 ? dkw_epsilon(c.n_samples) : 0.0; };
  res.slack = slack ? *slack : band(large) + band(small);
  res.worst_deficit = -kInf;
  auto probe = [&](double t) {
    const double d = small(t) - large(t);
    if (d > res.worst_deficit) {
      res.worst_deficit = d;
      res.worst_x = t;
    }
  };
  for (double t : large.x) probe(t);
  for (double t : small.x) probe(t);
  res.holds = res.worst_deficit <= res.slack;
  return res;
}

SurvivalCurve stationary_renewal(const SurvivalCurve& curve, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    fail(Errc::infinite_mean, "stationary renewal distribution needs a finite positive mean; got " +
                                  format_double(mu));
  require(!curve.x.empty(), "stationary_renewal needs a non-empty curve");
  // Knots start at 0; before x[0] a step curve is 1 and a linear one is flat.
  std::vector<double> knots, vals;
  const double head = curve.interp == SurvivalCurve::Interp::step ? 1.0 : curve.sbar.front();
  if (curve.x.front() > 0.0) {
    knots.push_back(0.0);
    vals.push_back(head);
  }
  knots.insert(knots.end(), curve.x.begin(), curve.x.end());
  vals.insert(vals.end(), curve.sbar.begin(), curve.sbar.end());

  const std::size_t m = knots.size();
  std::vector<double> tail(m, 0.0);
  for (std::size_t i = m - 1; i-- > 0;) {
    const double dx = knots[i + 1] - knots[i];
    const double piece = curve.interp == SurvivalCurve::Interp::step ? vals[i] * dx : 0.5 * (vals[i] + vals[i + 1]) * dx;
    tail[i] = tail[i + 1] + piece;
  }
  SurvivalCurve g;
  g.interp = SurvivalCurve::Interp::linear;
  g.n_samples = curve.n_samples;
  g.x = std::move(knots);
  g.sbar.resize(m);
  for (std::size_t i = 0; i < m; ++i) g.sbar[i] = std::clamp(tail[i] / mu, 0.0, 1.0);
  for (std::size_t i = 1; i < m; ++i) g.sbar[i] = std::min(g.sbar[i], g.sbar[i - 1]);
  g.truncated_mass = curve.sbar.back();
  return g;
}

RenewalEstimate renewal_function(const RenewalModel& model, double t, std::size_t n_reps, std::uint64_t seed,
                                 const Exec& exec, double z_crit) {
  require(t >= 0.0 && t <= model.horizon, "renewal_function needs 0 <= t <= horizon");
  require(n_reps >= 2, "renewal_function needs n_reps >= 2");
  std::vector<double> counts(n_reps);
  const auto blocks = make_blocks(n_reps);
  parallel_for(blocks.size(), exec, [&](std::size_t b) {
    for (std::size_t i = blocks[b].begin; i < blocks[b].end; ++i) {
      Stream s(StreamKey{seed, i, 0});
      double clock = 0.0;
      std::size_t k = 0;
      while (true) {
        clock += model.interarrival.sample(s);
        if (clock > t) break;
        if (++k > 100000000) fail(Errc::infinite_mean, "renewal count exceeded 1e8 before t");
      }
      counts[i] = static_cast<double>(k);
    }
  });
  const auto ms = mean_se(counts);
  RenewalEstimate out;
  out.t = t;
  out.mean = ms.mean;
  out.se = ms.se;
  const double mu = model.interarrival.mean();
  out.bound = std::isfinite(mu) ? t / mu : 0.0;
  const bool nbu = model.assume_nbu || model.interarrival.nbu();
  out.bound_checked = nbu && std::isfinite(mu);

  auto& rep = out.report;
  rep.name = "renewal_function";
  rep.claim = "M(t) <= t/mu";
  rep.lhs = ms.mean;
  rep.lhs_se = ms.se;
  rep.rhs = out.bound;
  rep.hypotheses = {std::string("nbu=") + (nbu ? "true" : "false"),
                    std::string("finite_mean=") + (std::isfinite(mu) ? "true" : "false")};
  rep.provenance = {"renewal(" + model.interarrival.describe() + ")", t, n_reps, seed, seed, ""};
  decide(rep, z_crit);
  if (!std::isfinite(mu)) mark_not_applicable(rep, "interarrival mean is infinite");
  else if (!nbu) mark_not_applicable(rep, "interarrivals not known to be NBU");
  return out;
}

IncrementOrderResult increment_order_diagnostic(const Process& process, std::shared_ptr<const TimeGrid> grid,
                                                double r, std::size_t n_paths, std::uint64_t seed,
                                                const Exec& exec) {
  require(grid != nullptr, "increment diagnostic needs a grid");
  require(r > 0.0, "level must be positive");
  require(n_paths >= 2, "increment diagnostic needs n_paths >= 2");
  std::vector<double> t1(n_paths), inc(n_paths);
  std::vector<char> c1(n_paths), c2(n_paths);
  const auto blocks = make_blocks(n_paths);
  parallel_for(blocks.size(), exec, [&](std::size_t b) {
    std::vector<double> buf(grid->size());
    for (std::size_t p = blocks[b].begin; p < blocks[b].end; ++p) {
      const std::size_t k = generate_path(process, *grid, StreamKey{seed, p, 0}, buf, 2.0 * r);
      const std::span<const double> vals(buf.data(), k);
      const auto h1 = first_crossing(*grid, vals, r);
      const auto h2 = first_crossing(*grid, vals, 2.0 * r);
      t1[p] = h1.tau;
      c1[p] = h1.censored;
      inc[p] = h2.tau - h1.tau;
      c2[p] = h2.censored;
    }
  });
  IncrementOrderResult out;
  out.r = r;
  out.censored_r = static_cast<double>(std::count(c1.begin(), c1.end(), 1)) / static_cast<double>(n_paths);
  out.censored_2r = static_cast<double>(std::count(c2.begin(), c2.end(), 1)) / static_cast<double>(n_paths);
  const auto km_t = kaplan_meier(t1, c1);
  const auto km_inc = kaplan_meier(inc, c2);
  out.order = stochastic_order_check(km_inc, km_t);
  return out;
}

WplusReport wplus_counterexample(const WplusConfig& cfg) {
  require(cfg.r > 0.0, "level must be positive");
  require(cfg.median_step > 0.0 && cfg.median_horizon > cfg.median_step, "median grid is empty");
  require(cfg.median_paths >= 2 && cfg.ladder_paths >= 2, "need at least 2 paths");
  require(!cfg.ladder.empty(), "ladder needs at least one horizon");
  const Process wplus{zoo::PositivePartBM{}};
  WplusReport out;
  out.r = cfg.r;

  // Median on nested grids: the coarse grid is every 4th fine point.
  const auto n_fine = static_cast<std::size_t>(std::llround(cfg.median_horizon / cfg.median_step)) / 4 * 4 + 1;
  const auto fine = std::make_shared<const TimeGrid>(make_uniform_grid(cfg.median_step * (n_fine - 1), n_fine));
  std::vector<double> tau_f(cfg.median_paths), tau_c(cfg.median_paths);
  const std::uint64_t median_seed = derive_seed(cfg.seed, 1);
  const auto blocks = make_blocks(cfg.median_paths);
  parallel_for(blocks.size(), cfg.exec, [&](std::size_t b) {
    std::vector<double> buf(n_fine);
    for (std::size_t p = blocks[b].begin; p < blocks[b].end; ++p) {
      const StreamKey key{median_seed, p, 0};
      std::size_t k = generate_path(wplus, *fine, key, buf, cfg.r);
      const auto hf = first_crossing(*fine, std::span<const double>(buf.data(), k), cfg.r);
      tau_f[p] = hf.censored ? kInf : hf.tau;
      if (!hf.censored && hf.index % 4 == 0) {
        tau_c[p] = hf.tau;
        continue;
      }
      if (!hf.censored) k = generate_path(wplus, *fine, key, buf);
      tau_c[p] = kInf;
      for (std::size_t i = 0; i < k; i += 4)
        if (buf[i] >= cfg.r) {
          tau_c[p] = (*fine)[i];
          break;
        }
    }
  });
  out.median_fine = sample_median(tau_f);
  out.median_coarse = sample_median(tau_c);
  out.median = 2.0 * out.median_fine - out.median_coarse;
  std::vector<double> per_block;
  for (const auto& blk : blocks) {
    const auto b0 = static_cast<std::ptrdiff_t>(blk.begin), b1 = static_cast<std::ptrdiff_t>(blk.end);
    const double mf = sample_median(std::vector<double>(tau_f.begin() + b0, tau_f.begin() + b1));
    const double mc = sample_median(std::vector<double>(tau_c.begin() + b0, tau_c.begin() + b1));
    per_block.push_back(2.0 * mf - mc);
  }
  const bool blocks_finite = std::all_of(per_block.begin(), per_block.end(), [](double v) { return std::isfinite(v); });
  if (per_block.size() > 1 && blocks_finite) out.median_se = mean_se(per_block).se;
  else out.median_se = 2.0 * median_band_se(tau_f) + median_band_se(tau_c);  // sd(2A - B) <= 2 sd(A) + sd(B)
  out.median_reference = reflection_median(cfg.r);

  // Divergence ladder: one batch on a geometric grid reaching the largest
  // horizon, read off at each rung so the rungs are coupled.
  const double t_top = *std::max_element(cfg.ladder.begin(), cfg.ladder.end());
  const auto geo = std::make_shared<const TimeGrid>(make_geometric_grid(1e-4, t_top, cfg.ladder_points));
  const auto hits = sample_hitting_times(wplus, geo, cfg.r, cfg.ladder_paths, derive_seed(cfg.seed, 2), cfg.exec);
  std::vector<double> rungs = cfg.ladder;
  std::sort(rungs.begin(), rungs.end());
  for (double tm : rungs) {
    std::vector<double> v;
    v.reserve(hits.samples.size());
    std::size_t beyond = 0;
    for (const auto& s : hits.samples) {
      const bool over = s.censored || s.tau > tm;
      beyond += over;
      v.push_back(std::sqrt(over ? tm : s.tau));
    }
    WplusLadderRow row;
    row.t_max = tm;
    row.sqrt_T = mean_se(v);
    row.a_of_T = std::sqrt(2.0 / M_PI) * row.sqrt_T.mean;
    row.censored_fraction = static_cast<double>(beyond) / static_cast<double>(hits.samples.size());
    out.ladder.push_back(row);
  }
  out.strictly_increasing = true;
  for (std::size_t i = 1; i < out.ladder.size(); ++i)
    if (!(out.ladder[i].sqrt_T.mean > out.ladder[i - 1].sqrt_T.mean)) out.strictly_increasing = false;

  out.increment = increment_order_diagnostic(wplus, geo, cfg.r, cfg.ladder_paths, derive_seed(cfg.seed, 3), cfg.exec);

  CheckConfig cc;
  cc.grid = std::make_shared<const TimeGrid>(make_geometric_grid(1e-3, 100.0, 1000));
  cc.n_paths = std::max<std::size_t>(2, cfg.ladder_paths / 4);
  cc.envelope_seed = derive_seed(cfg.seed, 4);
  cc.hitting_seed = derive_seed(cfg.seed, 5);
  cc.exec = cfg.exec;
  Workbench wb(cc);
  out.upper = check_upper_EaT(wb, wplus, cfg.r);
  return out;
}

double reflection_median(double r) {
  require(r > 0.0, "level must be positive");
  const double u = boost::math::erf_inv(0.5);
  return r * r / (2.0 * u * u);
}

}  // namespace natclock
