// SPDX-License-Identifier: Apache-2.0
#include "natclock/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "natclock/error.hpp"
#include "natclock/format.hpp"

namespace natclock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double interpolate(const TimeGrid& grid, std::span<const double> ys, double t) {
  if (t <= grid[0]) return ys.front();
  if (t >= grid.t_max()) return ys.back();
  const std::size_t i = grid.floor_index(t);
  const double t0 = grid[i], t1 = grid[i + 1];
  const double w = (t - t0) / (t1 - t0);
  return ys[i] + w * (ys[i + 1] - ys[i]);
}

// Grid prefix that still covers t.
std::shared_ptr<const TimeGrid> truncate_grid(const TimeGrid& grid, double t) {
  std::size_t end = grid.floor_index(t) + 1;
  if (grid[end - 1] < t && end < grid.size()) ++end;
  end = std::max<std::size_t>(end, 2);
  std::vector<double> times(grid.times().begin(), grid.times().begin() + static_cast<std::ptrdiff_t>(end));
  return std::make_shared<const TimeGrid>(std::move(times), GridKind::custom);
}

}  // namespace

const char* envelope_kind_name(EnvelopeKind kind) noexcept {
  switch (kind) {
    case EnvelopeKind::a: return "a";
    case EnvelopeKind::kappa: return "kappa";
    case EnvelopeKind::eta: return "eta";
  }
  return "?";
}

double EnvelopeEstimate::at(double t) const { return interpolate(*grid, values, t); }
double EnvelopeEstimate::se_at(double t) const { return interpolate(*grid, se, t); }

EnvelopeEstimate estimate_envelope(const Process& process, std::shared_ptr<const TimeGrid> grid,
                                   std::size_t n_paths, EnvelopeKind kind, std::uint64_t master_seed,
                                   const Exec& exec) {
  require(grid != nullptr, "estimate_envelope needs a grid");
  require(n_paths >= 2, "estimate_envelope needs n_paths >= 2");
  const std::size_t m = grid->size();
  const auto blocks = make_blocks(n_paths);
  std::vector<std::vector<Moments>> partial(blocks.size(), std::vector<Moments>(m));

  parallel_for(blocks.size(), exec, [&](std::size_t b) {
    std::vector<double> buf(m);
    auto& acc = partial[b];
    for (std::size_t p = blocks[b].begin; p < blocks[b].end; ++p) {
      generate_path(process, *grid, StreamKey{master_seed, p, 0}, buf);
      double run = -kInf;
      for (std::size_t j = 0; j < m; ++j) {
        double v = buf[j];
        if (kind == EnvelopeKind::a) v = run = std::max(run, v);
        else if (kind == EnvelopeKind::eta) v = std::max(0.0, v);
        acc[j].add(v);
      }
    }
  });

  const auto total = merge_pairwise(std::span<const std::vector<Moments>>(partial));
  EnvelopeEstimate est;
  est.grid = std::move(grid);
  est.n_paths = n_paths;
  est.kind = kind;
  est.master_seed = master_seed;
  est.process = process.describe();
  est.values.resize(m);
  est.se.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    est.values[j] = total[j].mean;
    est.se[j] = total[j].se();
  }
  if (kind != EnvelopeKind::eta) {
    // cumulative max; for kappa the SE follows the running argmax
    for (std::size_t j = 1; j < m; ++j) {
      if (est.values[j] < est.values[j - 1]) {
        est.values[j] = est.values[j - 1];
        est.se[j] = est.se[j - 1];
      }
    }
    est.monotone_enforced = true;
  } else if (!process.flags().submartingale) {
    est.warnings.push_back("precondition-violation: eta requested for " + est.process +
                           ", which is not flagged as a submartingale");
  }
  return est;
}

std::vector<double> HittingBatch::taus() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.tau);
  return out;
}

MeanEstimate HittingBatch::mean_tau() const {
  const auto ms = mean_se(taus());
  return {ms.mean, ms.se, censored_fraction > 0.0};
}

HittingBatch sample_hitting_times(const Process& process, std::shared_ptr<const TimeGrid> grid, double r,
                                  std::size_t n_paths, std::uint64_t master_seed, const Exec& exec) {
  require(grid != nullptr, "sample_hitting_times needs a grid");
  require(r > 0.0, "hitting level must be positive");
  require(n_paths >= 1, "sample_hitting_times needs n_paths >= 1");
  HittingBatch batch;
  batch.level = r;
  batch.samples.resize(n_paths);
  const auto blocks = make_blocks(n_paths);
  parallel_for(blocks.size(), exec, [&](std::size_t b) {
    std::vector<double> buf(grid->size());
    for (std::size_t p = blocks[b].begin; p < blocks[b].end; ++p) {
      const std::size_t k = generate_path(process, *grid, StreamKey{master_seed, p, 0}, buf, r);
      batch.samples[p] = first_crossing(*grid, std::span<const double>(buf).first(k), r);
    }
  });
  const auto censored = std::count_if(batch.samples.begin(), batch.samples.end(),
                                      [](const HittingSample& s) { return s.censored; });
  batch.censored_fraction = static_cast<double>(censored) / static_cast<double>(n_paths);
  batch.grid = std::move(grid);
  batch.process = process.describe();
  batch.master_seed = master_seed;
  return batch;
}

bool Inversion::infinite() const noexcept { return std::isinf(time); }

Inversion invert_monotone(const TimeGrid& grid, std::span<const double> curve, double xi) {
  require(curve.size() == grid.size(), "curve length must match the grid");
  require(!std::isnan(xi), "inversion level must not be NaN");
  for (std::size_t i = 1; i < curve.size(); ++i)
    require(curve[i] >= curve[i - 1], "invert_monotone needs a nondecreasing curve");
  if (curve[0] >= xi) return {grid[0], true, 0.0};
  const auto it = std::lower_bound(curve.begin(), curve.end(), xi);
  if (it == curve.end()) return {kInf, false, 0.0};
  const auto i = static_cast<std::size_t>(it - curve.begin());
  const double c0 = curve[i - 1], c1 = curve[i];
  const double t = grid[i - 1] + (xi - c0) / (c1 - c0) * (grid[i] - grid[i - 1]);
  return {std::min(t, grid[i]), false, 0.0};
}

Inversion invert_monotone(const EnvelopeEstimate& curve, double xi) {
  auto inv = invert_monotone(*curve.grid, curve.values, xi);
  if (inv.infinite() || inv.at_first_point) return inv;
  const auto& g = *curve.grid;
  const std::size_t i = std::min(g.floor_index(inv.time), g.size() - 2);
  const double slope = (curve.values[i + 1] - curve.values[i]) / (g[i + 1] - g[i]);
  inv.se = slope > 0.0 ? curve.se_at(inv.time) / slope : kInf;
  return inv;
}

Inversion invert_monotone(const ClosedForm& curve, double xi) {
  require(!std::isnan(xi), "inversion level must not be NaN");
  if (curve(0.0) >= xi) return {0.0, true, 0.0};
  double lo = 0.0, hi = 1.0;
  while (curve(hi) < xi) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return {kInf, false, 0.0};
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (curve(mid) >= xi ? hi : lo) = mid;
  }
  return {hi, false, 0.0};
}

PluginEstimate plugin_mean_a_of_T(const EnvelopeEstimate& envelope, const HittingBatch& hits) {
  if (envelope.master_seed == hits.master_seed)
    fail(Errc::decoupling_violation, "envelope and hitting batch share master seed " +
                                         std::to_string(hits.master_seed) + "; E[a(T_r)] needs independent batches");
  require(!hits.samples.empty(), "plugin estimate needs hitting samples");
  PluginEstimate out;
  out.censored_fraction = hits.censored_fraction;
  out.lower_bound_only = hits.censored_fraction > 0.0;
  std::vector<double> vals, ses;
  vals.reserve(hits.samples.size());
  ses.reserve(hits.samples.size());
  const double env_end = envelope.grid->t_max();
  for (const auto& s : hits.samples) {
    if (s.tau > env_end) out.extrapolated = true;
    vals.push_back(envelope.at(s.tau));
    ses.push_back(envelope.se_at(s.tau));
  }
  const auto batch = mean_se(vals);
  // Envelope errors are positively correlated across t, so their average
  // bounds the envelope contribution to the mean's error.
  const double env_se = mean_se(ses).mean;
  out.value = batch.mean;
  out.se = std::sqrt(batch.se * batch.se + env_se * env_se);
  return out;
}

ConcavityResult concavity_check(const TimeGrid& grid, std::span<const double> curve, double tol) {
  require(curve.size() == grid.size(), "curve length must match the grid");
  require(curve.size() >= 3, "concavity check needs at least 3 points");
  ConcavityResult res;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double span = grid[i + 1] - grid[i - 1];
    const double chord = ((grid[i + 1] - grid[i]) * curve[i - 1] + (grid[i] - grid[i - 1]) * curve[i + 1]) / span;
    const double excess = chord - curve[i];
    const double scale = std::max({std::fabs(curve[i - 1]), std::fabs(curve[i]), std::fabs(curve[i + 1]), 1e-300});
    if (excess > tol * scale + 1e-12 * scale) res.concave = false;
    if (excess > res.max_violation) {
      res.max_violation = excess;
      res.worst_index = i;
    }
  }
  return res;
}

ConcavityResult concavity_check(const EnvelopeEstimate& curve, double z) {
  const auto& grid = *curve.grid;
  require(curve.values.size() >= 3, "concavity check needs at least 3 points");
  ConcavityResult res;
  for (std::size_t i = 1; i + 1 < curve.values.size(); ++i) {
    const double span = grid[i + 1] - grid[i - 1];
    const double wl = (grid[i + 1] - grid[i]) / span, wr = (grid[i] - grid[i - 1]) / span;
    const double excess = wl * curve.values[i - 1] + wr * curve.values[i + 1] - curve.values[i];
    const double noise = std::sqrt(std::pow(wl * curve.se[i - 1], 2) + std::pow(curve.se[i], 2) +
                                   std::pow(wr * curve.se[i + 1], 2));
    const double scale = std::max({std::fabs(curve.values[i - 1]), std::fabs(curve.values[i + 1]), 1e-300});
    if (excess > z * noise + 1e-12 * scale) res.concave = false;
    if (excess > res.max_violation) {
      res.max_violation = excess;
      res.worst_index = i;
    }
  }
  return res;
}

std::vector<RefinementRow> refinement_sweep(const Process& process, double r,
                                            const std::vector<std::shared_ptr<const TimeGrid>>& grids,
                                            double t_fixed, std::size_t n_paths, std::uint64_t master_seed,
                                            const Exec& exec) {
  require(!grids.empty(), "refinement sweep needs at least one grid");
  std::vector<RefinementRow> rows;
  for (const auto& g : grids) {
    require(g != nullptr, "refinement sweep grid is null");
    RefinementRow row;
    row.grid = g->describe();
    for (std::size_t i = 1; i < g->size(); ++i) row.step = std::max(row.step, (*g)[i] - (*g)[i - 1]);
    const auto hits = sample_hitting_times(process, g, r, n_paths, master_seed, exec);
    row.mean_tau = hits.mean_tau();
    row.censored_fraction = hits.censored_fraction;
    const auto env = estimate_envelope(process, truncate_grid(*g, t_fixed), n_paths, EnvelopeKind::a,
                                       derive_seed(master_seed, 1), exec);
    row.a_at_t = env.at(t_fixed);
    row.a_se = env.se_at(t_fixed);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace natclock
