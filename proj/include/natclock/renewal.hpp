// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "natclock/bounds.hpp"
#include "natclock/dist.hpp"

namespace natclock {

/// Survival function P(X > x) on a sorted support.
///
/// Step curves are right-continuous: value sbar[i] on [x[i], x[i+1]), 1 before
/// x[0]. Linear curves interpolate between tabulated points.
struct SurvivalCurve {
  enum class Interp { step, linear };

  std::vector<double> x;
  std::vector<double> sbar;
  std::size_t n_samples = 0;  // 0 for tabulated curves
  Interp interp = Interp::step;
  /// Survival left beyond the last support point (integration truncated there).
  double truncated_mass = 0.0;

  double operator()(double t) const;
  /// Smallest support point with survival <= 1 - p.
  double quantile(double p) const;
};

/// Right-continuous empirical survival. Needs n >= 2 non-negative samples.
SurvivalCurve empirical_survival(std::span<const double> samples);
/// Product-limit estimate with right censoring.
SurvivalCurve kaplan_meier(std::span<const double> times, std::span<const char> censored);
/// Tabulates dist.survival on the given points as a linear curve.
SurvivalCurve tabulate_survival(const NonnegDist& dist, std::span<const double> points);

/// DKW band half-width sqrt(ln(2/alpha) / (2n)).
double dkw_epsilon(std::size_t n, double alpha = 1e-3);

struct NbuResult {
  bool holds = true;
  double worst_x = 0.0;
  double worst_y = 0.0;
  /// max over probes of sbar(x+y) - sbar(x) sbar(y).
  double worst_excess = -1.0;
  double slack = 0.0;
  std::size_t n_probes = 0;
};

/// Checks sbar(x+y) <= sbar(x) sbar(y) + slack over probe pairs. Default
/// probes: decile x decile of the curve; default slack: 3 * DKW epsilon
/// (0 for tabulated curves).
NbuResult nbu_check(const SurvivalCurve& curve, std::optional<std::vector<std::pair<double, double>>> probes = {},
                    std::optional<double> slack = {});

struct StochOrderResult {
  bool holds = true;
  double worst_x = 0.0;
  /// max over x of sbar_small(x) - sbar_large(x).
  double worst_deficit = 0.0;
  double slack = 0.0;
};

/// One-sided dominance: large >=_st small, i.e. sbar_large >= sbar_small - slack
/// at every support point of either curve. Default slack: sum of DKW bands.
StochOrderResult stochastic_order_check(const SurvivalCurve& large, const SurvivalCurve& small,
                                        std::optional<double> slack = {});

/// Gbar(t) = (1/mu) int_t^inf sbar. Exact for step curves, trapezoid for
/// linear ones; the integral stops at the last support point and the
/// remaining survival is reported as truncated_mass. Throws infinite-mean
/// unless mu is finite and positive.
SurvivalCurve stationary_renewal(const SurvivalCurve& curve, double mu);

struct RenewalModel {
  NonnegDist interarrival;
  double horizon = 10.0;
  /// NBU established elsewhere (e.g. by nbu_check on the same samples).
  bool assume_nbu = false;
};

struct RenewalEstimate {
  double t = 0.0;
  double mean = 0.0;  // M_hat(t), renewals in [0, t]
  double se = 0.0;
  double bound = 0.0;  // t / mu
  bool bound_checked = false;
  BoundReport report;
};

/// Mean renewal count by simulation. For NBU interarrivals with finite mean
/// the report checks M(t) <= t/mu; otherwise it is NOT_APPLICABLE.
RenewalEstimate renewal_function(const RenewalModel& model, double t, std::size_t n_reps, std::uint64_t seed,
                                 const Exec& exec = {}, double z_crit = 4.0);

struct IncrementOrderResult {
  double r = 0.0;
  StochOrderResult order;  // T_2r - T_r >=_st T_r
  double censored_r = 0.0;
  double censored_2r = 0.0;
};

/// Empirical evidence for the increment condition at k=2, from the same paths.
IncrementOrderResult increment_order_diagnostic(const Process& process, std::shared_ptr<const TimeGrid> grid,
                                                double r, std::size_t n_paths, std::uint64_t seed,
                                                const Exec& exec = {});

struct WplusConfig {
  double r = 1.0;
  /// Median: paths on a uniform grid of this step and a grid 4x coarser
  /// observed on the same paths; the two medians are extrapolated in sqrt(step).
  double median_step = 1e-3;
  double median_horizon = 4.0;
  std::size_t median_paths = 200000;
  std::vector<double> ladder = {10.0, 100.0, 1000.0};
  std::size_t ladder_points = 4000;
  std::size_t ladder_paths = 20000;
  std::uint64_t seed = 1;
  Exec exec;
};

struct WplusLadderRow {
  double t_max = 0.0;
  MeanSe sqrt_T;  // E[sqrt(T_r ^ t_max)]
  double a_of_T = 0.0;  // sqrt(2/pi) * E[sqrt(T_r ^ t_max)]
  double censored_fraction = 0.0;
};

struct WplusReport {
  double r = 1.0;
  double median_fine = 0.0;
  double median_coarse = 0.0;
  double median = 0.0;  // extrapolated
  double median_se = 0.0;
  double median_reference = 0.0;  // reflection_median(r)
  std::vector<WplusLadderRow> ladder;
  bool strictly_increasing = false;
  IncrementOrderResult increment;
  BoundReport upper;  // check_upper_EaT, NOT_APPLICABLE by construction
};

WplusReport wplus_counterexample(const WplusConfig& config);

/// Median of the first passage of Brownian motion to r, from
/// P(T_r > t) = erf(r / sqrt(2t)).
double reflection_median(double r);

}  // namespace natclock
