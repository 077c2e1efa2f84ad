// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "natclock/grid.hpp"
#include "natclock/parallel.hpp"
#include "natclock/path.hpp"
#include "natclock/process.hpp"

namespace natclock {

enum class EnvelopeKind { a, kappa, eta };

const char* envelope_kind_name(EnvelopeKind kind) noexcept;

/// Monte Carlo estimate of a(t) = E[sup_{s<=t} X_s], kappa(t) = sup_{s<=t} E[X_s]
/// or eta(t) = E[X_t^+] on a grid, with pointwise standard errors.
struct EnvelopeEstimate {
  std::shared_ptr<const TimeGrid> grid;
  std::vector<double> values;
  std::vector<double> se;
  std::size_t n_paths = 0;
  EnvelopeKind kind = EnvelopeKind::a;
  bool monotone_enforced = false;
  std::uint64_t master_seed = 0;
  std::string process;
  std::vector<std::string> warnings;

  /// Linear interpolation; clamps to the end values outside the grid.
  double at(double t) const;
  double se_at(double t) const;
};

EnvelopeEstimate estimate_envelope(const Process& process, std::shared_ptr<const TimeGrid> grid,
                                   std::size_t n_paths, EnvelopeKind kind, std::uint64_t master_seed,
                                   const Exec& exec = {});

struct MeanEstimate {
  double value = 0.0;
  double se = 0.0;
  /// Censored samples were counted at the horizon, so value underestimates.
  bool lower_bound_only = false;
};

/// One hitting sample per path, path i drawn from StreamKey{seed, i, *}.
struct HittingBatch {
  double level = 0.0;
  std::vector<HittingSample> samples;
  double censored_fraction = 0.0;
  std::shared_ptr<const TimeGrid> grid;
  std::string process;
  std::uint64_t master_seed = 0;

  std::vector<double> taus() const;
  /// Mean of tau with censored samples at t_max.
  MeanEstimate mean_tau() const;
};

HittingBatch sample_hitting_times(const Process& process, std::shared_ptr<const TimeGrid> grid, double r,
                                  std::size_t n_paths, std::uint64_t master_seed, const Exec& exec = {});

struct Inversion {
  double time = 0.0;  // +inf when the curve never reaches xi
  /// The curve already reached xi at the first grid point; time is that point.
  bool at_first_point = false;
  /// Delta-method standard error from the curve's pointwise SE (0 if none).
  double se = 0.0;

  bool infinite() const noexcept;
};

/// inf{t : curve(t) >= xi} with linear interpolation inside the bracketing
/// grid interval. Throws invalid-argument if the curve decreases anywhere.
Inversion invert_monotone(const TimeGrid& grid, std::span<const double> curve, double xi);
Inversion invert_monotone(const EnvelopeEstimate& curve, double xi);
/// Bracketing bisection on a nondecreasing closed form.
Inversion invert_monotone(const ClosedForm& curve, double xi);

struct PluginEstimate {
  double value = 0.0;
  double se = 0.0;
  double censored_fraction = 0.0;
  bool lower_bound_only = false;
  /// Some tau fell beyond the envelope grid; the envelope was clamped there.
  bool extrapolated = false;
};

/// Decoupled estimate of E[a(T_r)]: the envelope from one batch evaluated at
/// the hitting times of an independent batch. Throws decoupling-violation when
/// both batches share a master seed.
PluginEstimate plugin_mean_a_of_T(const EnvelopeEstimate& envelope, const HittingBatch& hits);

struct ConcavityResult {
  bool concave = true;
  /// Largest chord-minus-value excess over interior points.
  double max_violation = 0.0;
  std::size_t worst_index = 0;
};

/// Chord test on consecutive triples: curve[i] >= linear interpolation of its
/// neighbours - tol * scale_i, scale_i being the largest magnitude in the triple.
ConcavityResult concavity_check(const TimeGrid& grid, std::span<const double> curve, double tol);
/// Noise-calibrated: slack_i = z * SE of the chord difference.
ConcavityResult concavity_check(const EnvelopeEstimate& curve, double z = 4.0);

struct RefinementRow {
  std::string grid;
  double step = 0.0;  // largest spacing
  MeanEstimate mean_tau;
  double censored_fraction = 0.0;
  double a_at_t = 0.0;
  double a_se = 0.0;
};

/// Mean hitting time and a_hat(t_fixed) over grids ordered coarse to fine.
std::vector<RefinementRow> refinement_sweep(const Process& process, double r,
                                            const std::vector<std::shared_ptr<const TimeGrid>>& grids,
                                            double t_fixed, std::size_t n_paths, std::uint64_t master_seed,
                                            const Exec& exec = {});

}  // namespace natclock
