// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "natclock/estimators.hpp"

namespace natclock {

enum class Verdict { pass, fail, inconclusive, not_applicable };

const char* verdict_name(Verdict v) noexcept;

/// "<=" claims lhs <= rhs; "==" claims equality within noise.
enum class Relation { le, eq };

struct Provenance {
  std::string process;
  double r = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t envelope_seed = 0;
  std::uint64_t hitting_seed = 0;
  std::string grid;
};

/// One inequality instance with its statistical verdict.
struct BoundReport {
  std::string name;
  std::string claim;
  Relation relation = Relation::le;
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_se = 0.0;
  double rhs_se = 0.0;
  double margin = 0.0;  // rhs - lhs
  double z = 0.0;       // margin / combined SE; +-inf when the SE is 0
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> hypotheses;
  std::vector<std::string> notes;
  Provenance provenance;
};

/// Fills margin, z and verdict for lhs (rel) rhs. When se_combined is
/// negative the SEs are combined as independent.
void decide(BoundReport& report, double z_crit, double se_combined = -1.0);

/// Marks the report NOT_APPLICABLE, keeping the computed values as a log.
void mark_not_applicable(BoundReport& report, const std::string& why);

struct CheckConfig {
  std::shared_ptr<const TimeGrid> grid;           // hitting-time grid
  std::shared_ptr<const TimeGrid> envelope_grid;  // defaults to grid
  std::size_t n_paths = 10000;
  std::size_t n_envelope_paths = 0;  // 0: same as n_paths
  std::uint64_t envelope_seed = 1;
  std::uint64_t hitting_seed = 2;
  double z_crit = 4.0;
  /// Upper-bound PASS verdicts need censoring at or below this fraction.
  double max_censored = 0.001;
  Exec exec;
};

/// Caches envelope and hitting batches so that a suite of checks on one
/// process shares its simulations. Envelope and hitting batches always use
/// different seeds.
class Workbench {
 public:
  explicit Workbench(CheckConfig config);

  const CheckConfig& config() const noexcept { return config_; }
  const EnvelopeEstimate& envelope(const Process& process, EnvelopeKind kind);
  const HittingBatch& hits(const Process& process, double r);
  Provenance provenance(const Process& process, double r) const;

 private:
  CheckConfig config_;
  std::map<std::string, EnvelopeEstimate> envelopes_;
  std::map<std::string, HittingBatch> batches_;
};

std::vector<std::string> hypothesis_list(const ProcessFlags& flags);

BoundReport check_lower_EaT(Workbench& wb, const Process& process, double r);
BoundReport check_concave_lower_ET(Workbench& wb, const Process& process, double r);
BoundReport check_upper_EaT(Workbench& wb, const Process& process, double r);
BoundReport check_upper_ET(Workbench& wb, const Process& process, double r);
/// Lower and upper halves; the lower uses a^-1(r/2) instead of a^-1(r/2)/2
/// when the concavity gate passes.
std::vector<BoundReport> check_sandwich(Workbench& wb, const Process& process, double r);
/// Two reports per level: -1/2 <= ratio and ratio <= 1.
std::vector<BoundReport> stability_ratio(Workbench& wb, const Process& process, std::span<const double> levels);
BoundReport check_eta_lower(Workbench& wb, const Process& process, double r);
BoundReport check_kappa_upper(Workbench& wb, const Process& process, double r);

struct WalkSpec {
  enum class Step { rademacher, gaussian, constant };
  Step step = Step::rademacher;
  /// Step size for rademacher and constant, standard deviation for gaussian.
  double scale = 1.0;

  double mean() const noexcept;
  double variance() const noexcept;
  std::string describe() const;
};

struct StoppingRule {
  enum class Kind { barriers, horizon };
  Kind kind = Kind::barriers;
  double upper = 3.0;  // stop when S_n >= upper
  double lower = 3.0;  // or S_n <= -lower
  std::size_t horizon = 0;
  std::size_t max_steps = 1000000;

  static StoppingRule barriers(double upper, double lower);
  static StoppingRule fixed(std::size_t n);
  std::string describe() const;
};

struct WaldReport {
  WalkSpec walk;
  StoppingRule rule;
  std::size_t n = 0;
  MeanSe T;
  MeanSe S_T;
  MeanSe S_T2;
  MeanSe S_tilde2;
  /// Distinct values of S_T, capped at 32 entries.
  std::vector<double> support;
  /// For barrier rules, every S_T lies outside (-lower, upper); for +-1 steps
  /// with integer barriers that means S_T is in {upper, -lower}.
  bool support_ok = true;
  double censored_fraction = 0.0;
  std::vector<BoundReport> reports;  // wald_first, wald_second, decoupling
};

/// Random walk S_n with stopping time T and an independent copy S~ (substream
/// 1) evaluated at T. Throws infinite-mean when more than 0.1% of replicates
/// exceed max_steps.
WaldReport wald_decoupling_demo(const WalkSpec& walk, const StoppingRule& rule, std::size_t n,
                                std::uint64_t seed, const Exec& exec = {}, double z_crit = 4.0);

}  // namespace natclock
