// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "natclock/dist.hpp"
#include "natclock/grid.hpp"
#include "natclock/path.hpp"
#include "natclock/rng.hpp"

namespace natclock {

namespace zoo {

struct Ramp { double slope = 1.0; };
/// X_t = r * I(t >= U), U ~ Uniform(0,1).
struct SharpIndicator { double r = 1.0; };
/// X_t = t * Y.
struct LinearRandomSlope { NonnegDist y = NonnegDist::exponential(1.0); };
struct BrownianMotion {};
struct AbsBM {};
struct SquaredBM {};
/// |W_t^2 - t|
struct AbsW2MinusT {};
/// max(0, B_t)
struct PositivePartBM {};
/// max over d independent 3-d Brownian motions of their radius.
struct BesselMax3D { int d = 1; };
/// Number of arrivals in [0, t].
struct RenewalCount { NonnegDist interarrival = NonnegDist::exponential(1.0); };

}  // namespace zoo

using ProcessSpec = std::variant<zoo::Ramp, zoo::SharpIndicator, zoo::LinearRandomSlope, zoo::BrownianMotion,
                                 zoo::AbsBM, zoo::SquaredBM, zoo::AbsW2MinusT, zoo::PositivePartBM,
                                 zoo::BesselMax3D, zoo::RenewalCount>;

/// Declared hypotheses; these are data, never inferred from samples.
struct ProcessFlags {
  bool nonnegative = false;
  bool continuous_paths = false;
  bool time_homogeneous_markov = false;
  bool submartingale = false;
  /// Non-negative, continuous, and increment condition T_{kr} - T_{(k-1)r} >=_st T_r claimed.
  bool upper_bound_claimed = false;
  bool sharpness_witness = false;
  /// Values scale like sqrt(t) (or t for squared forms); prefers geometric grids.
  bool diffusive = false;
  std::string note;
};

/// Validated process specification. Immutable.
class Process {
 public:
  /// Validates parameters; throws invalid-argument on nonpositive ones.
  explicit Process(ProcessSpec spec);

  const ProcessSpec& spec() const noexcept { return spec_; }
  const ProcessFlags& flags() const noexcept { return flags_; }
  /// Lower-case variant name as used by the parser, e.g. "besselmax3d".
  std::string name() const;
  /// Canonical textual form, e.g. "besselmax3d(d=10)". Round-trips through parse_process.
  std::string describe() const;
  /// Number of independent coordinate streams a path consumes.
  std::size_t substreams() const noexcept;

  template <class T>
  const T* as() const noexcept { return std::get_if<T>(&spec_); }

 private:
  ProcessSpec spec_;
  ProcessFlags flags_;
};

/// Parses the compact form name(key=value,...), case-insensitive.
///   ramp(slope=1)  sharpindicator(r=1)  linslope(exp,rate=1)  bm  absbm
///   squaredbm  absw2minust  positivepartbm  besselmax3d(d=10)
///   renewal(exp,rate=1) | renewal(det,value=1) | renewal(pareto,alpha=2)
/// Distribution families: exp(rate), det(value), uniform(lo,hi),
/// pareto(alpha,scale), weibull(shape,scale).
/// Unknown names throw unsupported; bad parameters throw invalid-argument.
Process parse_process(const std::string& text);

/// One entry per zoo variant, in declaration order.
std::vector<Process> zoo_catalog();

/// Writes exact grid-point values of one path into out (size == grid.size()).
/// With stop_level set, generation stops after the first value >= stop_level;
/// the values written are a prefix of the full path for the same key.
/// Returns the number of values written.
std::size_t generate_path(const Process& process, const TimeGrid& grid, StreamKey key, std::span<double> out,
                          std::optional<double> stop_level = std::nullopt);

SamplePath sample_path(const Process& process, std::shared_ptr<const TimeGrid> grid, StreamKey key);

enum class CurveKind { a, kappa, eta, mean_T };

const char* curve_kind_name(CurveKind kind) noexcept;

/// Closed-form reference curve. For mean_T the argument is the level.
struct ClosedForm {
  CurveKind kind;
  std::function<double(double)> fn;
  std::string note;

  double operator()(double x) const { return fn(x); }
};

/// Returns the closed form where one is known, else nullopt.
std::optional<ClosedForm> exact_curve(const Process& process, CurveKind kind);

}  // namespace natclock
