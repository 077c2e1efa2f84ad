// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "natclock/bounds.hpp"
#include "natclock/dist.hpp"

namespace natclock {

/// Replicates of Y_d = max of d independent chi-square(3) draws, each the sum
/// of three squared standard normals.
struct ChiMaxSample {
  int d = 1;
  std::vector<double> y;

  MeanSe mean_y() const;
  MeanSe mean_sqrt_y() const;
};

/// Replicate i uses StreamKey{seed, i, 0}.
ChiMaxSample sample_chi_max(int d, std::size_t n_reps, std::uint64_t seed, const Exec& exec = {});

double harmonic(int d);

/// Published value of E[sqrt(Y_d)] for the twelve tabulated d, else nullopt.
std::optional<double> table1_published(int d);
/// The tabulated d values in order.
std::vector<int> table1_d_values();

struct Table1Row {
  int d = 0;
  double estimate = 0.0;
  double se = 0.0;
  double reference = 0.0;  // NaN when d is not tabulated
  double tolerance = 0.0;
  bool match = false;
};

struct Table1Result {
  std::vector<Table1Row> rows;
  /// Estimates nondecreasing in d on the sample. All d share the per-replicate
  /// streams, so this holds exactly, not only in expectation.
  bool monotone = true;
  std::size_t n_reps = 0;
};

/// Tolerance max(0.03, 5 sqrt(se^2 + se_pub^2)), se_pub = sd / sqrt(10^4).
Table1Result table1_reproduce(const std::vector<int>& d_list, std::size_t n_reps, std::uint64_t seed,
                              const Exec& exec = {});

/// E[Y_d] <= 3 H_d.
BoundReport chi_max_harmonic_bound(int d, std::size_t n_reps, std::uint64_t seed, const Exec& exec = {},
                                   double z_crit = 4.0);

struct BesselConfig {
  std::shared_ptr<const TimeGrid> grid;  // hitting grid, in units of r^2
  std::size_t n_paths = 20000;
  std::size_t n_chi = 100000;
  std::uint64_t seed = 1;
  double z_crit = 4.0;
  double max_censored = 0.001;
  Exec exec;
};

struct BesselBounds {
  int d = 1;
  double r = 1.0;
  MeanEstimate mean_T;
  double censored_fraction = 0.0;
  MeanSe mean_y;
  MeanSe mean_sqrt_y;
  /// lower_mean_y, lower_harmonic, upper_sqrt_y, lower_two_sided, harmonic_le_mean_y.
  std::vector<BoundReport> reports;
};

/// E[T_{r,d}] for BesselMax3D{d} against the chi-square based bounds.
BesselBounds bessel_bounds(int d, double r, const BesselConfig& config);

/// E[min of d iid single-sphere hitting times] >= r^2 / (3(d+1)), simulated
/// sphere by sphere; the report notes how it compares to r^2 / (6 H_d).
BoundReport min_iid_bound(int d, double r, const BesselConfig& config);

struct MomentRatio {
  int d1 = 1;
  int d2 = 1;
  double p = 1.0;
  MeanSe t1_p;    // E[T_{r,d1}^p]
  MeanSe t2_p;    // E[T_{r,d2}^p]
  MeanSe sup1_p;  // E[max_i |B^(i)_1|^p] over d1 spheres
  MeanSe sup2_p;
  double ratio_T = 0.0;    // t2_p / t1_p
  double ratio_sup = 0.0;  // sup1_p / sup2_p
  BoundReport report;      // NOT_APPLICABLE: displayed, never asserted
};

/// Side-by-side comparison of E[T_{d2}^p] / E[T_{d1}^p] with the ratio of
/// sup-moments at t = 1. No error control is claimed for the approximation.
MomentRatio moment_ratio(int d1, int d2, double p, double r, const BesselConfig& config);

struct OrderStatModel {
  enum class Dependence { independent, gaussian_copula, custom };

  std::vector<NonnegDist> marginals;
  Dependence dependence = Dependence::independent;
  double rho = 0.0;
  /// Custom joint sampler; must fill n values with the declared marginals.
  std::function<void(Stream&, std::span<double>)> sampler;
  bool tie_free = true;

  static OrderStatModel iid(NonnegDist marginal, std::size_t n);
  static OrderStatModel gaussian_copula(NonnegDist marginal, std::size_t n, double rho);
  std::size_t size() const noexcept { return marginals.size(); }
  void sample(Stream& s, std::span<double> out) const;
  std::string describe() const;
};

struct OrderStatResult {
  MeanSe estimate;  // E[sum_i F_i(T_(r))]
  std::size_t rejected = 0;
  double rejection_rate = 0.0;
  BoundReport report;
};

/// T_(r) is the r-th smallest coordinate. Replicates with tied coordinates are
/// rejected and counted.
OrderStatResult orderstats_check(const OrderStatModel& model, std::size_t r, std::size_t n_reps, std::uint64_t seed,
                                 const Exec& exec = {}, double z_crit = 4.0);

}  // namespace natclock
