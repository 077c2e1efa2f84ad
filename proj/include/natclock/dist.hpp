// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "natclock/rng.hpp"

namespace natclock {

/// Non-negative distribution used for random slopes, renewal interarrivals
/// and order-statistics marginals.
class NonnegDist {
 public:
  enum class Family { exponential, deterministic, uniform, pareto, weibull, empirical, custom };

  static NonnegDist exponential(double rate);
  static NonnegDist deterministic(double value);
  static NonnegDist uniform(double lo, double hi);
  /// Lomax form: survival (1 + x/scale)^-alpha.
  static NonnegDist pareto(double alpha, double scale = 1.0);
  static NonnegDist weibull(double shape, double scale = 1.0);
  /// Resamples uniformly from the given non-negative values.
  static NonnegDist empirical(std::vector<double> samples);
  /// User hook; mean may be +inf. Survival/quantile are unavailable.
  static NonnegDist custom(std::string name, std::function<double(Stream&)> sampler, double mean,
                           bool nbu = false);

  double sample(Stream& s) const;
  double mean() const noexcept { return mean_; }
  bool has_finite_mean() const noexcept;
  /// P(X > x). Throws unsupported for custom distributions.
  double survival(double x) const;
  double cdf(double x) const { return 1.0 - survival(x); }
  /// Inverse CDF for p in (0,1). Throws unsupported where not available.
  double quantile(double p) const;
  /// Mean of 1/X, +inf where it diverges.
  double mean_inverse() const;

  /// New-better-than-used, known analytically for the family.
  bool nbu() const noexcept { return nbu_; }
  bool continuous() const noexcept;
  Family family() const noexcept { return family_; }
  double param(std::size_t i) const noexcept { return params_[i]; }
  std::string describe() const;

 private:
  NonnegDist(Family f, std::vector<double> params, double mean, bool nbu)
      : family_(f), params_(std::move(params)), mean_(mean), nbu_(nbu) {}

  Family family_;
  std::vector<double> params_;
  double mean_;
  bool nbu_;
  std::string name_;
  std::function<double(Stream&)> sampler_;
  std::shared_ptr<const std::vector<double>> samples_;
};

}  // namespace natclock
