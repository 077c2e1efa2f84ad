// SPDX-License-Identifier: Apache-2.0
#include "natclock/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "natclock/error.hpp"
#include "natclock/format.hpp"
#include "natclock/parallel.hpp"

namespace natclock {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

NonnegDist NonnegDist::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential rate must be positive");
  return NonnegDist(Family::exponential, {rate}, 1.0 / rate, true);
}

NonnegDist NonnegDist::deterministic(double value) {
  require(value > 0.0 && std::isfinite(value), "deterministic value must be positive");
  return NonnegDist(Family::deterministic, {value}, value, true);
}

NonnegDist NonnegDist::uniform(double lo, double hi) {
  require(lo >= 0.0 && hi > lo && std::isfinite(hi), "uniform needs 0 <= lo < hi");
  return NonnegDist(Family::uniform, {lo, hi}, 0.5 * (lo + hi), true);
}

NonnegDist NonnegDist::pareto(double alpha, double scale) {
  require(alpha > 0.0 && scale > 0.0, "pareto alpha and scale must be positive");
  return NonnegDist(Family::pareto, {alpha, scale}, alpha > 1.0 ? scale / (alpha - 1.0) : kInf, false);
}

NonnegDist NonnegDist::weibull(double shape, double scale) {
  require(shape > 0.0 && scale > 0.0, "weibull shape and scale must be positive");
  return NonnegDist(Family::weibull, {shape, scale}, scale * std::tgamma(1.0 + 1.0 / shape), shape >= 1.0);
}

NonnegDist NonnegDist::empirical(std::vector<double> samples) {
  require(!samples.empty(), "empirical distribution needs samples");
  for (double x : samples) require(x >= 0.0 && std::isfinite(x), "empirical samples must be finite and >= 0");
  std::sort(samples.begin(), samples.end());
  const double mean = mean_se(samples).mean;
  NonnegDist d(Family::empirical, {}, mean, false);
  d.samples_ = std::make_shared<const std::vector<double>>(std::move(samples));
  return d;
}

NonnegDist NonnegDist::custom(std::string name, std::function<double(Stream&)> sampler, double mean, bool nbu) {
  require(static_cast<bool>(sampler), "custom distribution needs a sampler");
  require(mean > 0.0, "custom distribution mean must be positive (may be inf)");
  NonnegDist d(Family::custom, {}, mean, nbu);
  d.name_ = std::move(name);
  d.sampler_ = std::move(sampler);
  return d;
}

bool NonnegDist::has_finite_mean() const noexcept { return std::isfinite(mean_); }

bool NonnegDist::continuous() const noexcept {
  return family_ != Family::deterministic && family_ != Family::empirical && family_ != Family::custom;
}

double NonnegDist::sample(Stream& s) const {
  switch (family_) {
    case Family::exponential: return s.exponential() / params_[0];
    case Family::deterministic: return params_[0];
    case Family::uniform: return params_[0] + (params_[1] - params_[0]) * s.uniform();
    case Family::pareto: return params_[1] * std::expm1(s.exponential() / params_[0]);
    case Family::weibull: return params_[1] * std::pow(s.exponential(), 1.0 / params_[0]);
    case Family::empirical: {
      const auto& xs = *samples_;
      const auto i = static_cast<std::size_t>(s.uniform() * static_cast<double>(xs.size()));
      return xs[std::min(i, xs.size() - 1)];
    }
    case Family::custom: {
      const double x = sampler_(s);
      require(x >= 0.0, "custom sampler produced a negative value");
      return x;
    }
  }
  return 0.0;
}

double NonnegDist::survival(double x) const {
  if (x < 0.0) return 1.0;
  switch (family_) {
    case Family::exponential: return std::exp(-params_[0] * x);
    case Family::deterministic: return x < params_[0] ? 1.0 : 0.0;
    case Family::uniform:
      if (x <= params_[0]) return 1.0;
      if (x >= params_[1]) return 0.0;
      return (params_[1] - x) / (params_[1] - params_[0]);
    case Family::pareto: return std::pow(1.0 + x / params_[1], -params_[0]);
    case Family::weibull: return std::exp(-std::pow(x / params_[1], params_[0]));
    case Family::empirical: {
      const auto& xs = *samples_;
      const auto above = xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
      return static_cast<double>(above) / static_cast<double>(xs.size());
    }
    case Family::custom: break;
  }
  fail(Errc::unsupported, "survival function not available for " + describe());
}

double NonnegDist::quantile(double p) const {
  require(p > 0.0 && p < 1.0, "quantile needs p in (0,1)");
  switch (family_) {
    case Family::exponential: return -std::log1p(-p) / params_[0];
    case Family::uniform: return params_[0] + p * (params_[1] - params_[0]);
    case Family::pareto: return params_[1] * std::expm1(-std::log1p(-p) / params_[0]);
    case Family::weibull: return params_[1] * std::pow(-std::log1p(-p), 1.0 / params_[0]);
    default: break;
  }
  fail(Errc::unsupported, "quantile function not available for " + describe());
}

double NonnegDist::mean_inverse() const {
  switch (family_) {
    case Family::deterministic: return 1.0 / params_[0];
    case Family::uniform:
      return params_[0] > 0.0 ? std::log(params_[1] / params_[0]) / (params_[1] - params_[0]) : kInf;
    case Family::weibull:
      return params_[0] > 1.0 ? std::tgamma(1.0 - 1.0 / params_[0]) / params_[1] : kInf;
    case Family::exponential:
    case Family::pareto: return kInf;  // positive density at 0
    default: break;
  }
  fail(Errc::unsupported, "E[1/X] not available for " + describe());
}

std::string NonnegDist::describe() const {
  switch (family_) {
    case Family::exponential: return "exp,rate=" + format_double(params_[0]);
    case Family::deterministic: return "det,value=" + format_double(params_[0]);
    case Family::uniform: return "uniform,lo=" + format_double(params_[0]) + ",hi=" + format_double(params_[1]);
    case Family::pareto: return "pareto,alpha=" + format_double(params_[0]) + ",scale=" + format_double(params_[1]);
    case Family::weibull: return "weibull,shape=" + format_double(params_[0]) + ",scale=" + format_double(params_[1]);
    case Family::empirical: return "empirical,n=" + std::to_string(samples_->size());
    case Family::custom: return "custom,name=" + name_;
  }
  return "?";
}

}  // namespace natclock
