// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "natclock/grid.hpp"

namespace natclock {

/// Process values on a time grid.
class SamplePath {
 public:
  SamplePath(std::shared_ptr<const TimeGrid> grid, std::vector<double> values);

  const TimeGrid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const TimeGrid>& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::shared_ptr<const TimeGrid> grid_;
  std::vector<double> values_;
};

/// First grid crossing of a level. When censored, tau is t_max.
struct HittingSample {
  double level = 0.0;
  double tau = 0.0;
  bool censored = true;
  std::size_t index = 0;             // grid index of the crossing (last index if censored)
  double grid_step_at_crossing = 0;  // t[index] - t[index-1]; 0 at the first grid point
};

/// out[i] = max(values[0..=i]).
std::vector<double> running_max(std::span<const double> values);
SamplePath running_max(const SamplePath& path);

/// Earliest grid time whose value is >= r; censored at t_max otherwise.
/// The first grid point is included, so a path starting at or above r crosses at t[0].
HittingSample first_crossing(const TimeGrid& grid, std::span<const double> values, double r);
HittingSample first_crossing(const SamplePath& path, double r);

/// Pointwise x/a for x < 0 and x/b for x >= 0, with a < 0 < b. A crossing of
/// level 1 by the output is an exit of the input from [a, b].
SamplePath transform_asymmetric(const SamplePath& path, double a, double b);

/// Pointwise X_t / g_t; g must be strictly positive and share the grid.
SamplePath transform_moving_boundary(const SamplePath& path, const SamplePath& boundary);

}  // namespace natclock
