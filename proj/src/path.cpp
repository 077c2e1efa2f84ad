// SPDX-License-Identifier: Apache-2.0
#include "natclock/path.hpp"

#include <algorithm>
#include <cmath>

#include "natclock/error.hpp"

namespace natclock {

SamplePath::SamplePath(std::shared_ptr<const TimeGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, "sample path needs a grid");
  require(values_.size() == grid_->size(), "sample path length must match its grid");
}

std::vector<double> running_max(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::max(out[i], out[i - 1]);
  return out;
}

SamplePath running_max(const SamplePath& path) {
  return SamplePath(path.grid_ptr(), running_max(path.values()));
}

HittingSample first_crossing(const TimeGrid& grid, std::span<const double> values, double r) {
  require(r > 0.0, "crossing level must be positive");
  require(values.size() <= grid.size(), "path is longer than its grid");
  HittingSample hit;
  hit.level = r;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= r) {
      hit.tau = grid[i];
      hit.censored = false;
      hit.index = i;
      hit.grid_step_at_crossing = i == 0 ? 0.0 : grid[i] - grid[i - 1];
      return hit;
    }
  }
  hit.tau = grid.t_max();
  hit.censored = true;
  hit.index = grid.size() - 1;
  hit.grid_step_at_crossing = grid[hit.index] - grid[hit.index - 1];
  return hit;
}

HittingSample first_crossing(const SamplePath& path, double r) {
  return first_crossing(path.grid(), path.values(), r);
}

SamplePath transform_asymmetric(const SamplePath& path, double a, double b) {
  require(a < 0.0, "asymmetric transform needs a < 0");
  require(b > 0.0, "asymmetric transform needs b > 0");
  std::vector<double> out(path.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = path[i];
    out[i] = x < 0.0 ? x / a : x / b;
  }
  return SamplePath(path.grid_ptr(), std::move(out));
}

SamplePath transform_moving_boundary(const SamplePath& path, const SamplePath& boundary) {
  require(path.grid() == boundary.grid(), "moving boundary must share the path's grid");
  std::vector<double> out(path.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    require(boundary[i] > 0.0 && std::isfinite(boundary[i]), "moving boundary must be strictly positive");
    out[i] = path[i] / boundary[i];
  }
  return SamplePath(path.grid_ptr(), std::move(out));
}

}  // namespace natclock
