// SPDX-License-Identifier: Apache-2.0
#include "natclock/grid.hpp"

#include <algorithm>
#include <cmath>

#include "natclock/error.hpp"
#include "natclock/format.hpp"

namespace natclock {

TimeGrid::TimeGrid(std::vector<double> times, GridKind kind) : times_(std::move(times)), kind_(kind) {
  require(times_.size() >= 2, "time grid needs at least 2 points");
  require(std::isfinite(times_[0]) && times_[0] >= 0.0, "time grid must start at a finite time >= 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    require(std::isfinite(times_[i]), "time grid contains a non-finite time");
    require(times_[i] > times_[i - 1], "time grid must be strictly increasing");
  }
}

std::size_t TimeGrid::floor_index(double t) const noexcept {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::string TimeGrid::describe() const {
  switch (kind_) {
    case GridKind::uniform:
      return "uniform:" + format_double(t_max()) + ":" + std::to_string(size());
    case GridKind::geometric:
      return "geom:" + format_double(times_.size() > 2 ? times_[1] : t_max()) + ":" +
             format_double(t_max()) + ":" + std::to_string(size());
    case GridKind::custom:
      break;
  }
  return "custom:" + format_double(t_max()) + ":" + std::to_string(size());
}

TimeGrid make_uniform_grid(double t_max, std::size_t n_points) {
  require(std::isfinite(t_max) && t_max > 0.0, "grid t_max must be positive");
  require(n_points >= 2, "grid needs n_points >= 2");
  std::vector<double> t(n_points);
  const double denom = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) t[i] = t_max * (static_cast<double>(i) / denom);
  t.back() = t_max;
  return TimeGrid(std::move(t), GridKind::uniform);
}

TimeGrid make_geometric_grid(double t_min, double t_max, std::size_t n_points) {
  require(std::isfinite(t_max) && t_max > 0.0, "grid t_max must be positive");
  require(n_points >= 2, "grid needs n_points >= 2");
  require(t_min > 0.0 && t_min < t_max, "geometric grid needs 0 < t_min < t_max");
  std::vector<double> t{0.0};
  if (n_points == 2) {
    t.push_back(t_max);
  } else {
    const std::size_t m = n_points - 1;  // positive points
    const double span = t_max / t_min;
    for (std::size_t k = 0; k < m; ++k)
      t.push_back(t_min * std::pow(span, static_cast<double>(k) / static_cast<double>(m - 1)));
    t[1] = t_min;
    t.back() = t_max;
  }
  return TimeGrid(std::move(t), GridKind::geometric);
}

TimeGrid parse_grid(const std::string& text) {
  const auto parts = split(to_lower(trim(text)), ':');
  const auto n_of = [](const std::string& s) {
    const long long n = parse_int(s, "grid point count");
    require(n >= 2, "grid needs n_points >= 2");
    return static_cast<std::size_t>(n);
  };
  if (parts.size() == 3 && parts[0] == "uniform")
    return make_uniform_grid(parse_double(parts[1], "grid t_max"), n_of(parts[2]));
  if (parts.size() == 4 && (parts[0] == "geom" || parts[0] == "geometric"))
    return make_geometric_grid(parse_double(parts[1], "grid t_min"), parse_double(parts[2], "grid t_max"),
                               n_of(parts[3]));
  fail(Errc::invalid_argument,
       "grid spec must be uniform:t_max:n or geom:t_min:t_max:n, got '" + text + "'");
}

}  // namespace natclock
