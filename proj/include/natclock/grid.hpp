// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace natclock {

enum class GridKind { uniform, geometric, custom };

/// Strictly increasing evaluation times starting at or after 0 and ending at
/// t_max. Immutable once built.
class TimeGrid {
 public:
  /// Validates the invariants; throws invalid-argument on violation.
  TimeGrid(std::vector<double> times, GridKind kind);

  std::span<const double> times() const noexcept { return times_; }
  double operator[](std::size_t i) const noexcept { return times_[i]; }
  std::size_t size() const noexcept { return times_.size(); }
  double t_max() const noexcept { return times_.back(); }
  GridKind kind() const noexcept { return kind_; }

  /// Index of the last grid time <= t (0 if t precedes the grid).
  std::size_t floor_index(double t) const noexcept;

  /// Canonical textual form, parseable by parse_grid.
  std::string describe() const;

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
    return a.kind_ == b.kind_ && a.times_ == b.times_;
  }

 private:
  std::vector<double> times_;
  GridKind kind_;
};

TimeGrid make_uniform_grid(double t_max, std::size_t n_points);

/// 0 followed by n_points-1 geometrically spaced times from t_min to t_max.
TimeGrid make_geometric_grid(double t_min, double t_max, std::size_t n_points);

/// "uniform:t_max:n" or "geom:t_min:t_max:n".
TimeGrid parse_grid(const std::string& text);

}  // namespace natclock
