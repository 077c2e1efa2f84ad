// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace natclock {

/// Worker count for parallel maps. Results never depend on it.
struct Exec {
  unsigned workers = 1;
};

/// Number of fixed blocks a batch of paths is split into. Block boundaries
/// depend only on the batch size, so per-block reductions are identical for
/// any worker count.
inline constexpr std::size_t kReductionBlocks = 64;

struct BlockRange {
  std::size_t block;
  std::size_t begin;
  std::size_t end;
};

/// Splits [0, n) into at most kReductionBlocks contiguous ranges.
std::vector<BlockRange> make_blocks(std::size_t n);

/// Runs body(i) for i in [0, n_tasks) on up to exec.workers threads.
/// The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n_tasks, const Exec& exec, const std::function<void(std::size_t)>& body);

/// Count, mean and centered second moment; merged with Chan's formula.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  static Moments merge(const Moments& a, const Moments& b) noexcept;
  double variance() const noexcept { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
  double se() const noexcept { return n > 1.0 ? std::sqrt(variance() / n) : 0.0; }
};

/// Pairwise tree merge in index order.
Moments merge_pairwise(std::span<const Moments> parts);
std::vector<Moments> merge_pairwise(std::span<const std::vector<Moments>> parts);

double pairwise_sum(std::span<const double> xs) noexcept;

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

/// Two-pass mean and standard error with pairwise summation.
MeanSe mean_se(std::span<const double> xs);

}  // namespace natclock
