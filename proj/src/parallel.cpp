// SPDX-License-Identifier: Apache-2.0
#include "natclock/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace natclock {

std::vector<BlockRange> make_blocks(std::size_t n) {
  std::vector<BlockRange> blocks;
  if (n == 0) return blocks;
  const std::size_t count = std::min(n, kReductionBlocks);
  const std::size_t base = n / count, extra = n % count;
  std::size_t begin = 0;
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    blocks.push_back({b, begin, begin + len});
    begin += len;
  }
  return blocks;
}

void parallel_for(std::size_t n_tasks, const Exec& exec, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, exec.workers), n_tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Moments Moments::merge(const Moments& a, const Moments& b) noexcept {
  if (a.n == 0.0) return b;
  if (b.n == 0.0) return a;
  Moments out;
  out.n = a.n + b.n;
  const double d = b.mean - a.mean;
  out.mean = a.mean + d * (b.n / out.n);
  out.m2 = a.m2 + b.m2 + d * d * (a.n * b.n / out.n);
  return out;
}

Moments merge_pairwise(std::span<const Moments> parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  return Moments::merge(merge_pairwise(parts.first(half)), merge_pairwise(parts.subspan(half)));
}

std::vector<Moments> merge_pairwise(std::span<const std::vector<Moments>> parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  auto left = merge_pairwise(parts.first(half));
  const auto right = merge_pairwise(parts.subspan(half));
  for (std::size_t i = 0; i < left.size(); ++i) left[i] = Moments::merge(left[i], right[i]);
  return left;
}

double pairwise_sum(std::span<const double> xs) noexcept {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  out.n = xs.size();
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = pairwise_sum(xs) / n;
  if (xs.size() < 2) return out;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - out.mean;
    sq[i] = d * d;
  }
  out.sd = std::sqrt(pairwise_sum(sq) / (n - 1.0));
  out.se = out.sd / std::sqrt(n);
  return out;
}

}  // namespace natclock
