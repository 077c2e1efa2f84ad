// SPDX-License-Identifier: Apache-2.0
#include "natclock/rng.hpp"

#include <cmath>

#include <boost/random/normal_distribution.hpp>

namespace natclock {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                        std::array<std::uint64_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(master) ^ a) ^ (b * 0xD6E8FEB86659FD93ULL));
}

void Stream::refill() noexcept {
  buf_ = philox4x64({block_, 0, key_.path_index, key_.substream},
                    {key_.master_seed, 0x6E6174636C6F636BULL});
  ++block_;
  pos_ = 0;
}

double Stream::normal() {
  // The ziggurat keeps no state between calls, so prefixes of a stream stay
  // reproducible when a sampler stops early.
  boost::random::normal_distribution<double> dist;
  return dist(*this);
}

double Stream::exponential() noexcept { return -std::log(uniform()); }

}  // namespace natclock
