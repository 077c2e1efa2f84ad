// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace natclock {

/// Philox4x64-10 block function (Salmon et al., counter-based PRNG).
/// Output matches numpy.random.Philox for the same counter and key.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) noexcept;

/// Identifies one random stream. Streams with distinct keys are independent;
/// a key always yields the same sequence.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;
  std::uint64_t substream = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// SplitMix64 finalizer; used to derive child seeds from a master seed.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Sequential view of a keyed stream. Satisfies UniformRandomBitGenerator.
///
/// The Philox key is the master seed; the counter holds
/// (block, 0, path_index, substream), so the n-th draw of a stream is a pure
/// function of (key, n) and never depends on which thread produced it.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(StreamKey key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal();
  double exponential() noexcept;

  const StreamKey& key() const noexcept { return key_; }
  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  void refill() noexcept;

  StreamKey key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  unsigned pos_ = 4;
};

}  // namespace natclock
