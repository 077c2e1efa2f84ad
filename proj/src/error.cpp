// SPDX-License-Identifier: Apache-2.0
#include "natclock/error.hpp"

namespace natclock {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::unsupported: return "unsupported";
    case Errc::decoupling_violation: return "decoupling-violation";
    case Errc::infinite_mean: return "infinite-mean";
    case Errc::config: return "config";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace natclock
