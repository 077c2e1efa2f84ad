// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace natclock {

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite.
std::string format_double(double x);

/// Strict full-string parse; throws invalid-argument naming `what`.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

std::vector<std::string> split(std::string_view text, char sep);
std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

}  // namespace natclock
