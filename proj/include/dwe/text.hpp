#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dwe {

[[nodiscard]] std::string_view trim(std::string_view s);
[[nodiscard]] std::string to_lower(std::string_view s);
[[nodiscard]] std::vector<std::string> split(std::string_view s, char sep);

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);
/// Fixed number of decimals, for human-facing reports.
[[nodiscard]] std::string format_fixed(double v, int decimals);

/// Throws std::invalid_argument when the whole field is not a number.
[[nodiscard]] double parse_double(std::string_view s);
[[nodiscard]] long long parse_int(std::string_view s);

/// 64-bit FNV-1a, rendered as 16 hex digits.
[[nodiscard]] std::string fnv1a_hex(std::string_view data);

}  // namespace dwe
