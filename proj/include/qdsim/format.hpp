#pragma once

#include <string>
#include <string_view>

namespace qdsim {

/// Shortest-agnostic fixed-width rendering: 17 significant digits, which
/// round-trips every double exactly. NaN renders as "nan".
std::string format_double(double v);

/// Strict parse of a whole token; throws DomainError on trailing garbage.
double parse_double(std::string_view s);

}  // namespace qdsim
