#pragma once

#include <string>
#include <string_view>

namespace lsa {

/// Locale-independent `%.9g`; NaN prints as `nan`.
std::string format_number(double value);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace lsa
