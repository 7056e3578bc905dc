#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sace::csv {

/// Splits one CSV record on commas. Quoting is not supported; fields are trimmed.
std::vector<std::string> split(std::string_view line);

/// Parses a full-string decimal number ('.' separator). Empty or malformed
/// fields give nullopt.
std::optional<double> parse_number(std::string_view field);

/// Formats with 10 significant digits, the precision used for every output file.
std::string format(double value);

/// Formats with round-trip precision (17 significant digits).
std::string format_exact(double value);

}  // namespace sace::csv
