#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zsl::csv {

using Row = std::vector<std::string>;

/// Parses RFC-4180 CSV: quoted fields may contain commas, CRLF and doubled
/// quotes. Returns every record including the header. Throws DataError on an
/// unterminated quote.
std::vector<Row> parse(std::string_view text);

std::string escape(std::string_view field);

/// Writes one record terminated by "\n".
void write_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace zsl::csv
