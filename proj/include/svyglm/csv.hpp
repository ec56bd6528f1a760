#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace svyglm::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based source line of each data row, for error messages.
    std::vector<std::size_t> lines;
};

// Comma-separated, first record is the header. Fields may be double-quoted
// with "" as an escaped quote. Every record must have as many fields as the
// header; a mismatch raises ErrorKind::Parse naming the line.
Table read(std::istream& in);

// A cell is missing when it is empty or a single '.'.
bool is_missing(std::string_view cell);

// Parses a decimal real; false on anything else (including trailing junk).
bool parse_real(std::string_view cell, double& out);

std::string quote_if_needed(std::string_view cell);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace svyglm::csv
