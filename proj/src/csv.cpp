#include "svyglm/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "svyglm/error.hpp"

namespace svyglm::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Reads one logical record. Quoted fields may span physical lines, so the
// line counter is advanced for each newline consumed.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    std::string physical;
    if (!std::getline(in, physical)) return false;
    ++line;
    const std::size_t start_line = line;

    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    std::size_t pos = 0;
    for (;;) {
        if (pos == physical.size()) {
            if (in_quotes) {
                if (!std::getline(in, physical))
                    throw Error(ErrorKind::Parse, "line " + std::to_string(start_line) +
                                                      ": unterminated quoted field");
                ++line;
                field.push_back('\n');
                pos = 0;
                continue;
            }
            break;
        }
        const char c = physical[pos++];
        if (in_quotes) {
            if (c == '"') {
                if (pos < physical.size() && physical[pos] == '"') {
                    field.push_back('"');
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? field : std::string(trim(field)));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(was_quoted ? field : std::string(trim(field)));
    return true;
}

}  // namespace

Table read(std::istream& in) {
    Table table;
    std::size_t line = 0;
    std::vector<std::string> fields;
    // Skip leading blank lines before the header.
    while (read_record(in, fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        table.header = fields;
        break;
    }
    if (table.header.empty()) throw Error(ErrorKind::EmptyData, "input has no header row");
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (table.header[j].empty())
            throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": empty column name");
        for (std::size_t k = 0; k < j; ++k)
            if (table.header[k] == table.header[j])
                throw Error(ErrorKind::Parse, "line " + std::to_string(line) +
                                                  ": duplicate column '" + table.header[j] + "'");
    }

    while (read_record(in, fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != table.header.size())
            throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": expected " +
                                              std::to_string(table.header.size()) +
                                              " fields, found " + std::to_string(fields.size()));
        table.rows.push_back(fields);
        table.lines.push_back(line);
    }
    return table;
}

bool is_missing(std::string_view cell) { return cell.empty() || cell == "."; }

bool parse_real(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out, std::chars_format::general);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string quote_if_needed(std::string_view cell) {
    if (cell.find_first_of(",\"\n\r") == std::string_view::npos &&
        (cell.empty() || (cell.front() != ' ' && cell.back() != ' ')))
        return std::string(cell);
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (j) out << ',';
        out << quote_if_needed(cells[j]);
    }
    out << '\n';
}

}  // namespace svyglm::csv
