#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace latarb::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based source line of each row, for error messages.
    std::vector<std::size_t> lines;

    // Index of a header column; throws schema_mismatch if absent.
    std::size_t column(std::string_view name) const;
};

// Comma separated, optional double-quoted fields, blank lines skipped.
// Every row must have exactly as many fields as the header.
Table read(std::istream& in, const std::string& source_name);
Table read_file(const std::string& path);

// Checks the header matches `expected` exactly (order included).
void require_header(const Table& table, const std::vector<std::string>& expected, const std::string& source_name);

std::vector<std::string> split_line(std::string_view line);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace latarb::csv
