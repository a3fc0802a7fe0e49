#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace oula::csv {

// One parsed row; cells keep their raw text, quoting already stripped.
using Row = std::vector<std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;
    std::vector<int> line_of;  // 1-based source line per accepted row
    // 1-based line numbers of rows rejected during parsing, with reason.
    std::vector<std::pair<int, std::string>> rejected;

    int column(const std::string& name) const;  // -1 if absent
};

// Parses a comma-separated file with a header row. Handles quoted fields
// (embedded commas, doubled quotes) and CRLF endings. Rows whose cell count
// does not match the header are rejected, not fatal.
Table read_file(const std::string& path);

Table parse(const std::string& text);

std::string escape(const std::string& cell);

void write_file(const std::string& path,
                const std::vector<std::string>& header,
                const std::vector<Row>& rows);

// OULAD uses "?" for missing cells; empty string counts as missing too.
std::optional<std::string> cell_opt(const std::string& cell);
std::optional<long> cell_long(const std::string& cell);
std::optional<double> cell_double(const std::string& cell);

}  // namespace oula::csv
