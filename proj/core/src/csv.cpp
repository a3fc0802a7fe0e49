#include "oula/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oula::csv {

int Table::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

namespace {

// Splits one logical CSV record starting at `pos`; advances `pos` past the
// record terminator. Returns false at end of input.
bool next_record(const std::string& text, size_t& pos, Row& out) {
    if (pos >= text.size()) return false;
    out.clear();
    std::string cell;
    bool in_quotes = false;
    while (pos < text.size()) {
        char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    cell.push_back('"');
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else if (c == '\n') {
            ++pos;
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            out.push_back(std::move(cell));
            return true;
        } else {
            cell.push_back(c);
        }
        ++pos;
    }
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(std::move(cell));
    return true;
}

}  // namespace

Table parse(const std::string& text) {
    Table t;
    size_t pos = 0;
    Row rec;
    if (!next_record(text, pos, rec)) return t;
    // Strip a UTF-8 BOM if present.
    if (!rec.empty() && rec[0].size() >= 3 &&
        static_cast<unsigned char>(rec[0][0]) == 0xEF) {
        rec[0].erase(0, 3);
    }
    t.header = rec;
    int line = 1;
    while (next_record(text, pos, rec)) {
        ++line;
        if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
        if (rec.size() != t.header.size()) {
            std::ostringstream msg;
            msg << "expected " << t.header.size() << " cells, got " << rec.size();
            t.rejected.emplace_back(line, msg.str());
            continue;
        }
        t.rows.push_back(rec);
        t.line_of.push_back(line);
    }
    return t;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

void write_file(const std::string& path,
                const std::vector<std::string>& header,
                const std::vector<Row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for write: " + path);
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << escape(header[i]);
    }
    out << '\n';
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << escape(row[i]);
        }
        out << '\n';
    }
}

std::optional<std::string> cell_opt(const std::string& cell) {
    if (cell.empty() || cell == "?") return std::nullopt;
    return cell;
}

std::optional<long> cell_long(const std::string& cell) {
    auto s = cell_opt(cell);
    if (!s) return std::nullopt;
    char* end = nullptr;
    long v = std::strtol(s->c_str(), &end, 10);
    if (end == s->c_str() || *end != '\0') return std::nullopt;
    return v;
}

std::optional<double> cell_double(const std::string& cell) {
    auto s = cell_opt(cell);
    if (!s) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(s->c_str(), &end);
    if (end == s->c_str() || *end != '\0') return std::nullopt;
    return v;
}

}  // namespace oula::csv
