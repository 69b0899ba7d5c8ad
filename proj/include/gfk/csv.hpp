#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gfk/error.hpp"
#include "gfk/stats.hpp"

namespace gfk {

/// Comma-separated table with a header row; numbers are written in shortest
/// round-trip form so emitted files re-parse losslessly.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size())
            throw Error(ErrorCode::InvalidParams, "csv row width mismatch");
        rows_.push_back(std::move(cells));
    }

    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& s) { return s; }

    std::string str() const {
        std::string out;
        out += join(header_);
        out += '\n';
        for (const auto& r : rows_) {
            out += join(r);
            out += '\n';
        }
        return out;
    }

    void write_file(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::OutputUnwritable, path);
        f << str();
        if (!f) throw Error(ErrorCode::OutputUnwritable, path);
    }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        return out;
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw Error(ErrorCode::InvalidParams, "csv column not found: " + name);
    }
};

inline CsvTable parse_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == EOF) break;
        std::vector<std::string> cells;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        cells.push_back(cur);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::TrialFileMissing, path);
    return parse_csv(f);
}

} // namespace gfk
