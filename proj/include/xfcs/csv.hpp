#ifndef XFCS_CSV_HPP
#define XFCS_CSV_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xfcs/common.hpp"

namespace xfcs::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV with a single header line. Errors carry the 1-based
/// file row number so bad inputs are easy to locate.
inline Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string());
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (lineno == 1) {
            t.header = cells;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                row.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw IngestError(path.string() + ":" + std::to_string(lineno) +
                                  ": not a number: '" + c + "'");
            }
            if (std::isnan(row.back()))
                throw IngestError(path.string() + ":" + std::to_string(lineno) + ": NaN value");
        }
        if (!t.rows.empty() && row.size() != t.rows.front().size())
            throw IngestError(path.string() + ":" + std::to_string(lineno) +
                              ": ragged row (expected " +
                              std::to_string(t.rows.front().size()) + " columns)");
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw IngestError(path.string() + ": empty file");
    return t;
}

inline void write(const std::filesystem::path& path, const std::vector<std::string>& header,
                  const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
}

}  // namespace xfcs::csv

#endif
