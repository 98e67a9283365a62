#include "legp/table.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace legp::io {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) {
        if (!cell.empty() && cell.back() == '\r') {
            cell.pop_back();
        }
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == delim) {
        cells.emplace_back();
    }
    return cells;
}

}  // namespace

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw validation_error("cannot open file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw validation_error("empty file: " + path.string());
    }
    Table table;
    table.delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
    table.header = split_line(line, table.delimiter);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        table.rows.push_back(split_line(line, table.delimiter));
    }
    return table;
}

void write_table(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path);
    if (!out) {
        throw validation_error("cannot write file: " + path.string());
    }
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out << table.delimiter;
            }
            out << cells[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) {
        emit(row);
    }
}

double parse_double(const std::string& cell, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double value = std::stod(cell, &pos);
        if (pos != cell.size()) {
            throw validation_error("trailing characters in numeric cell '" + cell + "' (" + context + ")");
        }
        return value;
    } catch (const validation_error&) {
        throw;
    } catch (const std::exception&) {
        throw validation_error("non-numeric cell '" + cell + "' (" + context + ")");
    }
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

std::string format_double_exact(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace legp::io
