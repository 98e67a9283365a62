#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "legp/common.hpp"

namespace legp::io {

/// A delimited text table. The delimiter is autodetected on read
/// (tab if the header contains tabs, comma otherwise).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    char delimiter = ',';
};

Table read_table(const std::filesystem::path& path);
void write_table(const std::filesystem::path& path, const Table& table);

/// Parses a cell as double; throws validation_error naming `context` on failure.
double parse_double(const std::string& cell, const std::string& context);

/// Fixed %.10g formatting for data exports (deterministic output).
std::string format_double(double value);

/// %.17g round-trip-exact formatting for model serialization.
std::string format_double_exact(double value);

}  // namespace legp::io
