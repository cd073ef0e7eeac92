#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nearprobe {

// Tab-separated numeric table with a one-line header. '#' lines are
// comments. Numbers are written as %.12g so identical runs produce
// byte-identical files.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;  // written before the header
};

void write_table(const std::string& path, const Table& table);
Table read_table(const std::string& path);

// First two numeric columns of a table (fit ingestion).
struct XySeries {
    std::string x_name, y_name;
    std::vector<double> x, y;
};
XySeries read_xy(const std::string& path);

std::string format_double(double v);

// FNV-1a over a canonical parameter string; used to key the Monte-Carlo
// cache directory.
uint64_t content_hash(const std::string& canonical);

void ensure_directory(const std::string& path);

}  // namespace nearprobe
