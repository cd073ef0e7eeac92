#include "nearprobe/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nearprobe/errors.hpp"

namespace nearprobe {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_table(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    for (const std::string& c : table.comments) out << "# " << c << "\n";
    for (size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "\t" : "") << table.columns[i];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << format_double(row[i]);
        out << "\n";
    }
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file '" + path + "'");
    Table t;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        if (!have_header) {
            std::string name;
            while (row >> name) t.columns.push_back(name);
            if (t.columns.size() < 2) {
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": header must name at least two columns");
            }
            have_header = true;
            continue;
        }
        std::vector<double> values;
        std::string tok;
        while (row >> tok) {
            try {
                size_t pos = 0;
                values.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument("bad number");
            } catch (const std::exception&) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" + tok +
                                  "'");
            }
        }
        if (values.size() != t.columns.size()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(t.columns.size()) + " columns, got " +
                              std::to_string(values.size()));
        }
        t.rows.push_back(std::move(values));
    }
    if (!have_header) throw ConfigError(path + ": missing header line");
    return t;
}

XySeries read_xy(const std::string& path) {
    const Table t = read_table(path);
    XySeries s;
    s.x_name = t.columns[0];
    s.y_name = t.columns[1];
    s.x.reserve(t.rows.size());
    s.y.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        s.x.push_back(row[0]);
        s.y.push_back(row[1]);
    }
    return s;
}

uint64_t content_hash(const std::string& canonical) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create directory '" + path + "': " + ec.message());
}

}  // namespace nearprobe
