#include "mrproj/io_util.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mrproj {

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw std::runtime_error("quantile of empty set");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("non-numeric csv cell '" + cell + "' in " + path.string());
            }
        }
        if (row.size() != table.header.size())
            throw std::runtime_error("ragged csv row in " + path.string());
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvBuilder::CsvBuilder(std::span<const std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ += ',';
        out_ += header[i];
    }
    out_ += '\n';
}

void CsvBuilder::add_row(std::span<const double> values) {
    if (values.size() != columns_) throw std::runtime_error("csv row arity mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ += ',';
        out_ += format_double(values[i]);
    }
    out_ += '\n';
}

void CsvBuilder::add_raw_row(const std::string& line) {
    out_ += line;
    out_ += '\n';
}

} // namespace mrproj
