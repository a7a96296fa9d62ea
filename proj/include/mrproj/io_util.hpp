#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mrproj {

// Writes via a sibling temp file followed by an atomic rename.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// Shortest round-trip decimal formatting, locale-independent.
std::string format_double(double v);

// type-7 quantile (linear interpolation between order statistics)
double quantile_type7(std::vector<double> values, double p);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Parses a numeric CSV with a header line. Throws std::runtime_error on
// malformed input.
CsvTable read_csv(const std::filesystem::path& path);

class CsvBuilder {
public:
    explicit CsvBuilder(std::span<const std::string> header);
    void add_row(std::span<const double> values);
    void add_raw_row(const std::string& line);
    const std::string& str() const { return out_; }

private:
    std::size_t columns_;
    std::string out_;
};

} // namespace mrproj
