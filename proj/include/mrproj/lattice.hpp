#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace mrproj {

using Index = std::vector<std::int32_t>;

// Dyadic lattice cell: the box 2^-j (m + (0,1)^d).
struct CellIndex {
    std::int32_t j = 0;
    Index m;

    bool operator==(const CellIndex& o) const { return j == o.j && m == o.m; }
    bool operator<(const CellIndex& o) const {
        if (j != o.j) return j < o.j;
        return m < o.m;
    }
};

struct CellIndexHash {
    std::size_t operator()(const CellIndex& c) const {
        std::size_t h = static_cast<std::size_t>(c.j) * 0x9e3779b97f4a7c15ULL;
        for (std::int32_t v : c.m)
            h = (h ^ static_cast<std::size_t>(static_cast<std::uint32_t>(v))) * 0x100000001b3ULL;
        return h;
    }
};

struct DesignSample {
    int d = 1;
    std::vector<double> x; // n*d, row-major
    std::vector<double> y; // n, may be empty for design-only samples

    std::size_t size() const { return d > 0 ? x.size() / static_cast<std::size_t>(d) : 0; }
    std::span<const double> point(std::size_t i) const {
        return {x.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
    void add(std::span<const double> pt, double yi) {
        x.insert(x.end(), pt.begin(), pt.end());
        y.push_back(yi);
    }
};

// m = floor(2^j x) componentwise; x_i = 1 exactly is assigned to the last
// cell of the unit domain so that boundary data stays inside the partition.
CellIndex locate(std::span<const double> x, int j);

struct OccupancyMap {
    int j = 0;
    std::unordered_map<CellIndex, std::vector<std::uint32_t>, CellIndexHash> cells;
};

OccupancyMap occupancy(const DesignSample& sample, int j);

// Moving-grid change of coordinates: maps `anchor` to the center of the
// cell H0 = 2^-j [0,1]^d.
std::vector<double> shift(std::span<const double> u, std::span<const double> anchor, int j);

} // namespace mrproj
