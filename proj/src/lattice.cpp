#include "mrproj/lattice.hpp"

#include <cmath>

namespace mrproj {

CellIndex locate(std::span<const double> x, int j) {
    CellIndex c;
    c.j = j;
    c.m.resize(x.size());
    const double scale = std::ldexp(1.0, j);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 1.0) {
            c.m[i] = static_cast<std::int32_t>(scale) - 1;
        } else {
            c.m[i] = static_cast<std::int32_t>(std::floor(x[i] * scale));
        }
    }
    return c;
}

OccupancyMap occupancy(const DesignSample& sample, int j) {
    OccupancyMap map;
    map.j = j;
    const std::size_t n = sample.size();
    for (std::size_t i = 0; i < n; ++i)
        map.cells[locate(sample.point(i), j)].push_back(static_cast<std::uint32_t>(i));
    return map;
}

std::vector<double> shift(std::span<const double> u, std::span<const double> anchor, int j) {
    const double half = std::ldexp(1.0, -j - 1);
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - anchor[i] + half;
    return out;
}

} // namespace mrproj
