#pragma once

#include "mrproj/lattice.hpp"

#include <span>
#include <vector>

namespace mrproj {

struct LpeResult {
    std::vector<double> estimates;
    std::vector<std::uint8_t> valid; // 0 where the local system was singular
    std::size_t regression_count = 0;
};

// Local polynomial baseline (d = 1): box-kernel weighted least squares of the
// given degree in a bandwidth window around each evaluation point. One
// regression per evaluation point, which is the cost this library avoids.
LpeResult lpe_baseline(const DesignSample& sample, std::span<const double> eval_points,
                       double bandwidth, int degree);

} // namespace mrproj
