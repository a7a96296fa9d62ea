#pragma once

#include "mrproj/lattice.hpp"

#include <ostream>
#include <span>
#include <vector>

namespace mrproj {

// Daubechies father function of order r, tabulated on a dyadic grid.
//
// The support is [-(r-1), r]; the stored filter h_0..h_{2r-1} satisfies the
// refinement relation in support-aligned indexing,
//     phi(x) = sqrt(2) * sum_u h_{u+r-1} phi(2x - u),  u = -(r-1)..r.
// r=1 is exactly Haar (indicator of [0,1)) and is evaluated analytically;
// the table is only consulted for r >= 2.
struct ScalingBasis {
    int r = 1;
    int table_depth = 12;        // L: table step is 2^-L
    std::vector<double> filter;  // 2r refinement coefficients, sum = sqrt(2)
    std::vector<double> values;  // phi(-(r-1) + i 2^-L), i = 0..(2r-1)*2^L

    // phi(u) by linear interpolation in the table; exactly 0 outside the support
    double phi(double u) const;

    // phi_{j,k}(x) = 2^{jd/2} prod_i phi(2^j x_i - k_i)
    double eval(int j, std::span<const std::int32_t> k, std::span<const double> x) const;
};

ScalingBasis build_basis(int r, int table_depth = 12);

// Axis-aligned support box of phi_{j,k}: 2^-j (k + [-(r-1), r]^d).
struct Box {
    std::vector<double> lo, hi;
};
Box support(int r, int j, std::span<const std::int32_t> k);

// S_j(H): indices of the scaling functions whose support box contains the
// open cell; exactly (2r-1)^d of them, in lexicographic order.
std::vector<Index> active_indices(int r, const CellIndex& cell);

inline std::size_t active_count(int r, int d) {
    std::size_t c = 1;
    for (int i = 0; i < d; ++i) c *= static_cast<std::size_t>(2 * r - 1);
    return c;
}

// columns: x, phi
void write_table_csv(const ScalingBasis& basis, std::ostream& out);

} // namespace mrproj
