#include "mrproj/scaling.hpp"

#include "mrproj/io_util.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace mrproj {

namespace {

using cd = std::complex<double>;

// roots via the companion matrix of a monic polynomial
std::vector<cd> poly_roots(const std::vector<double>& coeffs_ascending) {
    const int deg = static_cast<int>(coeffs_ascending.size()) - 1;
    if (deg <= 0) return {};
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    const double lead = coeffs_ascending.back();
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs_ascending[i] / lead;
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw std::runtime_error("basis construction: root solve failed");
    std::vector<cd> roots(deg);
    for (int i = 0; i < deg; ++i) roots[i] = es.eigenvalues()(i);
    return roots;
}

std::vector<cd> poly_mul(const std::vector<cd>& a, const std::vector<cd>& b) {
    std::vector<cd> out(a.size() + b.size() - 1, cd{0, 0});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// Minimal-phase Daubechies filter via spectral factorization of
// P(y) = sum_{k<r} C(r-1+k, k) y^k.
std::vector<double> daubechies_filter(int r) {
    if (r == 1) return {std::sqrt(0.5), std::sqrt(0.5)};

    std::vector<double> p(static_cast<std::size_t>(r));
    double binom = 1.0;
    for (int k = 0; k < r; ++k) {
        p[static_cast<std::size_t>(k)] = binom; // C(r-1+k, k)
        binom = binom * static_cast<double>(r + k) / static_cast<double>(k + 1);
    }

    std::vector<cd> h = {cd{1, 0}};
    for (int i = 0; i < r; ++i) h = poly_mul(h, {cd{1, 0}, cd{1, 0}}); // (1+z)^r

    for (const cd& y : poly_roots(p)) {
        // y = (2 - z - 1/z)/4  <=>  z^2 - (2-4y) z + 1 = 0; keep |z| < 1
        const cd b = cd{2, 0} - 4.0 * y;
        const cd disc = std::sqrt(b * b - 4.0);
        const cd z1 = (b + disc) / 2.0;
        const cd z2 = (b - disc) / 2.0;
        const cd z = std::abs(z1) < 1.0 ? z1 : z2;
        h = poly_mul(h, {cd{1, 0} * (-z), cd{1, 0}});
    }

    // poly_mul produces ascending powers of z; the conventional minimal-phase
    // sequence h_0..h_{2r-1} is the reverse
    std::vector<double> filter(h.size());
    double sum = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        filter[i] = h[h.size() - 1 - i].real();
        sum += filter[i];
    }
    const double norm = std::numbers::sqrt2 / sum;
    for (double& v : filter) v *= norm;
    if (filter.size() != static_cast<std::size_t>(2 * r))
        throw std::runtime_error("basis construction: unexpected filter length");
    return filter;
}

} // namespace

ScalingBasis build_basis(int r, int table_depth) {
    if (r < 1 || r > 10) throw std::invalid_argument("build_basis: r must be in [1,10]");
    if (table_depth < 6) throw std::invalid_argument("build_basis: table_depth must be >= 6");

    ScalingBasis basis;
    basis.r = r;
    basis.table_depth = table_depth;
    basis.filter = daubechies_filter(r);

    const int L = table_depth;
    const std::size_t npts = static_cast<std::size_t>(2 * r - 1) * (std::size_t{1} << L) + 1;
    basis.values.assign(npts, 0.0);

    if (r == 1) {
        // Haar: indicator of [0,1); table covers [0,1]
        for (std::size_t i = 0; i + 1 < npts; ++i) basis.values[i] = 1.0;
        return basis;
    }

    // phi at interior integers: eigenvector of the integer refinement matrix
    // for eigenvalue 1, normalized by partition of unity.
    const auto& h = basis.filter;
    const int ni = 2 * r - 2; // integers -(r-2)..(r-1)
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ni, ni);
    for (int a = 0; a < ni; ++a) {
        const int m = a - (r - 2);
        for (int b = 0; b < ni; ++b) {
            const int mp = b - (r - 2);
            const int u = 2 * m - mp;
            if (u >= -(r - 1) && u <= r) M(a, b) = std::numbers::sqrt2 * h[static_cast<std::size_t>(u + r - 1)];
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw std::runtime_error("basis construction: integer eigensolve failed");
    int best = 0;
    double bestdist = std::abs(es.eigenvalues()(0) - cd{1, 0});
    for (int i = 1; i < ni; ++i) {
        const double dist = std::abs(es.eigenvalues()(i) - cd{1, 0});
        if (dist < bestdist) {
            bestdist = dist;
            best = i;
        }
    }
    if (bestdist > 1e-8) throw std::runtime_error("basis construction: no unit eigenvalue");
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    v /= v.sum();

    const std::int64_t unit = std::int64_t{1} << L; // table units per 1.0
    const std::int64_t off = static_cast<std::int64_t>(r - 1) * unit;
    for (int a = 0; a < ni; ++a) {
        const int m = a - (r - 2);
        basis.values[static_cast<std::size_t>(m * unit + off)] = v(a);
    }

    // dyadic subdivision: level-l values follow from level-(l-1) values
    // through the refinement relation
    for (int l = 1; l <= L; ++l) {
        const std::int64_t step = std::int64_t{1} << (L - l);
        for (std::int64_t i = step; i < static_cast<std::int64_t>(npts); i += 2 * step) {
            const std::int64_t xu = i - off; // position in table units
            double acc = 0.0;
            for (int u = -(r - 1); u <= r; ++u) {
                const std::int64_t j = 2 * xu - static_cast<std::int64_t>(u) * unit + off;
                if (j >= 0 && j < static_cast<std::int64_t>(npts))
                    acc += h[static_cast<std::size_t>(u + r - 1)] * basis.values[static_cast<std::size_t>(j)];
            }
            basis.values[static_cast<std::size_t>(i)] = std::numbers::sqrt2 * acc;
        }
    }
    return basis;
}

double ScalingBasis::phi(double u) const {
    if (r == 1) return (u >= 0.0 && u < 1.0) ? 1.0 : 0.0;
    const double lo = -(r - 1);
    if (u <= lo || u >= static_cast<double>(r)) return 0.0;
    const double t = std::ldexp(u - lo, table_depth);
    auto i = static_cast<std::size_t>(t);
    if (i + 1 >= values.size()) return 0.0;
    const double frac = t - static_cast<double>(i);
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

double ScalingBasis::eval(int j, std::span<const std::int32_t> k, std::span<const double> x) const {
    double prod = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        prod *= phi(std::ldexp(x[i], j) - static_cast<double>(k[i]));
        if (prod == 0.0) return 0.0;
    }
    return prod * std::exp2(0.5 * static_cast<double>(j) * static_cast<double>(x.size()));
}

Box support(int r, int j, std::span<const std::int32_t> k) {
    Box b;
    const double scale = std::ldexp(1.0, -j);
    b.lo.resize(k.size());
    b.hi.resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        b.lo[i] = scale * (static_cast<double>(k[i]) - (r - 1));
        b.hi[i] = scale * (static_cast<double>(k[i]) + r);
    }
    return b;
}

std::vector<Index> active_indices(int r, const CellIndex& cell) {
    const int d = static_cast<int>(cell.m.size());
    const int R = 2 * r - 1;
    std::vector<Index> out;
    out.reserve(active_count(r, d));
    Index nu(cell.m.size());
    std::vector<int> digit(static_cast<std::size_t>(d), 0);
    while (true) {
        for (int i = 0; i < d; ++i)
            nu[static_cast<std::size_t>(i)] =
                cell.m[static_cast<std::size_t>(i)] - (r - 1) + digit[static_cast<std::size_t>(i)];
        out.push_back(nu);
        int pos = d - 1;
        while (pos >= 0 && ++digit[static_cast<std::size_t>(pos)] == R) {
            digit[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return out;
}

void write_table_csv(const ScalingBasis& basis, std::ostream& out) {
    out << "x,phi\n";
    const double step = std::ldexp(1.0, -basis.table_depth);
    const double lo = -(basis.r - 1);
    for (std::size_t i = 0; i < basis.values.size(); ++i) {
        out << format_double(lo + static_cast<double>(i) * step) << ','
            << format_double(basis.values[i]) << '\n';
    }
}

} // namespace mrproj
