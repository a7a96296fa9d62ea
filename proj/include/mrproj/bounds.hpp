#pragma once

#include <cstddef>

namespace mrproj {

enum class NoiseModel { bounded, gaussian };

struct BoundParams {
    std::size_t n = 0;
    int j = 0;
    int d = 1;
    int r = 1; // R = 2r-1
    double pi_n = 1.0;
    double mu_max = 1.0;
    NoiseModel noise = NoiseModel::bounded;
    double K = 1.0;     // noise bound under the bounded model
    double sigma = 1.0; // noise scale under the gaussian model
    double s = 1.0;     // smoothness
    double M = 1.0;     // Lipschitz-ball radius

    double R_pow(double exponent) const; // (2r-1)^(d*exponent)
};

// Raw values (possibly > 1); computed in log space so that exponents of
// order -1e4 underflow cleanly instead of overflowing intermediates.
double lambda_tail(double delta, const BoundParams& p);

// Validity floor of the pointwise deviation bound:
// delta > 2 M 2^{-js} max(1, 3 pi_n R^d mu_max).
double deviation_floor(const BoundParams& p);

// Pointwise deviation bound; throws std::invalid_argument below the floor,
// reporting the floor value.
double deviation_bound(double delta, const BoundParams& p);

// P(lambda_min(Q_H) <= t) bound; domain t <= g_min/2 is caller-supplied.
double eig_tail(double t, const BoundParams& p);

// Moving-grid variant: leading coefficient 3 R^{2d} instead of 2 R^{2d}.
double maltese_deviation_bound(double delta, const BoundParams& p);

double clip01(double v);

} // namespace mrproj
