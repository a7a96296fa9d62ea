#include "mrproj/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mrproj {

namespace {

constexpr double kTwoPi = 6.283185307179586477;

double exp_clip(double log_value) {
    if (log_value > 700.0) return std::numeric_limits<double>::infinity();
    return std::exp(log_value);
}

} // namespace

double BoundParams::R_pow(double exponent) const {
    return std::pow(static_cast<double>(2 * r - 1), static_cast<double>(d) * exponent);
}

double lambda_tail(double delta, const BoundParams& p) {
    if (!(delta > 0)) throw std::invalid_argument("lambda_tail: delta must be positive");
    const double n = static_cast<double>(p.n);
    const double half_dim = std::exp2(0.5 * p.j * p.d); // 2^{jd/2}
    if (p.noise == NoiseModel::bounded) {
        const double expo = -n * delta * delta / (18.0 * p.K * p.K * p.mu_max + 4.0 * p.K * half_dim * delta);
        return exp_clip(std::log(2.0) + expo);
    }
    // gaussian: min(1, prefactor * exp(...)) + Bernstein term
    const double s2 = p.sigma * p.sigma;
    const double denom = p.mu_max + half_dim * delta;
    const double log_pref =
        std::log(2.0 * p.sigma) + 0.5 * std::log(denom) - std::log(delta) - 0.5 * std::log(kTwoPi * n);
    const double log_gauss = log_pref - n * delta * delta / (s2 * denom);
    const double gauss_term = exp_clip(std::min(log_gauss, 0.0));
    const double bern = exp_clip(std::log(2.0) - n * delta * delta / (2.0 * p.mu_max + (4.0 / 3.0) * half_dim * delta));
    return gauss_term + bern;
}

double deviation_floor(const BoundParams& p) {
    return 2.0 * p.M * std::exp2(-static_cast<double>(p.j) * p.s) *
           std::max(1.0, 3.0 * p.pi_n * p.R_pow(1.0) * p.mu_max);
}

namespace {

double deviation_bound_impl(double delta, const BoundParams& p, double lead_coeff) {
    const double floor = deviation_floor(p);
    if (!(delta > floor)) {
        std::ostringstream msg;
        msg << "deviation bound: delta = " << delta << " is below the validity floor "
            << floor << " (= 2 M 2^{-js} max(1, 3 pi_n R^d mu_max))";
        throw std::invalid_argument(msg.str());
    }
    const double n = static_cast<double>(p.n);
    const double pi_inv = 1.0 / p.pi_n;
    const double R2d = p.R_pow(2.0);
    const double R4d = p.R_pow(4.0);
    double first = 0.0;
    if (delta <= p.M) {
        const double expo =
            -n * std::exp2(-static_cast<double>(p.j) * p.d) * pi_inv * pi_inv /
            (2.0 * p.mu_max * R4d + (4.0 / 3.0) * R2d * pi_inv);
        first = exp_clip(std::log(lead_coeff * R2d) + expo);
    }
    const double lam_arg = delta * std::exp2(-0.5 * p.j * p.d) / (2.0 * p.pi_n * p.R_pow(1.0));
    return first + p.R_pow(1.0) * lambda_tail(lam_arg, p);
}

} // namespace

double deviation_bound(double delta, const BoundParams& p) {
    return deviation_bound_impl(delta, p, 2.0);
}

double maltese_deviation_bound(double delta, const BoundParams& p) {
    return deviation_bound_impl(delta, p, 3.0);
}

double eig_tail(double t, const BoundParams& p) {
    if (!(t > 0)) throw std::invalid_argument("eig_tail: t must be positive");
    const double n = static_cast<double>(p.n);
    const double R2d = p.R_pow(2.0);
    const double R4d = p.R_pow(4.0);
    const double expo = -n * std::exp2(-static_cast<double>(p.j) * p.d) * t * t /
                        (2.0 * p.mu_max * R4d + (4.0 / 3.0) * R2d * t);
    return exp_clip(std::log(2.0 * R2d) + expo);
}

double clip01(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

} // namespace mrproj
