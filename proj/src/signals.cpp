#include "mrproj/signals.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mrproj {

namespace {

constexpr std::array<double, 11> kPos = {.1, .13, .15, .23, .25, .40, .44, .65, .76, .78, .81};
constexpr std::array<double, 11> kBlockHgt = {4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};
constexpr std::array<double, 11> kBumpHgt = {4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
constexpr std::array<double, 11> kBumpWth = {.005, .005, .006, .01, .01, .03, .01, .01, .005, .008, .005};

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double doppler(double x) {
    const double eps = 0.05;
    return std::sqrt(std::max(x * (1.0 - x), 0.0)) *
           std::sin(2.0 * std::numbers::pi * (1.0 + eps) / (x + eps));
}

double heavisine(double x) {
    return 4.0 * std::sin(4.0 * std::numbers::pi * x) - sgn(x - 0.3) - sgn(0.72 - x);
}

double blocks(double x) {
    double v = 0.0;
    for (std::size_t i = 0; i < kPos.size(); ++i) v += kBlockHgt[i] * (1.0 + sgn(x - kPos[i])) / 2.0;
    return v;
}

double bumps(double x) {
    double v = 0.0;
    for (std::size_t i = 0; i < kPos.size(); ++i) {
        const double t = (x - kPos[i]) / kBumpWth[i];
        const double b = 1.0 + std::abs(t);
        v += kBumpHgt[i] / (b * b * b * b);
    }
    return v;
}

} // namespace

SignalSpec benchmark_signal(std::string_view name) {
    SignalSpec spec;
    spec.name = std::string(name);
    if (name == "doppler") spec.f = doppler;
    else if (name == "heavisine") spec.f = heavisine;
    else if (name == "bumps") spec.f = bumps;
    else if (name == "blocks") spec.f = blocks;
    else throw std::invalid_argument("benchmark_signal: unknown signal '" + std::string(name) + "'");
    return spec;
}

} // namespace mrproj
