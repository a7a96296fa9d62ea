#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace mrproj {

// Benchmark test signal on [0,1] with an amplitude-scale factor.
struct SignalSpec {
    std::string name;
    std::function<double(double)> f;
    double scale = 1.0;

    double operator()(double x) const { return scale * f(x); }
};

// Donoho-Johnstone test signals: doppler, heavisine, bumps, blocks.
// Throws std::invalid_argument for an unknown name.
SignalSpec benchmark_signal(std::string_view name);

} // namespace mrproj
