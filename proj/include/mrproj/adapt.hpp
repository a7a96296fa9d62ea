#pragma once

#include "mrproj/regress.hpp"

#include <functional>
#include <map>

namespace mrproj {

struct ResolutionGrid {
    int j_low = 0;
    int J = 0;
    double t_n = 0.0;
    std::size_t n = 0;
    double kappa = 1.0;
    double pi_n = 1.0;

    std::vector<int> levels() const {
        std::vector<int> out;
        for (int j = j_low; j <= J; ++j) out.push_back(j);
        return out;
    }
};

enum class GridMode { known_r, known_s };

// Theory grid: 2^{j_r} = floor(n^{1/(2r+d)}), 2^{j_s} = floor(n^{1/(2s+d)}),
// 2^{Jd} = floor(n t_n^-2) with t_n^2 = kappa pi_n^2 log n.
// Throws a configuration error when J < j_low, reporting the inequality.
ResolutionGrid resolution_grid(std::size_t n, int d, int r, double kappa, double pi_n,
                               GridMode mode, double s = 0.0);

// Practical grid used by the simulation protocol:
// J = ceil(log2(n / log10 n)), j_low supplied by the caller.
ResolutionGrid study_grid(std::size_t n, int j_low, double kappa, double pi_n);

// g(j,k) = (2^{jd/2} + 2^{kd/2}) t_n / sqrt(n)
double lepski_threshold(int j, int k, const ResolutionGrid& grid, int d);

// Smallest level whose estimate agrees with every finer candidate within
// g(j,k); the finest candidate when none qualifies (inf of the empty set).
int lepski_select(const std::vector<int>& candidates,
                  const std::function<double(int)>& value_at, const ResolutionGrid& grid, int d);

// Per-level fit tables sharing one threshold resolution. Under the
// empirical-decile policy the threshold is the first decile of lambda_min
// pooled across all levels (fits are thresholded after pooling).
struct LevelStack {
    ResolutionGrid grid;
    EstimatorConfig config;
    const ScalingBasis* basis = nullptr;
    double pi_inv = 0.0;
    std::map<int, LevelEstimator> levels;
};

LevelStack fit_levels(const DesignSample& sample, const ResolutionGrid& grid,
                      const ScalingBasis& basis, const EstimatorConfig& config);

struct AdaptiveValue {
    double value = 0.0;
    int level = 0; // j^@(x) after any demotion
};

// eta_{j^@(x)}^@(x). With fallback = demote-level, both the Lepski
// comparison set and the returned level are restricted to levels whose fit
// at x is valid; with the zero fallback, invalid fits enter as 0 (the
// alpha = 0 convention).
AdaptiveValue adaptive_value(const LevelStack& stack, std::span<const double> x);

struct AdaptiveEstimate {
    LevelStack stack;

    double operator()(std::span<const double> x) const { return adaptive_value(stack, x).value; }
    int level_at(std::span<const double> x) const { return adaptive_value(stack, x).level; }
};

AdaptiveEstimate adaptive_estimate(const DesignSample& sample, const ResolutionGrid& grid,
                                   const ScalingBasis& basis, const EstimatorConfig& config);

// Level map over a set of evaluation points (parallel over points).
std::vector<int> level_map(const LevelStack& stack, const DesignSample& points);

} // namespace mrproj
