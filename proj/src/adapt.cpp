#include "mrproj/adapt.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mrproj {

namespace {

int floor_log2(std::uint64_t v) {
    int j = -1;
    while (v) {
        v >>= 1;
        ++j;
    }
    return j;
}

} // namespace

ResolutionGrid resolution_grid(std::size_t n, int d, int r, double kappa, double pi_n,
                               GridMode mode, double s) {
    if (n < 3) throw std::invalid_argument("resolution_grid: n must be >= 3");
    if (kappa <= 0) throw std::invalid_argument("resolution_grid: kappa must be positive");
    ResolutionGrid grid;
    grid.n = n;
    grid.kappa = kappa;
    grid.pi_n = pi_n;
    const double nn = static_cast<double>(n);
    grid.t_n = std::sqrt(kappa * pi_n * pi_n * std::log(nn));

    const double expo = mode == GridMode::known_r ? 1.0 / (2.0 * r + d) : 1.0 / (2.0 * s + d);
    const auto base = static_cast<std::uint64_t>(std::floor(std::pow(nn, expo)));
    grid.j_low = std::max(floor_log2(std::max<std::uint64_t>(base, 1)), 0);

    const double cap = nn / (grid.t_n * grid.t_n);
    const auto capi = static_cast<std::uint64_t>(std::floor(std::max(cap, 0.0)));
    grid.J = capi ? floor_log2(capi) / d : 0;
    if (grid.J < grid.j_low) {
        std::ostringstream msg;
        msg << "resolution_grid: J=" << grid.J << " < j_low=" << grid.j_low
            << " (need 2^(J d) <= n t_n^-2 = " << cap << " with t_n^2 = kappa pi_n^2 log n = "
            << grid.t_n * grid.t_n << "; increase n or decrease kappa/pi_n)";
        throw std::runtime_error(msg.str());
    }
    return grid;
}

ResolutionGrid study_grid(std::size_t n, int j_low, double kappa, double pi_n) {
    if (n < 3) throw std::invalid_argument("study_grid: n must be >= 3");
    ResolutionGrid grid;
    grid.n = n;
    grid.kappa = kappa;
    grid.pi_n = pi_n;
    const double nn = static_cast<double>(n);
    grid.t_n = std::sqrt(kappa * pi_n * pi_n * std::log(nn));
    grid.j_low = j_low;
    grid.J = static_cast<int>(std::ceil(std::log2(nn / std::log10(nn))));
    if (grid.J < grid.j_low)
        throw std::runtime_error("study_grid: practical J below j_low; n too small");
    return grid;
}

double lepski_threshold(int j, int k, const ResolutionGrid& grid, int d) {
    const double dj = std::exp2(0.5 * d * j);
    const double dk = std::exp2(0.5 * d * k);
    return (dj + dk) * grid.t_n / std::sqrt(static_cast<double>(grid.n));
}

int lepski_select(const std::vector<int>& candidates,
                  const std::function<double(int)>& value_at, const ResolutionGrid& grid, int d) {
    if (candidates.empty()) return grid.J;
    std::vector<double> vals(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) vals[i] = value_at(candidates[i]);
    for (std::size_t a = 0; a + 1 < candidates.size(); ++a) {
        bool ok = true;
        for (std::size_t b = a + 1; b < candidates.size(); ++b) {
            if (std::abs(vals[a] - vals[b]) > lepski_threshold(candidates[a], candidates[b], grid, d)) {
                ok = false;
                break;
            }
        }
        if (ok) return candidates[a];
    }
    return candidates.back();
}

LevelStack fit_levels(const DesignSample& sample, const ResolutionGrid& grid,
                      const ScalingBasis& basis, const EstimatorConfig& config) {
    LevelStack stack;
    stack.grid = grid;
    stack.config = config;
    stack.basis = &basis;

    if (config.policy.variant == ThresholdVariant::empirical_decile) {
        // pass 1: rank guard only, pool lambda_min across levels
        for (int j : grid.levels())
            stack.levels.emplace(j, estimate(sample, j, basis, config, 0.0));
        std::vector<CellFitTable> tables;
        tables.reserve(stack.levels.size());
        for (const auto& [j, est] : stack.levels) tables.push_back(est.table());
        stack.pi_inv = empirical_pi_n(tables);
        for (auto& [j, est] : stack.levels) revalidate(est.table(), stack.pi_inv);
    } else {
        stack.pi_inv = config.policy.pi_inv(sample.size());
        for (int j : grid.levels())
            stack.levels.emplace(j, estimate(sample, j, basis, config, stack.pi_inv));
    }
    return stack;
}

AdaptiveValue adaptive_value(const LevelStack& stack, std::span<const double> x) {
    const int d = static_cast<int>(x.size());
    std::vector<int> candidates;
    candidates.reserve(stack.levels.size());
    const bool demote = stack.config.fallback == Fallback::demote_level;
    for (const auto& [j, est] : stack.levels) {
        if (!demote || est.valid_at(x)) candidates.push_back(j);
    }
    AdaptiveValue out;
    if (candidates.empty()) {
        out.level = stack.grid.j_low;
        out.value = 0.0;
        return out;
    }
    const int jat = lepski_select(
        candidates, [&](int j) { return stack.levels.at(j)(x); }, stack.grid, d);
    out.level = jat;
    out.value = stack.levels.at(jat)(x);
    if (!demote) return out;

    // demote to the highest level <= j^@ whose fit at x is valid; with the
    // comparison already restricted to valid levels this only fires when the
    // selected level lost validity through a raised threshold
    if (!stack.levels.at(jat).valid_at(x)) {
        for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
            if (*it <= jat && stack.levels.at(*it).valid_at(x)) {
                out.level = *it;
                out.value = stack.levels.at(*it)(x);
                return out;
            }
        }
        out.value = 0.0;
    }
    return out;
}

AdaptiveEstimate adaptive_estimate(const DesignSample& sample, const ResolutionGrid& grid,
                                   const ScalingBasis& basis, const EstimatorConfig& config) {
    return AdaptiveEstimate{fit_levels(sample, grid, basis, config)};
}

std::vector<int> level_map(const LevelStack& stack, const DesignSample& points) {
    const std::size_t n = points.size();
    std::vector<int> out(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        out[static_cast<std::size_t>(i)] = adaptive_value(stack, points.point(static_cast<std::size_t>(i))).level;
    return out;
}

} // namespace mrproj
