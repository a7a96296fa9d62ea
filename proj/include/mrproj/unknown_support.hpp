#pragma once

#include "mrproj/adapt.hpp"
#include "mrproj/regress.hpp"
#include "mrproj/rng.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>

namespace mrproj {

struct SplitSample {
    DesignSample fit_half;    // used for the local regressions
    DesignSample anchor_half; // used to identify the support
};

// Seed-deterministic random equipartition of a sample of even size.
SplitSample split(const DesignSample& sample, std::uint64_t seed);

// One shifted-cell regression per anchor actually used; concurrent fills of
// the same anchor are idempotent.
class AnchorCache {
public:
    explicit AnchorCache(int j) : j_(j) {}

    int level() const { return j_; }
    bool contains(std::uint32_t anchor) const;
    std::optional<LocalFit> get(std::uint32_t anchor) const;
    // stores the fit unless an identical entry is already present
    void put(std::uint32_t anchor, LocalFit fit);
    std::size_t regression_count() const;
    std::vector<double> lambda_mins() const;
    void revalidate_all(double pi_inv);

private:
    int j_;
    mutable std::mutex mu_;
    std::unordered_map<std::uint32_t, LocalFit> fits_;
};

// Among the anchor points inside the cube x - 2^{-j-1} + 2^{-j}[0,1]^d,
// prefers one already cached, then the nearest in l-infinity (ties broken by
// index). Empty when no anchor point is within l-infinity distance 2^{-j-1}.
std::optional<std::uint32_t> find_anchor(std::span<const double> x, int j,
                                         const DesignSample& anchor_half,
                                         const OccupancyMap& anchor_occ, const AnchorCache& cache);

// Moving-grid estimator eta_j^maltese bundling the split sample, the anchor
// occupancy index and the per-level caches.
class MalteseEstimator {
public:
    MalteseEstimator(SplitSample split, const ScalingBasis& basis, EstimatorConfig config);
    ~MalteseEstimator(); // out of line: Level is incomplete here

    // eta_j at x: 0 when no anchor qualifies, otherwise the shifted-cell fit
    // fetched from (or inserted into) the level cache.
    double eval(std::span<const double> x, int j) const;

    // resolves the decile threshold for a level by fitting every anchor once
    void prepare_level(int j) const;

    std::size_t regression_count(int j) const;
    const SplitSample& halves() const { return split_; }
    const EstimatorConfig& config() const { return config_; }
    double pi_inv(int j) const;

    // Lepski selection across levels of the moving-grid estimates
    AdaptiveValue adaptive_eval(std::span<const double> x, const ResolutionGrid& grid) const;

private:
    struct Level;
    Level& level(int j) const;
    LocalFit fit_for_anchor(Level& lv, std::uint32_t anchor) const;

    SplitSample split_;
    const ScalingBasis* basis_;
    EstimatorConfig config_;
    mutable std::mutex levels_mu_;
    mutable std::map<int, std::unique_ptr<Level>> levels_;
};

// Fraction of `m` probes drawn from `sampler` for which an anchor exists.
double coverage_diagnostic(const DesignSample& anchor_half, int j,
                           const std::function<std::vector<double>(Rng&)>& sampler, std::size_t m,
                           std::uint64_t seed = 0);

} // namespace mrproj
