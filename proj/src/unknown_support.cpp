#include "mrproj/unknown_support.hpp"

#include "mrproj/io_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mrproj {

SplitSample split(const DesignSample& sample, std::uint64_t seed) {
    const std::size_t n2 = sample.size();
    if (n2 % 2 != 0) throw std::invalid_argument("split: sample size must be even");
    std::vector<std::uint32_t> idx(n2);
    std::iota(idx.begin(), idx.end(), 0u);
    Rng rng(seed, /*stream=*/0x51u);
    std::shuffle(idx.begin(), idx.end(), rng);

    SplitSample out;
    out.fit_half.d = out.anchor_half.d = sample.d;
    const std::size_t n = n2 / 2;
    for (std::size_t i = 0; i < n2; ++i) {
        auto& half = i < n ? out.fit_half : out.anchor_half;
        half.add(sample.point(idx[i]), sample.y.empty() ? 0.0 : sample.y[idx[i]]);
    }
    if (sample.y.empty()) {
        out.fit_half.y.clear();
        out.anchor_half.y.clear();
    }
    return out;
}

bool AnchorCache::contains(std::uint32_t anchor) const {
    std::lock_guard lock(mu_);
    return fits_.count(anchor) > 0;
}

std::optional<LocalFit> AnchorCache::get(std::uint32_t anchor) const {
    std::lock_guard lock(mu_);
    const auto it = fits_.find(anchor);
    if (it == fits_.end()) return std::nullopt;
    return it->second;
}

void AnchorCache::put(std::uint32_t anchor, LocalFit fit) {
    std::lock_guard lock(mu_);
    fits_.emplace(anchor, std::move(fit));
}

std::size_t AnchorCache::regression_count() const {
    std::lock_guard lock(mu_);
    return fits_.size();
}

std::vector<double> AnchorCache::lambda_mins() const {
    std::lock_guard lock(mu_);
    std::vector<double> out;
    out.reserve(fits_.size());
    for (const auto& [a, f] : fits_) out.push_back(f.lambda_min);
    return out;
}

void AnchorCache::revalidate_all(double pi_inv) {
    std::lock_guard lock(mu_);
    for (auto& [a, f] : fits_) {
        if (f.valid && f.lambda_min < pi_inv) {
            f.valid = false;
            f.alpha.setZero();
        }
    }
}

std::optional<std::uint32_t> find_anchor(std::span<const double> x, int j,
                                         const DesignSample& anchor_half,
                                         const OccupancyMap& anchor_occ, const AnchorCache& cache) {
    const int d = static_cast<int>(x.size());
    const double h = std::ldexp(1.0, -j - 1);
    std::vector<std::int32_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        lo[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::floor(std::ldexp(x[i] - h, j)));
        hi[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::floor(std::ldexp(x[i] + h, j)));
    }

    std::optional<std::uint32_t> best_cached, best_any;
    double best_cached_dist = 0, best_any_dist = 0;
    auto consider = [&](std::uint32_t row) {
        const auto pt = anchor_half.point(row);
        double dist = 0;
        for (int i = 0; i < d; ++i) dist = std::max(dist, std::abs(pt[i] - x[i]));
        if (dist > h) return;
        if (!best_any || dist < best_any_dist || (dist == best_any_dist && row < *best_any)) {
            best_any = row;
            best_any_dist = dist;
        }
        if (cache.contains(row) &&
            (!best_cached || dist < best_cached_dist || (dist == best_cached_dist && row < *best_cached))) {
            best_cached = row;
            best_cached_dist = dist;
        }
    };

    CellIndex probe;
    probe.j = j;
    probe.m.assign(static_cast<std::size_t>(d), 0);
    std::vector<std::int32_t> cur = lo;
    while (true) {
        probe.m = cur;
        const auto it = anchor_occ.cells.find(probe);
        if (it != anchor_occ.cells.end())
            for (std::uint32_t row : it->second) consider(row);
        int pos = d - 1;
        while (pos >= 0) {
            if (++cur[static_cast<std::size_t>(pos)] <= hi[static_cast<std::size_t>(pos)]) break;
            cur[static_cast<std::size_t>(pos)] = lo[static_cast<std::size_t>(pos)];
            --pos;
        }
        if (pos < 0) break;
    }
    return best_cached ? best_cached : best_any;
}

struct MalteseEstimator::Level {
    AnchorCache cache;
    OccupancyMap anchor_occ;
    OccupancyMap fit_occ;
    double pi_inv = 0.0;
    std::once_flag prep_once;
    std::atomic<bool> prepared{false};

    explicit Level(int j) : cache(j) {}
};

MalteseEstimator::MalteseEstimator(SplitSample split_sample, const ScalingBasis& basis,
                                   EstimatorConfig config)
    : split_(std::move(split_sample)), basis_(&basis), config_(std::move(config)) {}

MalteseEstimator::~MalteseEstimator() = default;

MalteseEstimator::Level& MalteseEstimator::level(int j) const {
    std::lock_guard lock(levels_mu_);
    auto it = levels_.find(j);
    if (it == levels_.end()) {
        auto lv = std::make_unique<Level>(j);
        lv->anchor_occ = occupancy(split_.anchor_half, j);
        lv->fit_occ = occupancy(split_.fit_half, j);
        if (config_.policy.variant != ThresholdVariant::empirical_decile)
            lv->pi_inv = config_.policy.pi_inv(split_.fit_half.size());
        it = levels_.emplace(j, std::move(lv)).first;
    }
    return *it->second;
}

LocalFit MalteseEstimator::fit_for_anchor(Level& lv, std::uint32_t anchor) const {
    if (auto hit = lv.cache.get(anchor)) return std::move(*hit);
    const int j = lv.cache.level();
    const int d = split_.fit_half.d;
    const auto a = split_.anchor_half.point(anchor);
    const double h = std::ldexp(1.0, -j - 1);

    // candidate fit-half rows from the cells the anchor cube intersects
    DesignSample shifted;
    shifted.d = d;
    std::vector<std::int32_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        lo[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::floor(std::ldexp(a[i] - h, j)));
        hi[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::floor(std::ldexp(a[i] + h, j)));
    }
    CellIndex probe;
    probe.j = j;
    std::vector<std::int32_t> cur = lo;
    while (true) {
        probe.m = cur;
        const auto it = lv.fit_occ.cells.find(probe);
        if (it != lv.fit_occ.cells.end()) {
            for (std::uint32_t row : it->second)
                shifted.add(shift(split_.fit_half.point(row), a, j), split_.fit_half.y[row]);
        }
        int pos = d - 1;
        while (pos >= 0) {
            if (++cur[static_cast<std::size_t>(pos)] <= hi[static_cast<std::size_t>(pos)]) break;
            cur[static_cast<std::size_t>(pos)] = lo[static_cast<std::size_t>(pos)];
            --pos;
        }
        if (pos < 0) break;
    }

    std::vector<std::uint32_t> rows(shifted.size());
    std::iota(rows.begin(), rows.end(), 0u);
    CellIndex h0;
    h0.j = j;
    h0.m.assign(static_cast<std::size_t>(d), 0);
    LocalFit fit = local_fit(h0, shifted, *basis_, lv.pi_inv, rows, split_.fit_half.size());
    lv.cache.put(anchor, fit);
    return fit;
}

void MalteseEstimator::prepare_level(int j) const {
    Level& lv = level(j);
    std::call_once(lv.prep_once, [&] {
        const auto n_anchor = static_cast<std::int64_t>(split_.anchor_half.size());
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t a = 0; a < n_anchor; ++a)
            (void)fit_for_anchor(lv, static_cast<std::uint32_t>(a));
        if (config_.policy.variant == ThresholdVariant::empirical_decile) {
            auto lams = lv.cache.lambda_mins();
            if (!lams.empty()) {
                lv.pi_inv = quantile_type7(std::move(lams), 0.1);
                lv.cache.revalidate_all(lv.pi_inv);
            }
        }
        lv.prepared.store(true);
    });
}

double MalteseEstimator::eval(std::span<const double> x, int j) const {
    Level& lv = level(j);
    if (config_.policy.variant == ThresholdVariant::empirical_decile && !lv.prepared.load())
        prepare_level(j);
    const auto anchor = find_anchor(x, j, split_.anchor_half, lv.anchor_occ, lv.cache);
    if (!anchor) return 0.0;
    const LocalFit fit = fit_for_anchor(lv, *anchor);
    const auto xt = shift(x, split_.anchor_half.point(*anchor), j);
    return evaluate_fit(fit, *basis_, xt, config_);
}

std::size_t MalteseEstimator::regression_count(int j) const {
    return level(j).cache.regression_count();
}

double MalteseEstimator::pi_inv(int j) const {
    Level& lv = level(j);
    if (config_.policy.variant == ThresholdVariant::empirical_decile && !lv.prepared.load())
        prepare_level(j);
    return lv.pi_inv;
}

AdaptiveValue MalteseEstimator::adaptive_eval(std::span<const double> x,
                                              const ResolutionGrid& grid) const {
    const int d = static_cast<int>(x.size());
    const bool demote = config_.fallback == Fallback::demote_level;
    std::vector<int> candidates;
    for (int j : grid.levels()) {
        if (!demote) {
            candidates.push_back(j);
            continue;
        }
        Level& lv = level(j);
        if (config_.policy.variant == ThresholdVariant::empirical_decile && !lv.prepared.load())
            prepare_level(j);
        const auto anchor = find_anchor(x, j, split_.anchor_half, lv.anchor_occ, lv.cache);
        if (!anchor) continue;
        if (fit_for_anchor(lv, *anchor).valid) candidates.push_back(j);
    }
    AdaptiveValue out;
    if (candidates.empty()) {
        out.level = grid.j_low;
        out.value = 0.0;
        return out;
    }
    out.level = lepski_select(
        candidates, [&](int j) { return eval(x, j); }, grid, d);
    out.value = eval(x, out.level);
    return out;
}

double coverage_diagnostic(const DesignSample& anchor_half, int j,
                           const std::function<std::vector<double>(Rng&)>& sampler, std::size_t m,
                           std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("coverage_diagnostic: m must be >= 1");
    const OccupancyMap occ = occupancy(anchor_half, j);
    const AnchorCache cache(j);
    std::size_t hits = 0;
    Rng rng(seed, /*stream=*/0xC0u);
    for (std::size_t t = 0; t < m; ++t) {
        const auto x = sampler(rng);
        if (find_anchor(x, j, anchor_half, occ, cache)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(m);
}

} // namespace mrproj
