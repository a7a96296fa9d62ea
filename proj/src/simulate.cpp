#include "mrproj/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace mrproj {

double PiecewiseDensity::pdf(double x) const {
    if (x < 0.0 || x > 1.0) return 0.0;
    auto k = static_cast<std::size_t>(x * 10.0);
    if (k > 9) k = 9;
    return 10.0 * p[k];
}

double PiecewiseDensity::sample(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t k = 9;
    for (std::size_t i = 0; i < 10; ++i) {
        acc += p[i];
        if (u < acc) {
            k = i;
            break;
        }
    }
    return (static_cast<double>(k) + rng.uniform()) / 10.0;
}

PiecewiseDensity random_density(std::uint64_t seed) {
    Rng rng(seed, /*stream=*/0xDE);
    PiecewiseDensity d;
    double sum = 0.0;
    for (auto& u : d.p) {
        u = rng.uniform(0.25, 1.0);
        sum += u;
    }
    for (auto& u : d.p) u /= sum;
    return d;
}

DesignSample sample_design(const PiecewiseDensity& density, std::size_t n_raw, int grid_exp,
                           std::uint64_t seed) {
    Rng rng(seed, /*stream=*/0x5A);
    const double scale = std::ldexp(1.0, grid_exp);
    DesignSample out;
    out.d = 1;
    std::unordered_set<std::int64_t> seen;
    for (std::size_t i = 0; i < n_raw; ++i) {
        const double x = density.sample(rng);
        const auto node = static_cast<std::int64_t>(std::llround(x * scale));
        if (seen.insert(node).second) out.x.push_back(static_cast<double>(node) / scale);
    }
    return out;
}

double grid_rmse(const SignalSpec& signal, int grid_exp) {
    const auto n = (std::size_t{1} << grid_exp) + 1;
    const double scale = std::ldexp(1.0, -grid_exp);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = signal(static_cast<double>(i) * scale);
        acc += v * v;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

SignalSpec scale_snr(const SignalSpec& signal, int grid_exp, double sigma, double snr) {
    if (!(sigma > 0)) throw std::invalid_argument("scale_snr: sigma must be positive");
    const double rmse = grid_rmse(signal, grid_exp);
    if (rmse == 0.0) throw std::invalid_argument("scale_snr: signal has zero RMSE on the grid");
    SignalSpec out = signal;
    out.scale = signal.scale * snr * sigma / rmse;
    return out;
}

namespace {

double grid_amplitude(const SignalSpec& signal, int grid_exp) {
    const auto n = (std::size_t{1} << grid_exp) + 1;
    const double scale = std::ldexp(1.0, -grid_exp);
    double amp = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        amp = std::max(amp, std::abs(signal(static_cast<double>(i) * scale)));
    return amp;
}

} // namespace

TrialReport run_trial(const SignalSpec& scaled, double amplitude, const PiecewiseDensity& density,
                      const StudyConfig& config, std::uint64_t trial_seed, const ScalingBasis& basis,
                      MedianTrialDump* dump) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialReport report;
    report.signal = scaled.name;
    report.seed = trial_seed;

    DesignSample sample = sample_design(density, config.n_raw, config.grid_exp, trial_seed);
    const std::size_t n = sample.size();
    report.n_effective = n;

    Rng noise_rng(trial_seed, /*stream=*/0x401);
    std::vector<double> y_true(n);
    sample.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        y_true[i] = scaled(sample.x[i]);
        sample.y[i] = y_true[i] + config.sigma * noise_rng.normal();
    }

    const ResolutionGrid grid = study_grid(n, config.j_low, config.kappa, config.pi_n);
    EstimatorConfig ec;
    ec.r = config.r;
    ec.d = 1;
    ec.policy.variant = config.threshold;
    ec.fallback = config.fallback;

    const LevelStack stack = fit_levels(sample, grid, basis, ec);
    for (const auto& [j, est] : stack.levels)
        report.regressions_per_level[j] = est.table().regression_count();

    std::vector<double> eta_hat(n);
    std::vector<int> j_at(n);
    double err2 = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : err2)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const AdaptiveValue v = adaptive_value(stack, sample.point(idx));
        eta_hat[idx] = v.value;
        j_at[idx] = v.level;
        const double e = v.value - y_true[idx];
        err2 += e * e;
    }
    report.rel_rmse = std::sqrt(err2 / static_cast<double>(n)) / amplitude;
    for (std::size_t i = 0; i < n; ++i) ++report.level_histogram[j_at[i]];

    for (const auto& [j, est] : stack.levels) {
        double le2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = est(sample.point(i)) - y_true[i];
            le2 += e * e;
        }
        report.rel_rmse_by_level[j] = std::sqrt(le2 / static_cast<double>(n)) / amplitude;
    }

    if (dump) {
        dump->x = sample.x;
        dump->y_true = y_true;
        dump->y_noisy = sample.y;
        dump->eta_hat = eta_hat;
        dump->j_at = j_at;
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

StudyResult run_study(const SignalSpec& signal, const StudyConfig& config) {
    StudyResult result;
    result.density = random_density(config.seed);
    const SignalSpec scaled =
        config.sigma > 0 ? scale_snr(signal, config.grid_exp, config.sigma, config.snr) : signal;
    const double amplitude = grid_amplitude(scaled, config.grid_exp);
    const ScalingBasis basis = build_basis(config.r, config.table_depth);

    result.trials.resize(static_cast<std::size_t>(config.reps));
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < config.reps; ++t) {
        const std::uint64_t trial_seed = mix64(config.seed) + static_cast<std::uint64_t>(t) + 1;
        result.trials[static_cast<std::size_t>(t)] =
            run_trial(scaled, amplitude, result.density, config, trial_seed, basis, nullptr);
    }

    std::vector<std::size_t> order(result.trials.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = result.trials[a].rel_rmse, rb = result.trials[b].rel_rmse;
        return ra != rb ? ra < rb : a < b;
    });
    result.median_index = order[(order.size() - 1) / 2];

    // re-run the median trial to capture its point dump
    run_trial(scaled, amplitude, result.density, config, result.trials[result.median_index].seed,
              basis, &result.median_dump);
    return result;
}

} // namespace mrproj
