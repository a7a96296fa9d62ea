#pragma once

#include "mrproj/adapt.hpp"
#include "mrproj/rng.hpp"
#include "mrproj/signals.hpp"

#include <array>
#include <map>

namespace mrproj {

// Piecewise-constant design density on [0,1] over the ten segments
// A_k = [k/10, (k+1)/10); bounded below by 0.25 by construction.
struct PiecewiseDensity {
    std::array<double, 10> p{}; // segment probabilities, sum 1

    double pdf(double x) const;
    double sample(Rng& rng) const;
};

// p_k = u_k / sum(u), u_k ~ U[0.25, 1] i.i.d.
PiecewiseDensity random_density(std::uint64_t seed);

// Draws n_raw points, snaps each to the nearest node of the 2^-grid_exp
// grid, keeps the first occurrence per node. X-only sample.
DesignSample sample_design(const PiecewiseDensity& density, std::size_t n_raw, int grid_exp,
                           std::uint64_t seed);

// RMSE of the (scaled) signal over the full dyadic grid.
double grid_rmse(const SignalSpec& signal, int grid_exp);

// Rescales so that the signal's grid RMSE is snr * sigma.
SignalSpec scale_snr(const SignalSpec& signal, int grid_exp, double sigma = 1.0, double snr = 7.0);

struct TrialReport {
    std::string signal;
    std::size_t n_effective = 0;
    double rel_rmse = 0.0;
    std::map<int, std::size_t> level_histogram;     // j^@ at sample points
    std::map<int, std::size_t> regressions_per_level;
    std::uint64_t seed = 0;
    double seconds = 0.0;
    std::map<int, double> rel_rmse_by_level; // fixed-level companions
};

struct StudyConfig {
    int r = 3;
    int grid_exp = 15;
    std::size_t n_raw = 3000;
    double sigma = 1.0;
    double snr = 7.0;
    int reps = 100;
    std::uint64_t seed = 1;
    int j_low = 3;
    double kappa = 2.0; // Lepski scale for the study protocol; t_n^2 = kappa log n
    double pi_n = 1.0;  // constant pi in t_n for the practical grid
    ThresholdVariant threshold = ThresholdVariant::empirical_decile;
    Fallback fallback = Fallback::demote_level;
    int table_depth = 12;
};

struct MedianTrialDump {
    std::vector<double> x, y_true, y_noisy, eta_hat;
    std::vector<int> j_at;
};

struct StudyResult {
    std::vector<TrialReport> trials; // in trial order
    std::size_t median_index = 0;    // trial with the median rel_rmse
    PiecewiseDensity density;
    MedianTrialDump median_dump;
};

// The full simulation protocol: one random density per study, `reps`
// independent trials (parallel, per-trial RNG streams), median trial by
// relative RMSE. rel_rmse = RMSE(eta_hat - eta at the sample points) divided
// by max |eta| on the dyadic grid.
StudyResult run_study(const SignalSpec& signal, const StudyConfig& config);

// Single trial; exposed for tests and the CLI.
TrialReport run_trial(const SignalSpec& scaled, double amplitude, const PiecewiseDensity& density,
                      const StudyConfig& config, std::uint64_t trial_seed, const ScalingBasis& basis,
                      MedianTrialDump* dump = nullptr);

} // namespace mrproj
