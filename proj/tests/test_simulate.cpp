#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mrproj/lpe.hpp"
#include "mrproj/rng.hpp"
#include "mrproj/simulate.hpp"

#include <cmath>

using namespace mrproj;

TEST_CASE("benchmark signals: frozen reference values") {
    const auto heavisine = benchmark_signal("heavisine");
    CHECK(heavisine(0.5) == doctest::Approx(-2.0).epsilon(1e-12));
    // independently computed references
    CHECK(heavisine(0.1) == doctest::Approx(4.0 * std::sin(0.4 * std::numbers::pi)).epsilon(1e-12));
    // signs cancel at 0.8: -sign(0.5) - sign(-0.08) = 0
    CHECK(heavisine(0.8) == doctest::Approx(-2.351141009169891).epsilon(1e-12));

    const auto blocks = benchmark_signal("blocks");
    CHECK(blocks(0.05) == doctest::Approx(0.0));
    CHECK(blocks(0.2) == doctest::Approx(2.0));        // 4 - 5 + 3
    CHECK(std::abs(blocks(0.95)) < 1e-12); // the eleven heights sum to zero

    const auto bumps = benchmark_signal("bumps");
    CHECK(bumps(0.4) == doctest::Approx(4.203486667518471).epsilon(1e-12)); // frozen
    CHECK(bumps(0.0) == doctest::Approx(0.00015985175071944914).epsilon(1e-9)); // frozen

    const auto doppler = benchmark_signal("doppler");
    CHECK(doppler(0.5) == doctest::Approx(0.5 * std::sin(2.0 * std::numbers::pi * 1.05 / 0.55)).epsilon(1e-12));
    CHECK(std::abs(doppler(1e-8)) < 1e-3); // sqrt(x(1-x)) -> 0

    CHECK_THROWS_AS(benchmark_signal("unknown"), std::invalid_argument);
}

TEST_CASE("blocks is piecewise constant") {
    const auto blocks = benchmark_signal("blocks");
    Rng rng(4, 0);
    for (int t = 0; t < 2000; ++t) {
        const double x = rng.uniform(0.0, 0.999);
        const double h = 1e-6;
        // skip probes adjacent to a jump
        bool near = false;
        for (double p : {.1, .13, .15, .23, .25, .40, .44, .65, .76, .78, .81})
            if (std::abs(x - p) < 2 * h) near = true;
        if (near) continue;
        CHECK(blocks(x + h) == blocks(x));
    }
}

TEST_CASE("random density: normalization, floor, uniform symmetry") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto d = random_density(seed);
        double sum = 0;
        for (double p : d.p) {
            sum += p;
            CHECK(10.0 * p >= 0.25); // density floor mu_min = 0.25
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        // integral of the density over [0,1]
        double integral = 0;
        for (int k = 0; k < 10; ++k) integral += d.pdf(0.05 + 0.1 * k) * 0.1;
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-12));
    }
    PiecewiseDensity uniform;
    uniform.p.fill(0.1);
    CHECK(uniform.pdf(0.33) == doctest::Approx(1.0));
    CHECK(uniform.pdf(0.91) == doctest::Approx(1.0));
}

TEST_CASE("sample_design: snapping, dedupe, typical effective size") {
    PiecewiseDensity uniform;
    uniform.p.fill(0.1);
    const auto s = sample_design(uniform, 3000, 15, 12345);
    CHECK(s.size() < 3000);
    CHECK(s.size() > 2600); // dedupe removes ~150 points on average
    const double scale = std::ldexp(1.0, 15);
    for (double x : s.x) {
        const double node = x * scale;
        CHECK(node == std::floor(node)); // integer multiples of 2^-15
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
    // duplicates collapse: a tiny grid forces collisions
    const auto tiny = sample_design(uniform, 3000, 3, 7);
    CHECK(tiny.size() <= 9);
}

TEST_CASE("scale_snr: ratio 7 and degenerate input") {
    const auto heavisine = benchmark_signal("heavisine");
    const auto scaled = scale_snr(heavisine, 12, 1.0, 7.0);
    CHECK(grid_rmse(scaled, 12) == doctest::Approx(7.0).epsilon(1e-10));
    const auto unit = scale_snr(heavisine, 12, 1.0, 1.0);
    CHECK(grid_rmse(unit, 12) == doctest::Approx(1.0).epsilon(1e-10));

    SignalSpec zero;
    zero.name = "zero";
    zero.f = [](double) { return 0.0; };
    CHECK_THROWS_AS(scale_snr(zero, 10), std::invalid_argument);
    CHECK_THROWS_AS(scale_snr(heavisine, 10, 0.0), std::invalid_argument);
}

TEST_CASE("run_study: determinism, reps=1 median, level grid") {
    const auto signal = benchmark_signal("blocks");
    StudyConfig cfg;
    cfg.reps = 3;
    cfg.seed = 77;
    cfg.n_raw = 1500;
    const auto a = run_study(signal, cfg);
    const auto b = run_study(signal, cfg);
    REQUIRE(a.trials.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(a.trials[t].rel_rmse == b.trials[t].rel_rmse);
        CHECK(a.trials[t].n_effective == b.trials[t].n_effective);
        CHECK(a.trials[t].level_histogram == b.trials[t].level_histogram);
    }
    CHECK(a.median_index == b.median_index);
    CHECK(a.median_dump.x == b.median_dump.x);
    CHECK(a.median_dump.eta_hat == b.median_dump.eta_hat);

    StudyConfig single = cfg;
    single.reps = 1;
    const auto c = run_study(signal, single);
    CHECK(c.median_index == 0);

    // J_n = {3,...,10} in the n ~ 2850 regime
    StudyConfig full = cfg;
    full.n_raw = 3000;
    full.reps = 1;
    const auto d = run_study(signal, full);
    const auto& regs = d.trials[0].regressions_per_level;
    REQUIRE(!regs.empty());
    CHECK(regs.begin()->first == 3);
    CHECK(regs.rbegin()->first == 10);
    CHECK(regs.at(3) == 8);
    CHECK(regs.at(10) <= 1024);
}

TEST_CASE("noiseless fits beat noisy ones at the same level") {
    const auto signal = benchmark_signal("blocks");
    StudyConfig noisy;
    noisy.reps = 2;
    noisy.seed = 5;
    noisy.n_raw = 1500;
    StudyConfig clean = noisy;
    clean.sigma = 0.0;
    const auto rn = run_study(signal, noisy);
    const auto rc = run_study(signal, clean);
    CHECK(rc.trials[0].rel_rmse < rn.trials[0].rel_rmse);
}

TEST_CASE("lpe baseline: NW average, exact constant fit, counts") {
    DesignSample s;
    s.d = 1;
    Rng rng(6, 0);
    for (int i = 0; i < 400; ++i) {
        const double pt[] = {rng.uniform()};
        s.add(pt, 2.0 + rng.normal());
    }
    const double evals[] = {0.3, 0.5, 0.7};
    const auto deg0 = lpe_baseline(s, evals, 0.1, 0);
    CHECK(deg0.regression_count == 3);
    // degree 0 with a box kernel is the windowed average
    for (int q = 0; q < 3; ++q) {
        double mean = 0;
        int cnt = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (std::abs(s.x[i] - evals[q]) <= 0.1) {
                mean += s.y[i];
                ++cnt;
            }
        }
        REQUIRE(deg0.valid[static_cast<std::size_t>(q)] == 1);
        CHECK(deg0.estimates[static_cast<std::size_t>(q)] ==
              doctest::Approx(mean / cnt).epsilon(1e-12));
    }

    DesignSample flat;
    flat.d = 1;
    for (int i = 0; i < 50; ++i) {
        const double pt[] = {static_cast<double>(i) / 50.0};
        flat.add(pt, 3.25);
    }
    const auto exact = lpe_baseline(flat, evals, 0.15, 2);
    for (int q = 0; q < 3; ++q) CHECK(exact.estimates[static_cast<std::size_t>(q)] == doctest::Approx(3.25));

    // singular window -> flagged invalid
    const double lonely[] = {0.95};
    const auto sing = lpe_baseline(flat, lonely, 1e-6, 2);
    CHECK(sing.valid[0] == 0);
    CHECK(sing.estimates[0] == 0.0);

    CHECK_THROWS_AS(lpe_baseline(flat, evals, -1.0, 0), std::invalid_argument);
}

TEST_CASE("regression-count dominance over the LPE at every level") {
    const auto signal = benchmark_signal("doppler");
    StudyConfig cfg;
    cfg.reps = 1;
    cfg.seed = 9;
    const auto result = run_study(signal, cfg);
    const auto& trial = result.trials[0];
    for (const auto& [j, count] : trial.regressions_per_level) {
        CHECK(count <= std::min<std::size_t>(std::size_t{1} << j, trial.n_effective));
        CHECK(count < trial.n_effective); // LPE would need one per evaluation point
    }
}
