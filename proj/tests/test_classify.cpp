#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mrproj/classify.hpp"
#include "mrproj/rng.hpp"

#include <cmath>

using namespace mrproj;

namespace {

DesignSample draw_labeled(const ClassificationScenario& sc, std::size_t n, std::uint64_t seed) {
    Rng rng(seed, 0x7A);
    DesignSample s;
    s.d = sc.d;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = sc.sample_x(rng);
        const double label = rng.uniform() < sc.eta(x) ? 1.0 : 0.0;
        s.add(x, label);
    }
    return s;
}

ThresholdPolicy floor_policy(double gmin) {
    ThresholdPolicy p;
    p.variant = ThresholdVariant::known_floor;
    p.known_gmin = gmin;
    return p;
}

} // namespace

TEST_CASE("plug_in convention and monotone-transform invariance") {
    CHECK(plug_in(0.5) == 1);
    CHECK(plug_in(0.49) == 0);
    CHECK(plug_in(0.0) == 0);
    Rng rng(1, 0);
    for (int t = 0; t < 500; ++t) {
        const double eta = rng.uniform();
        const double a = rng.uniform(0.1, 5.0);
        CHECK(plug_in(eta) == plug_in(a * (eta - 0.5) + 0.5));
    }
}

TEST_CASE("margin scenario: margin law P(0 < |2 eta - 1| <= t) = t^theta") {
    for (double theta : {1.0, 2.0}) {
        const auto sc = margin_scenario(theta, 1.0, 1);
        Rng rng(2, 0);
        const int m = 200000;
        for (double t : {0.25, 0.5, 0.75}) {
            int hits = 0;
            for (int i = 0; i < m; ++i) {
                const auto x = sc.sample_x(rng);
                const double margin = std::abs(2.0 * sc.eta(x) - 1.0);
                if (margin > 0.0 && margin <= t) ++hits;
            }
            const double freq = static_cast<double>(hits) / m;
            CHECK(freq == doctest::Approx(std::pow(t, theta)).epsilon(0.05));
        }
    }
    // hard-margin limit
    const auto hard = margin_scenario(std::numeric_limits<double>::infinity(), 1.0, 1);
    Rng rng(3, 0);
    for (int i = 0; i < 100; ++i) {
        const auto x = hard.sample_x(rng);
        const double eta = hard.eta(x);
        CHECK((eta == 0.0 || eta == 1.0));
    }
}

TEST_CASE("excess risk: Bayes scores exactly zero, flip scores E|2 eta - 1|") {
    const auto sc = margin_scenario(1.0, 1.0, 1);
    auto bayes = [&](std::span<const double> x) { return plug_in(sc.eta(x)); };
    for (std::uint64_t seed : {1ull, 7ull, 42ull}) {
        const auto rr = excess_risk_mc(bayes, sc, 20000, seed);
        CHECK(rr.estimate == 0.0);
        CHECK(rr.stderr_ == 0.0);
    }
    auto flip = [&](std::span<const double> x) { return 1 - plug_in(sc.eta(x)); };
    const auto rr = excess_risk_mc(flip, sc, 200000, 5);
    // E|2 x - 1| = 1/2 under the uniform design
    CHECK(std::abs(rr.estimate - 0.5) <= 3.0 * rr.stderr_ + 1e-3);

    // eta == 1/2 everywhere: zero excess risk for any classifier
    ClassificationScenario half = sc;
    half.eta = [](std::span<const double>) { return 0.5; };
    const auto rr2 = excess_risk_mc(flip, half, 10000, 9);
    CHECK(rr2.estimate == 0.0);

    CHECK_THROWS_AS(excess_risk_mc(bayes, sc, 0, 1), std::invalid_argument);
}

TEST_CASE("train_classifier: argument checks and all-ones labels") {
    const auto sc = margin_scenario(1.0, 1.0, 1);
    const auto basis = build_basis(1);
    const auto grid = study_grid(256, 2, 1.0, 1.0);

    DesignSample bad;
    bad.d = 1;
    const double pt[] = {0.2};
    bad.add(pt, 0.7);
    const double pt2[] = {0.4};
    bad.add(pt2, 1.0);
    CHECK_THROWS_AS(train_classifier(bad, sc, grid, basis, floor_policy(0.5), false, 1),
                    std::invalid_argument);

    Rng rng(11, 0);
    DesignSample ones;
    ones.d = 1;
    for (int i = 0; i < 512; ++i) {
        const double q[] = {rng.uniform()};
        ones.add(q, 1.0);
    }
    const auto clf = train_classifier(ones, sc, grid, basis, floor_policy(0.5), false, 3);
    for (int t = 0; t < 200; ++t) {
        const double q[] = {rng.uniform()};
        CHECK(clf(q) == 1); // Haar cell means of all-ones labels are 1 wherever anchored
    }
}

TEST_CASE("deterministic boundary labels: low hold-out error away from the boundary") {
    const auto sc = margin_scenario(std::numeric_limits<double>::infinity(), 1.0, 1);
    const auto basis = build_basis(1);
    std::vector<double> errs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DesignSample train = draw_labeled(sc, 4096, seed); // labels 1{x > 1/2}
        const auto grid = study_grid(2048, 4, 1.0, 1.0);
        const auto clf =
            train_classifier(train, sc, grid, basis, floor_policy(0.5), false, seed);
        Rng rng(seed, 0x99);
        int wrong = 0, total = 0;
        for (int t = 0; t < 2000; ++t) {
            const double x[] = {rng.uniform()};
            if (std::abs(x[0] - 0.5) < std::ldexp(1.0, -grid.j_low)) continue; // boundary cells
            ++total;
            if (clf(x) != plug_in(sc.eta(x))) ++wrong;
        }
        errs.push_back(static_cast<double>(wrong) / std::max(total, 1));
    }
    std::sort(errs.begin(), errs.end());
    CHECK(errs[errs.size() / 2] < 0.05);
}

TEST_CASE("excess risk decreases with n on the theta=1 scenario (directional)") {
    const auto sc = margin_scenario(1.0, 1.0, 1);
    const auto basis = build_basis(2);
    std::vector<double> med;
    for (std::size_t n : {std::size_t{512}, std::size_t{4096}}) {
        std::vector<double> risks;
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
            const std::uint64_t seed = 1000 * (rep + 1);
            DesignSample train = draw_labeled(sc, 2 * n, seed);
            const auto v = static_cast<std::uint64_t>(
                std::floor(std::pow(static_cast<double>(n), 1.0 / 3.0)));
            int js = 0;
            while ((std::uint64_t{2} << js) <= v) ++js;
            const auto grid = study_grid(n, js, 1.0, 1.0);
            const auto clf = train_classifier(train, sc, grid, basis, floor_policy(2e-4), false, seed);
            risks.push_back(excess_risk_mc([&](std::span<const double> x) { return clf(x); }, sc,
                                           50000, seed)
                                .estimate);
        }
        std::sort(risks.begin(), risks.end());
        med.push_back(risks[risks.size() / 2]);
    }
    CHECK(med[1] < med[0]);
}
