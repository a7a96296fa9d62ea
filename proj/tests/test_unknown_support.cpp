#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mrproj/rng.hpp"
#include "mrproj/unknown_support.hpp"

#include <algorithm>
#include <cmath>

using namespace mrproj;

namespace {

DesignSample grid_sample(std::size_t n, const std::function<double(double)>& f) {
    DesignSample s;
    s.d = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double pt[] = {x};
        s.add(pt, f(x));
    }
    return s;
}

EstimatorConfig floor_config(int r, double gmin = 2e-6) {
    EstimatorConfig cfg;
    cfg.r = r;
    cfg.policy.variant = ThresholdVariant::known_floor;
    cfg.policy.known_gmin = gmin;
    return cfg;
}

} // namespace

TEST_CASE("split: halves, determinism, multiset union") {
    Rng rng(1, 0);
    DesignSample s;
    s.d = 1;
    for (int i = 0; i < 8; ++i) {
        const double pt[] = {rng.uniform()};
        s.add(pt, static_cast<double>(i));
    }
    const auto sp1 = split(s, 99);
    const auto sp2 = split(s, 99);
    CHECK(sp1.fit_half.size() == 4);
    CHECK(sp1.anchor_half.size() == 4);
    CHECK(sp1.fit_half.x == sp2.fit_half.x);
    CHECK(sp1.anchor_half.y == sp2.anchor_half.y);

    std::vector<double> all = sp1.fit_half.y;
    all.insert(all.end(), sp1.anchor_half.y.begin(), sp1.anchor_half.y.end());
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7});

    DesignSample odd;
    odd.d = 1;
    const double pt[] = {0.1};
    odd.add(pt, 0.0);
    CHECK_THROWS_AS(split(odd, 1), std::invalid_argument);
}

TEST_CASE("find_anchor: radius, self-anchoring, cache preference") {
    DesignSample anchors;
    anchors.d = 1;
    for (double v : {0.10, 0.30, 0.32}) {
        const double pt[] = {v};
        anchors.add(pt, 0.0);
    }
    const int j = 3; // radius 2^-4 = 0.0625
    const auto occ = occupancy(anchors, j);
    AnchorCache cache(j);

    const double far[] = {0.70};
    CHECK(!find_anchor(far, j, anchors, occ, cache));

    const double self[] = {0.10};
    auto a = find_anchor(self, j, anchors, occ, cache);
    REQUIRE(a.has_value());
    CHECK(*a == 0);

    // nearest wins without cache: x = 0.305 is nearer to 0.30 than 0.32
    const double mid[] = {0.305};
    a = find_anchor(mid, j, anchors, occ, cache);
    REQUIRE(a.has_value());
    CHECK(*a == 1);

    // a cached anchor is preferred over a nearer uncached one
    LocalFit dummy;
    dummy.cell = CellIndex{j, {0}};
    cache.put(2, dummy); // anchor 0.32 cached
    a = find_anchor(mid, j, anchors, occ, cache);
    REQUIRE(a.has_value());
    CHECK(*a == 2);
}

TEST_CASE("maltese Haar fit is the mean over shifted in-cell points") {
    Rng rng(7, 0);
    DesignSample s;
    s.d = 1;
    for (int i = 0; i < 800; ++i) {
        const double pt[] = {rng.uniform()};
        s.add(pt, 2.0 * pt[0] + rng.normal());
    }
    const auto sp = split(s, 5);
    MalteseEstimator est(sp, build_basis(1), floor_config(1, 0.5));
    const int j = 3;
    const double x[] = {0.4};
    const double got = est.eval(x, j);

    // oracle: find the anchor by hand, average fit-half Y over the anchored cube
    const auto occ = occupancy(sp.anchor_half, j);
    const AnchorCache cache(j);
    const auto a = find_anchor(x, j, sp.anchor_half, occ, cache);
    REQUIRE(a.has_value());
    const double center = sp.anchor_half.x[*a];
    double mean = 0;
    std::size_t cnt = 0;
    const double h = std::ldexp(1.0, -j - 1);
    for (std::size_t i = 0; i < sp.fit_half.size(); ++i) {
        const double t = sp.fit_half.x[i] - center;
        if (t >= -h && t < h) {
            mean += sp.fit_half.y[i];
            ++cnt;
        }
    }
    REQUIRE(cnt > 0);
    mean /= static_cast<double>(cnt);
    CHECK(got == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("isolated point evaluates to zero") {
    DesignSample s;
    s.d = 1;
    Rng rng(8, 0);
    for (int i = 0; i < 100; ++i) {
        const double pt[] = {rng.uniform(0.0, 0.2)};
        s.add(pt, 1.0);
    }
    const auto sp = split(s, 3);
    MalteseEstimator est(sp, build_basis(1), floor_config(1, 0.5));
    const double x[] = {0.9}; // no anchor within 2^-5
    CHECK(est.eval(x, 4) == 0.0);
}

TEST_CASE("cache: repeated queries in one anchored cell cost one regression") {
    auto s = grid_sample(400, [](double x) { return x; });
    const auto sp = split(s, 11);
    MalteseEstimator est(sp, build_basis(1), floor_config(1, 0.5));
    const int j = 2;
    const double x1[] = {0.312}, x2[] = {0.318}, x3[] = {0.314};
    (void)est.eval(x1, j);
    const std::size_t after_first = est.regression_count(j);
    CHECK(after_first == 1);
    (void)est.eval(x2, j);
    (void)est.eval(x3, j);
    CHECK(est.regression_count(j) == 1); // same anchor serves the whole cell
}

TEST_CASE("shift consistency: anchor at the cell center reproduces the fixed fit") {
    Rng rng(17, 0);
    DesignSample fit_half;
    fit_half.d = 1;
    for (int i = 0; i < 1000; ++i) {
        const double pt[] = {rng.uniform()};
        fit_half.add(pt, std::sin(4.0 * pt[0]) + 0.2 * rng.normal());
    }
    const int j = 3;
    for (int r : {1, 2}) {
        const auto basis = build_basis(r);
        const auto cfg = floor_config(r);

        // anchor half = exact cell centers, so H0(anchor) == the lattice cell
        DesignSample centers;
        centers.d = 1;
        for (int m = 0; m < (1 << j); ++m) {
            const double pt[] = {std::ldexp(static_cast<double>(m) + 0.5, -j)};
            centers.add(pt, 0.0);
        }
        SplitSample sp{fit_half, centers};
        MalteseEstimator maltese(sp, basis, cfg);
        const auto fixed = estimate(fit_half, j, basis, cfg);

        for (int t = 0; t < 200; ++t) {
            const double x[] = {rng.uniform()};
            CHECK(std::abs(maltese.eval(x, j) - fixed(x)) <= 1e-10);
        }
    }
}

TEST_CASE("regression count never exceeds the anchor count") {
    Rng rng(23, 0);
    DesignSample s;
    s.d = 1;
    for (int i = 0; i < 600; ++i) {
        const double pt[] = {rng.uniform()};
        s.add(pt, rng.normal());
    }
    const auto sp = split(s, 7);
    MalteseEstimator est(sp, build_basis(2), floor_config(2));
    const int j = 4;
    for (int t = 0; t < 3000; ++t) {
        const double x[] = {rng.uniform(-0.2, 1.2)};
        (void)est.eval(x, j);
    }
    CHECK(est.regression_count(j) <= sp.anchor_half.size());
}

TEST_CASE("coverage diagnostic") {
    DesignSample anchors;
    anchors.d = 1;
    const double pt[] = {0.5};
    anchors.add(pt, 0.0);
    auto uniform01 = [](Rng& rng) { return std::vector<double>{rng.uniform()}; };
    // j=0: the anchored cube has radius 1/2 and covers all of [0,1]
    CHECK(coverage_diagnostic(anchors, 0, uniform01, 500) == 1.0);

    DesignSample empty;
    empty.d = 1;
    CHECK(coverage_diagnostic(empty, 0, uniform01, 100) == 0.0);

    // uniform anchors, n 2^-j >= 16 log n: high-probability cover
    std::vector<double> fracs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed, 9);
        DesignSample dense;
        dense.d = 1;
        for (int i = 0; i < 4000; ++i) {
            const double q[] = {rng.uniform()};
            dense.add(q, 0.0);
        }
        const int j = 4; // 4000 * 2^-4 = 250 >= 16 log 4000 ~ 132.7
        fracs.push_back(coverage_diagnostic(dense, j, uniform01, 2000, seed));
    }
    std::sort(fracs.begin(), fracs.end());
    CHECK(fracs[fracs.size() / 2] >= 0.99);
}
