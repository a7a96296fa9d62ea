#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mrproj/lattice.hpp"
#include "mrproj/rng.hpp"

#include <cmath>
#include <set>

using namespace mrproj;

TEST_CASE("locate basics") {
    {
        const double x[] = {0.3};
        CHECK(locate(x, 4).m[0] == 4);
    }
    {
        const double x[] = {0.0};
        CHECK(locate(x, 3).m[0] == 0);
    }
    {
        const double x[] = {0.51, 0.24};
        const auto c = locate(x, 2);
        CHECK(c.m[0] == 2);
        CHECK(c.m[1] == 0);
    }
    {
        // boundary clamp keeps x = 1 inside the partition
        const double x[] = {1.0};
        CHECK(locate(x, 5).m[0] == 31);
    }
}

TEST_CASE("locate of cell centers is the identity") {
    Rng rng(11, 0);
    for (int t = 0; t < 1000; ++t) {
        const int j = static_cast<int>(rng.uniform_int(11));
        const auto m = static_cast<std::int32_t>(rng.uniform_int(std::uint64_t{1} << j));
        const double x[] = {std::ldexp(static_cast<double>(m) + 0.5, -j)};
        const auto c = locate(x, j);
        CHECK(c.j == j);
        CHECK(c.m[0] == m);
    }
}

TEST_CASE("occupancy partitions the sample") {
    Rng rng(12, 0);
    DesignSample s;
    s.d = 2;
    for (int i = 0; i < 500; ++i) {
        const double pt[] = {rng.uniform(), rng.uniform()};
        s.add(pt, rng.uniform());
    }
    const auto occ = occupancy(s, 3);
    std::set<std::uint32_t> seen;
    std::size_t total = 0;
    for (const auto& [cell, rows] : occ.cells) {
        total += rows.size();
        for (auto ridx : rows) {
            CHECK(seen.insert(ridx).second); // disjoint
            CHECK(locate(s.point(ridx), 3) == cell);
        }
    }
    CHECK(total == s.size()); // exhaustive
    CHECK(occ.cells.size() <= std::min<std::size_t>(64, s.size()));
}

TEST_CASE("occupancy: single cell at j=0 and three points in one cell") {
    DesignSample s;
    s.d = 1;
    for (double v : {0.31, 0.32, 0.33}) {
        const double pt[] = {v};
        s.add(pt, 0.0);
    }
    const auto occ0 = occupancy(s, 0);
    REQUIRE(occ0.cells.size() == 1);
    CHECK(occ0.cells.begin()->second.size() == 3);

    const auto occ3 = occupancy(s, 3); // all three land in cell m=2
    bool found = false;
    for (const auto& [cell, rows] : occ3.cells)
        if (rows.size() == 3) found = true;
    CHECK(found);
    CHECK(occ3.cells.size() == 1);
}

TEST_CASE("uniform n=4096 fills all 8 cells at j=3") {
    Rng rng(13, 0);
    DesignSample s;
    s.d = 1;
    for (int i = 0; i < 4096; ++i) {
        const double pt[] = {rng.uniform()};
        s.add(pt, 0.0);
    }
    CHECK(occupancy(s, 3).cells.size() == 8);
}

TEST_CASE("shift maps the anchor to the cell center") {
    {
        const double u[] = {0.37}, a[] = {0.37};
        const auto v = shift(u, a, 2);
        CHECK(v[0] == doctest::Approx(0.125)); // 2^{-3}
    }
    {
        const double a[] = {0.3}, u[] = {0.3 + 0.125};
        const auto v = shift(u, a, 2);
        CHECK(v[0] == doctest::Approx(0.25)); // corner of H0
    }
    {
        const double a[] = {0.3}, u[] = {0.35};
        const auto v = shift(u, a, 2);
        CHECK(v[0] == doctest::Approx(0.175));
    }
}

TEST_CASE("shift is an isometry") {
    Rng rng(14, 0);
    for (int t = 0; t < 200; ++t) {
        const double a[] = {rng.uniform(), rng.uniform()};
        const double u[] = {rng.uniform(), rng.uniform()};
        const double v[] = {rng.uniform(), rng.uniform()};
        const int j = static_cast<int>(rng.uniform_int(8));
        const auto su = shift(u, a, j);
        const auto sv = shift(v, a, j);
        for (int i = 0; i < 2; ++i) CHECK(su[i] - sv[i] == doctest::Approx(u[i] - v[i]).epsilon(1e-13));
    }
}
