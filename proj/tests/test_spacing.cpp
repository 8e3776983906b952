#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "pdgrid/errors.hpp"
#include "pdgrid/spacing.hpp"

using namespace pdgrid;
using doctest::Approx;

namespace {

// 1-D step along x: `lo` for x < x0, `hi` from x0 on, constant in y.
Raster step(int ncols, double cell, double x0, double lo, double hi, int nrows = 4)
{
    Raster r(ncols, nrows, {0, 0}, cell);
    for (int j = 0; j < nrows; ++j) {
        for (int i = 0; i < ncols; ++i) {
            r.at(i, j) = i * cell < x0 ? lo : hi;
        }
    }
    return r;
}

double max_upwind(const Raster& r)
{
    double g = 0.0;
    for (int j = 0; j < r.nrows; ++j) {
        for (int i = 0; i < r.ncols; ++i) {
            g = std::max(g, upwind_gradient(r, i, j));
        }
    }
    return g;
}

} // namespace

TEST_CASE("constant and depth spacing")
{
    CHECK(SpacingField::constant(5.0)({123, -4}) == 5.0);
    CHECK_THROWS_AS(SpacingField::constant(0.0), ValidationError);

    const DepthParams p{1.0, 9.80665, 5.0, 50.0};
    CHECK(depth_spacing(0.0, p) == 5.0);
    CHECK(depth_spacing(-10.0, p) == 5.0);
    const double d30 = 900.0 / 9.80665;
    CHECK(depth_spacing(d30, p) == Approx(30.0));
    CHECK(depth_spacing(1e6, p) == 50.0);

    Raster depth(5, 5, {0, 0}, 1.0, d30);
    const auto f = SpacingField::depth_derived(depth, p);
    CHECK(f({2.5, 2.5}) == Approx(30.0));
    CHECK(f.kind() == SpacingField::Kind::depth_derived);
}

TEST_CASE("raster sampling")
{
    Raster r(3, 3, {1, 2}, 0.5);
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
            r.at(i, j) = 1.0 + i + 10.0 * j;
        }
    }
    const auto f = SpacingField::raster(r);
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
            CHECK(f(r.node(i, j)) == r.at(i, j));
        }
    }
    CHECK(f({1.25, 2.0}) == Approx(1.5));
    CHECK(f({1.25, 2.25}) == Approx(6.5));
    // Continuity across the cell boundary at x = 1.5.
    CHECK(f({1.5 - 1e-12, 2.3}) == Approx(f({1.5 + 1e-12, 2.3})).epsilon(1e-9));
    CHECK_THROWS_AS(f({0.0, 0.0}), OutOfDomain);
    CHECK_THROWS_AS(eval_spacing(f, {3.0, 2.0}), OutOfDomain);
}

TEST_CASE("gradient limiter")
{
    SUBCASE("fixed point")
    {
        Raster r(20, 10, {0, 0}, 0.5);
        for (int j = 0; j < r.nrows; ++j) {
            for (int i = 0; i < r.ncols; ++i) {
                r.at(i, j) = 1.0 + 0.05 * i * r.cell;
            }
        }
        const Raster out = gradient_limit(r, {});
        for (std::size_t k = 0; k < r.values.size(); ++k) {
            CHECK(out.values[k] == Approx(r.values[k]).epsilon(1e-9));
        }
    }
    SUBCASE("1-D step gives the analytic ramp")
    {
        const double cell = 0.05;
        const Raster in = step(301, cell, 1.0, 1.0, 11.0);
        LimiterStats stats;
        const Raster out = gradient_limit(in, {}, &stats);
        CHECK(stats.max_violation <= 1e-8 * 0.1 + 1e-15);
        int last_low = 0;
        while ((last_low + 1) * cell < 1.0) {
            ++last_low;
        }
        for (int j = 0; j < in.nrows; ++j) {
            for (int i = 0; i < in.ncols; ++i) {
                const double lowest = 1.0 + 0.1 * std::max(0, i - last_low) * cell;
                const double want = std::min(in.at(i, j), lowest);
                CHECK(out.at(i, j) == Approx(want).epsilon(1e-3));
                CHECK(out.at(i, j) <= in.at(i, j));
                CHECK(out.at(i, j) >= 1.0);
            }
        }
        CHECK(max_upwind(out) <= 0.1 * (1.0 + 1e-6));
        const Raster again = gradient_limit(out, {});
        for (std::size_t k = 0; k < out.values.size(); ++k) {
            CHECK(std::abs(again.values[k] - out.values[k]) <= 1e-8 * 11.0);
        }
    }
    SUBCASE("2-D spike")
    {
        Raster r(41, 41, {0, 0}, 0.1, 5.0);
        r.at(20, 20) = 0.5;
        const Raster out = gradient_limit(r, {});
        CHECK(max_upwind(out) <= 0.1 * (1.0 + 1e-6));
        CHECK(out.at(20, 20) == 0.5);
        CHECK(out.at(21, 20) == Approx(0.5 + 0.1 * 0.1).epsilon(1e-6));
        CHECK(out.at(0, 0) <= 5.0);
    }
    SUBCASE("non-convergence is reported")
    {
        LimiterConfig cfg;
        cfg.max_iters = 1;
        CHECK_THROWS_AS(gradient_limit(step(101, 0.05, 1.0, 1.0, 11.0), cfg), NoConvergence);
    }
}

TEST_CASE("stereographic projection")
{
    const double R = 6371.0;
    const Point2 c = stereographic_project(0.3, 0.7, 0.3, 0.7, R);
    CHECK(std::abs(c.x) < 1e-9);
    CHECK(std::abs(c.y) < 1e-9);

    const double theta = 0.2;
    const Point2 n = stereographic_project(0.3, 0.7 + theta, 0.3, 0.7, R);
    CHECK(std::abs(n.x) < 1e-9);
    CHECK(n.y == Approx(2.0 * R * std::tan(theta / 2.0)).epsilon(1e-12));

    // A small circle off the centre maps to a circle.
    const double rho = 0.05, clat = 0.45, clon = 1.15;
    std::vector<Point2> pts;
    for (int k = 0; k < 16; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 16.0;
        const double lat = std::asin(std::sin(clat) * std::cos(rho)
                                     + std::cos(clat) * std::sin(rho) * std::cos(a));
        const double lon = clon
            + std::atan2(std::sin(a) * std::sin(rho) * std::cos(clat),
                         std::cos(rho) - std::sin(clat) * std::sin(lat));
        pts.push_back(stereographic_project(lon, lat, 1.1, 0.4, R));
    }
    const Point2 a = pts[0], b = pts[5], e = pts[10];
    const double d = 2.0 * (a.x * (b.y - e.y) + b.x * (e.y - a.y) + e.x * (a.y - b.y));
    const Point2 o{(norm2(a) * (b.y - e.y) + norm2(b) * (e.y - a.y) + norm2(e) * (a.y - b.y)) / d,
                   (norm2(a) * (e.x - b.x) + norm2(b) * (a.x - e.x) + norm2(e) * (b.x - a.x)) / d};
    const double r = distance(o, a);
    for (const Point2 p : pts) {
        CHECK(std::abs(distance(o, p) - r) / r < 1e-6);
    }

    CHECK_THROWS_AS(stereographic_project(0.3 + std::numbers::pi, -0.7, 0.3, 0.7, R), Antipodal);
}
