#pragma once

#include <variant>
#include <vector>

#include "pdgrid/geom.hpp"

namespace pdgrid {

// Regular grid of node values. Node (c, r) sits at origin + (c, r) * cell;
// row 0 is the southern row.
struct Raster {
    int ncols = 0;
    int nrows = 0;
    Point2 origin;
    double cell = 1.0;
    std::vector<double> values; // row-major, values[r * ncols + c]

    Raster() = default;
    Raster(int ncols, int nrows, Point2 origin, double cell, double fill = 0.0);

    double& at(int c, int r) { return values[static_cast<std::size_t>(r) * ncols + c]; }
    double at(int c, int r) const { return values[static_cast<std::size_t>(r) * ncols + c]; }
    Point2 node(int c, int r) const { return {origin.x + c * cell, origin.y + r * cell}; }
    bool covers(Point2 p) const;
    // Bilinear interpolation; throws OutOfDomain outside the node hull.
    double sample(Point2 p) const;
};

struct LimiterConfig {
    double g = 0.1;
    double dt = 0.0;    // 0 selects 0.4 * cell
    double tol = 1e-8;  // relative to g
    int max_iters = 200000;
};

struct DepthParams {
    double beta = 0.0;      // time-like resolution scale, no default
    double g_accel = 9.80665;
    double h_min = 0.0;
    double h_max = 0.0;
};

// h = clamp(beta * sqrt(g_accel * D), h_min, h_max); negative depths count as 0.
double depth_spacing(double depth, const DepthParams& p);

class SpacingField {
public:
    enum class Kind { constant, raster, depth_derived };

    SpacingField() = default;
    static SpacingField constant(double h);
    static SpacingField raster(Raster r);
    // Converts depth to spacing on the raster nodes, gradient-limits, then
    // interpolates bilinearly.
    static SpacingField depth_derived(const Raster& depth, const DepthParams& params,
                                      const LimiterConfig& limiter = {});

    Kind kind() const { return kind_; }
    double operator()(Point2 p) const;
    // Raster behind a raster or depth-derived field; nullptr for constants.
    const Raster* grid() const { return std::get_if<Raster>(&data_); }

private:
    Kind kind_ = Kind::constant;
    std::variant<double, Raster> data_ = 1.0;
};

double eval_spacing(const SpacingField& field, Point2 p);

struct LimiterStats {
    int iterations = 0;
    double max_violation = 0.0; // max(|grad+ h| - g, 0) at exit
};

// Relaxes h_t = -max(0, |grad+ h| - g) with a first-order upwind Godunov
// gradient until the violation falls below tol * g. Throws NoConvergence.
Raster gradient_limit(const Raster& in, const LimiterConfig& cfg, LimiterStats* stats = nullptr);

// Upwind (Godunov) gradient magnitude at a node, the quantity the limiter bounds.
double upwind_gradient(const Raster& r, int c, int rr);

// Locally centred stereographic projection onto the tangent plane at
// (center_lon, center_lat). Angles in radians. Throws Antipodal.
Point2 stereographic_project(double lon, double lat, double center_lon, double center_lat,
                             double radius);

} // namespace pdgrid
