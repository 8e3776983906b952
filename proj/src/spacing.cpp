#include "pdgrid/spacing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdgrid/errors.hpp"

namespace pdgrid {

Raster::Raster(int ncols_, int nrows_, Point2 origin_, double cell_, double fill)
    : ncols(ncols_), nrows(nrows_), origin(origin_), cell(cell_),
      values(static_cast<std::size_t>(ncols_) * static_cast<std::size_t>(nrows_), fill)
{
    if (ncols < 2 || nrows < 2 || !(cell > 0.0)) {
        throw ValidationError("raster needs at least 2x2 nodes and a positive cell size");
    }
}

bool Raster::covers(Point2 p) const
{
    const double u = (p.x - origin.x) / cell;
    const double v = (p.y - origin.y) / cell;
    constexpr double slack = 1e-9;
    return u >= -slack && v >= -slack && u <= (ncols - 1) + slack && v <= (nrows - 1) + slack;
}

double Raster::sample(Point2 p) const
{
    if (!covers(p)) {
        throw OutOfDomain("raster query outside coverage");
    }
    const double u = std::clamp((p.x - origin.x) / cell, 0.0, static_cast<double>(ncols - 1));
    const double v = std::clamp((p.y - origin.y) / cell, 0.0, static_cast<double>(nrows - 1));
    const int c = std::min(static_cast<int>(u), ncols - 2);
    const int r = std::min(static_cast<int>(v), nrows - 2);
    const double fu = u - c;
    const double fv = v - r;
    const double lo = (1.0 - fu) * at(c, r) + fu * at(c + 1, r);
    const double hi = (1.0 - fu) * at(c, r + 1) + fu * at(c + 1, r + 1);
    return (1.0 - fv) * lo + fv * hi;
}

double depth_spacing(double depth, const DepthParams& p)
{
    const double wave = p.beta * std::sqrt(p.g_accel * std::max(depth, 0.0));
    return std::max(p.h_min, std::min(p.h_max, wave));
}

SpacingField SpacingField::constant(double h)
{
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw ValidationError("constant spacing must be positive and finite");
    }
    SpacingField f;
    f.kind_ = Kind::constant;
    f.data_ = h;
    return f;
}

SpacingField SpacingField::raster(Raster r)
{
    for (double v : r.values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError("spacing raster must be positive and finite");
        }
    }
    SpacingField f;
    f.kind_ = Kind::raster;
    f.data_ = std::move(r);
    return f;
}

SpacingField SpacingField::depth_derived(const Raster& depth, const DepthParams& params,
                                         const LimiterConfig& limiter)
{
    if (!(params.beta > 0.0)) {
        throw ValidationError("depth-derived spacing requires beta > 0");
    }
    if (!(params.h_min > 0.0) || !(params.h_max >= params.h_min)) {
        throw ValidationError("depth-derived spacing requires 0 < h_min <= h_max");
    }
    Raster h = depth;
    for (double& v : h.values) {
        v = depth_spacing(v, params);
    }
    SpacingField f;
    f.kind_ = Kind::depth_derived;
    f.data_ = gradient_limit(h, limiter);
    return f;
}

double SpacingField::operator()(Point2 p) const
{
    if (const double* h = std::get_if<double>(&data_)) {
        return *h;
    }
    return std::get<Raster>(data_).sample(p);
}

double eval_spacing(const SpacingField& field, Point2 p)
{
    return field(p);
}

double upwind_gradient(const Raster& r, int c, int rr)
{
    const double h = r.at(c, rr);
    const double inv = 1.0 / r.cell;
    double gx2 = 0.0;
    double gy2 = 0.0;
    if (c > 0) {
        const double d = std::max((h - r.at(c - 1, rr)) * inv, 0.0);
        gx2 = d * d;
    }
    if (c + 1 < r.ncols) {
        const double d = std::min((r.at(c + 1, rr) - h) * inv, 0.0);
        gx2 += d * d;
    }
    if (rr > 0) {
        const double d = std::max((h - r.at(c, rr - 1)) * inv, 0.0);
        gy2 = d * d;
    }
    if (rr + 1 < r.nrows) {
        const double d = std::min((r.at(c, rr + 1) - h) * inv, 0.0);
        gy2 += d * d;
    }
    return std::sqrt(gx2 + gy2);
}

Raster gradient_limit(const Raster& in, const LimiterConfig& cfg, LimiterStats* stats)
{
    if (!(cfg.g > 0.0)) {
        throw ValidationError("gradient limit g must be positive");
    }
    const double dt = cfg.dt > 0.0 ? cfg.dt : 0.4 * in.cell;
    if (dt > 0.5 * in.cell) {
        throw ValidationError("limiter time step violates dt <= 0.5 * cell");
    }
    Raster cur = in;
    Raster next = in;
    const double target = cfg.tol * cfg.g;
    double worst = 0.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        worst = 0.0;
        for (int r = 0; r < cur.nrows; ++r) {
            for (int c = 0; c < cur.ncols; ++c) {
                const double excess = upwind_gradient(cur, c, r) - cfg.g;
                if (excess > 0.0) {
                    worst = std::max(worst, excess);
                    next.at(c, r) = cur.at(c, r) - dt * excess;
                } else {
                    next.at(c, r) = cur.at(c, r);
                }
            }
        }
        if (worst <= target) {
            if (stats) {
                *stats = {it, worst};
            }
            return cur;
        }
        std::swap(cur, next);
    }
    throw NoConvergence("gradient_limit: no convergence after " + std::to_string(cfg.max_iters)
                        + " iterations (violation " + std::to_string(worst) + ")");
}

Point2 stereographic_project(double lon, double lat, double center_lon, double center_lat,
                             double radius)
{
    const double dl = lon - center_lon;
    const double s0 = std::sin(center_lat);
    const double c0 = std::cos(center_lat);
    const double s = std::sin(lat);
    const double c = std::cos(lat);
    const double denom = 1.0 + s0 * s + c0 * c * std::cos(dl);
    if (denom < 1e-12) {
        throw Antipodal("stereographic_project: point is antipodal to the centre");
    }
    const double k = 2.0 * radius / denom;
    return {k * c * std::sin(dl), k * (c0 * s - s0 * c * std::cos(dl))};
}

} // namespace pdgrid
