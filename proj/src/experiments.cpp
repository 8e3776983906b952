#include "pdgrid/experiments.hpp"

#include <cmath>
#include <vector>

namespace pdgrid {

Pslg box_domain()
{
    Pslg p;
    const std::vector<Point2> outer{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}};
    const std::vector<Point2> inner{{0.0, -0.5}, {0.5, 0.0}, {0.0, 0.5}, {-0.5, 0.0}};
    p.add_loop(outer);
    p.add_loop(inner);
    return p;
}

TriMesh box_mesh(std::uint64_t seed)
{
    InitOptions opt;
    opt.min_angle = 30.0;
    opt.off_centre = false;
    return init_mesh(box_domain(), SpacingField::constant(0.16), seed, opt);
}

Pslg l_domain()
{
    Pslg p;
    const std::vector<Point2> loop{{0.0, 0.0}, {10.0, 0.0}, {10.0, 3.0},
                                   {7.0, 3.0}, {7.0, 7.0},  {0.0, 7.0}};
    p.add_loop(loop);
    return p;
}

SpacingField graded_spacing(double h_min, double g, double cell)
{
    const int ncols = static_cast<int>(std::ceil(10.0 / cell)) + 3;
    const int nrows = static_cast<int>(std::ceil(7.0 / cell)) + 3;
    Raster r(ncols, nrows, {-cell, -cell}, cell, 5.0 * h_min);
    for (int row = 0; row < nrows; ++row) {
        for (int c = 0; c < ncols; ++c) {
            if (distance(r.node(c, row), {2.5, 2.5}) <= 1.0) {
                r.at(c, row) = h_min;
            }
        }
    }
    LimiterConfig lim;
    lim.g = g;
    return SpacingField::raster(gradient_limit(r, lim));
}

} // namespace pdgrid
