#pragma once

#include <cstdint>

#include "pdgrid/init_mesh.hpp"
#include "pdgrid/spacing.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid {

// Concentric squares: the square [-1, 1]^2 around a square hole of
// half-diagonal 0.5 turned by 45 degrees.
Pslg box_domain();

// Delaunay refinement of box_domain() with circumcentre Steiner points, a
// 30 degree angle bound and h = 0.16: about 340 triangles, a few dozen of
// them obtuse. All weights zero.
TriMesh box_mesh(std::uint64_t seed = 0);

// Non-convex L-shaped polygon, 10 x 7 with a 3 x 4 notch cut from the
// upper right.
Pslg l_domain();

// h_min inside the unit disk around (2.5, 2.5) and 5 h_min elsewhere,
// gradient-limited with slope g on a raster covering l_domain().
SpacingField graded_spacing(double h_min, double g = 0.1, double cell = 0.05);

} // namespace pdgrid
