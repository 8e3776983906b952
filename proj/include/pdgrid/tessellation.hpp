#pragma once

#include <string>
#include <vector>

#include "pdgrid/geom.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid {

// Relative penetration an opposing vertex must exceed before an edge counts
// as violating the weighted (regular) criterion.
inline constexpr double kRegularityTolerance = 1e-10;

// All triangles containing vertex i, counter-clockwise. For a vertex on the
// boundary (or next to a constrained interior edge) the fan starts at the
// triangle whose clockwise edge is on the boundary.
std::vector<int> star(const TriMesh& mesh, int i);
void star_into(const TriMesh& mesh, int i, std::vector<int>& out);

// Neighbouring vertices of i (counter-clockwise, no duplicates).
std::vector<int> one_ring(const TriMesh& mesh, int i);

// True when the fan around i hits a boundary edge.
bool on_boundary(const TriMesh& mesh, int i);

enum class EdgeRegularity {
    regular,            // no penetration beyond tolerance
    flippable_violation,
    locked_violation,   // violates, but the quad is not convex
    boundary,           // hull or constrained edge; never flipped
};

EdgeRegularity classify_edge(const TriMesh& mesh, EdgeRef e,
                             double tolerance = kRegularityTolerance);

// True unless both opposing vertices penetrate the other triangle's
// orthoball by more than its own |r^2| * tolerance and the flipped pair would
// be validly oriented. Boundary and constrained edges are regular.
bool is_locally_regular(const TriMesh& mesh, EdgeRef e, double tolerance = kRegularityTolerance);

// Twice the area over the squared longest side below which a triangle counts
// as collinear.
inline constexpr double kSliverRatio = 1e-10;

// Counter-clockwise and not collinear to within kSliverRatio.
bool is_proper(Point2 a, Point2 b, Point2 c);

// Both triangles of the flipped configuration proper.
bool flip_is_valid(const TriMesh& mesh, EdgeRef e);

struct DualEdge {
    int a = -1, b = -1;          // primal edge endpoints
    int left = -1, right = -1;   // adjacent triangles; right == -1 on the boundary
    Point2 from, to;             // orthocentre(left) -> orthocentre(right) or edge orthocentre
    bool interior = false;
};

struct DualCell {
    int vertex = -1;
    std::vector<Point2> polygon; // counter-clockwise
    double area = 0.0;           // signed
    Point2 centroid;
    bool on_boundary = false;
};

// The power diagram D(X, W) restricted to the triangulated domain. Indexed
// by mesh slots: dual_vertices[t] for triangle slot t, cells[i] for vertex
// slot i (dead slots hold empty cells).
struct PowerDual {
    std::vector<Point2> dual_vertices;
    std::vector<DualEdge> edges;
    std::vector<DualCell> cells;
};

// Throws DegenerateFace when a triangle is collinear.
PowerDual build_dual(const TriMesh& mesh);

// Triangles whose face orthocentre lies outside the closed triangle.
// Degenerate triangles count as poorly staggered.
int count_poorly_staggered(const TriMesh& mesh);
bool is_well_centred(const TriMesh& mesh, int t);

// Quick structural audit used by tests and the CLI: orientation, adjacency
// symmetry, incidence pointers. Returns an empty string when consistent.
std::string check_mesh(const TriMesh& mesh);

} // namespace pdgrid
