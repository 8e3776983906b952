#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pdgrid/geom.hpp"
#include "pdgrid/spacing.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid {

// Planar straight-line graph: closed, non-crossing loops (outer boundary and
// holes). Points not used by any segment are kept as interior vertices.
struct Pslg {
    std::vector<Point2> points;
    std::vector<std::pair<int, int>> segments;

    // Throws GeometryError on bad indices, open loops or crossing segments.
    void validate() const;
    void add_loop(std::span<const Point2> loop);
};

struct InitOptions {
    double min_angle = 28.0;   // degrees
    double size_factor = 1.3;  // split when circumradius > size_factor * h / sqrt(3)
    bool off_centre = true;    // size-aware Steiner points instead of circumcentres
    int max_vertices = 4'000'000;
};

// Conforming Delaunay triangulation of the PSLG (plus extra interior points)
// without quality refinement. Segments are recovered by midpoint splitting.
// Boundary vertices are marked fixed; all weights are zero.
TriMesh triangulate(const Pslg& pslg, std::span<const Point2> interior = {},
                    std::uint64_t seed = 0);

// Boundary discretised to the spacing, then Delaunay-refined until no
// triangle is skinny or oversized. Deterministic for a given seed.
TriMesh init_mesh(const Pslg& pslg, const SpacingField& h, std::uint64_t seed = 0,
                  const InitOptions& opt = {});

enum class LocateKind { inside, on_edge, on_vertex, outside };

struct Location {
    LocateKind kind = LocateKind::outside;
    EdgeRef edge;    // on_edge: the edge; outside: the boundary edge crossed; inside: {tri, 0}
    int vertex = -1; // on_vertex
};

Location locate(const TriMesh& mesh, Point2 p, int hint = -1);

// Inserts p (splitting a triangle or an edge) and, when `flip` is set,
// restores regularity with a Lawson cascade around the new vertex. Returns
// the new vertex, or -1 when p is outside, duplicates a vertex, or lands on
// a constrained edge inside a transaction.
int insert_point(TriMesh& mesh, Point2 p, int hint = -1, bool flip = true);

} // namespace pdgrid
