#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pdgrid/geom.hpp"
#include "pdgrid/init_mesh.hpp"
#include "pdgrid/tessellation.hpp"
#include "pdgrid/topo_ops.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid::testing {

// Equilateral lattice of nx by ny points with spacing h. Odd rows are
// shifted by h / 2. Hull vertices are fixed. Interior vertices are moved by
// up to jitter * h (jitter < 0.4 keeps every triangle positive).
inline TriMesh lattice(int nx, int ny, double h = 1.0, double jitter = 0.0, std::uint64_t seed = 0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double dy = h * std::sqrt(3.0) / 2.0;
    std::vector<WeightedVertex> v;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            WeightedVertex w;
            w.pos = {i * h + (j % 2 == 1 ? 0.5 * h : 0.0), j * dy};
            const bool hull = j == 0 || j == ny - 1 || i == 0 || i == nx - 1;
            w.fixed = hull;
            if (!hull && jitter > 0.0) {
                double ax = 0.0, ay = 0.0;
                do {
                    ax = u(rng);
                    ay = u(rng);
                } while (ax * ax + ay * ay > 1.0);
                w.pos = w.pos + Point2{ax, ay} * (jitter * h);
            }
            v.push_back(w);
        }
    }
    auto id = [nx](int i, int j) { return j * nx + i; };
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            if (j % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            }
        }
    }
    return TriMesh::from_triangles(std::move(v), tris);
}

// Regular hexagon of radius h around the origin, centre vertex 0 free.
inline TriMesh hex_fan(double h = 1.0)
{
    std::vector<WeightedVertex> v{{{0.0, 0.0}, 0.0, false}};
    for (int k = 0; k < 6; ++k) {
        const double a = k * M_PI / 3.0;
        v.push_back({{h * std::cos(a), h * std::sin(a)}, 0.0, true});
    }
    std::vector<std::array<int, 3>> tris;
    for (int k = 0; k < 6; ++k) {
        tris.push_back({0, 1 + k, 1 + (k + 1) % 6});
    }
    return TriMesh::from_triangles(std::move(v), tris);
}

inline Pslg unit_square()
{
    Pslg p;
    const std::array<Point2, 4> loop{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    p.add_loop(loop);
    return p;
}

// Triangulation of n random points in the unit square scrambled by random
// valid flips, so that it is generally far from Delaunay.
inline TriMesh scrambled_points(int n, std::uint64_t seed, int flips_per_edge = 3)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::vector<Point2> pts;
    for (int k = 0; k < n; ++k) {
        pts.push_back({u(rng), u(rng)});
    }
    TriMesh mesh = triangulate(unit_square(), pts, seed);
    const int rounds = flips_per_edge * mesh.edge_count();
    for (int k = 0; k < rounds; ++k) {
        const auto edges = mesh.edges();
        const EdgeRef e = edges[rng() % edges.size()];
        if (mesh.twin(e).tri < 0 || mesh.is_constrained(e) || !flip_is_valid(mesh, e)) {
            continue;
        }
        mesh.flip(e);
    }
    return mesh;
}

// Plain in-circle determinant, positive when d lies inside the circumcircle
// of the counter-clockwise triangle a, b, c.
inline double incircle(Point2 a, Point2 b, Point2 c, Point2 d)
{
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

// Exhaustive empty-circumcircle check. Returns the number of
// (triangle, vertex) pairs where the vertex lies strictly inside beyond a
// relative tolerance.
inline int delaunay_violations(const TriMesh& mesh, double rel_tol = 1e-9)
{
    int bad = 0;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (!mesh.triangle_alive(t)) {
            continue;
        }
        const auto [a, b, c] = mesh.corners(t);
        const double l2 = std::max({norm2(b - a), norm2(c - b), norm2(a - c)});
        const auto& tri = mesh.triangle(t);
        for (int i = 0; i < mesh.vertex_slots(); ++i) {
            if (!mesh.vertex_alive(i) || tri.local_index(i) >= 0) {
                continue;
            }
            const Point2 d = mesh.pos(i);
            const double s = std::max(l2, norm2(d - a));
            if (incircle(a, b, c, d) > rel_tol * s * s) {
                ++bad;
            }
        }
    }
    return bad;
}

inline double mesh_area(const TriMesh& mesh)
{
    double a = 0.0;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (mesh.triangle_alive(t)) {
            const auto [p, q, r] = mesh.corners(t);
            a += signed_area(p, q, r);
        }
    }
    return a;
}

} // namespace pdgrid::testing
