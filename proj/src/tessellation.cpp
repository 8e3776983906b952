#include "pdgrid/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>
#include <string>

#include "pdgrid/errors.hpp"

namespace pdgrid {

void star_into(const TriMesh& mesh, int i, std::vector<int>& out)
{
    out.clear();
    const int start = mesh.incident_triangle(i);
    if (start < 0) {
        return;
    }
    // Walk clockwise to the boundary (or all the way round).
    int first = start;
    for (;;) {
        const auto& tri = mesh.triangle(first);
        const int cw = tri.nbr[prev3(tri.local_index(i))];
        if (cw < 0 || cw == start) {
            break;
        }
        first = cw;
    }
    int t = first;
    do {
        out.push_back(t);
        const auto& tri = mesh.triangle(t);
        t = tri.nbr[next3(tri.local_index(i))];
    } while (t >= 0 && t != first);
}

std::vector<int> star(const TriMesh& mesh, int i)
{
    std::vector<int> out;
    star_into(mesh, i, out);
    return out;
}

std::vector<int> one_ring(const TriMesh& mesh, int i)
{
    std::vector<int> fan = star(mesh, i);
    std::vector<int> ring;
    ring.reserve(fan.size() + 1);
    for (int t : fan) {
        const auto& tri = mesh.triangle(t);
        ring.push_back(tri.v[next3(tri.local_index(i))]);
    }
    if (!fan.empty()) {
        const auto& last = mesh.triangle(fan.back());
        const int tail = last.v[prev3(last.local_index(i))];
        if (ring.front() != tail) {
            ring.push_back(tail);
        }
    }
    return ring;
}

bool on_boundary(const TriMesh& mesh, int i)
{
    const int start = mesh.incident_triangle(i);
    if (start < 0) {
        return false;
    }
    int t = start;
    do {
        const auto& tri = mesh.triangle(t);
        t = tri.nbr[next3(tri.local_index(i))];
    } while (t >= 0 && t != start);
    return t < 0;
}

bool is_proper(Point2 a, Point2 b, Point2 c)
{
    const double l2 = std::max({norm2(b - a), norm2(c - b), norm2(a - c)});
    return cross(b - a, c - a) > kSliverRatio * l2;
}

bool flip_is_valid(const TriMesh& mesh, EdgeRef e)
{
    const EdgeRef f = mesh.twin(e);
    if (f.tri < 0) {
        return false;
    }
    const auto& T = mesh.triangle(e.tri);
    const Point2 p = mesh.pos(T.v[e.side]);
    const Point2 q = mesh.pos(T.v[next3(e.side)]);
    const Point2 r = mesh.pos(T.v[prev3(e.side)]);
    const Point2 o = mesh.pos(mesh.triangle(f.tri).v[f.side]);
    return is_proper(p, q, o) && is_proper(o, r, p);
}

EdgeRegularity classify_edge(const TriMesh& mesh, EdgeRef e, double tolerance)
{
    const EdgeRef f = mesh.twin(e);
    if (f.tri < 0 || mesh.is_constrained(e)) {
        return EdgeRegularity::boundary;
    }
    const auto& T = mesh.triangle(e.tri);
    const auto& U = mesh.triangle(f.tri);
    const auto& P = mesh.vertices();
    bool violated = true;
    // A collinear triangle is never part of a valid regular triangulation.
    if (is_proper(P[T.v[0]].pos, P[T.v[1]].pos, P[T.v[2]].pos)
        && is_proper(P[U.v[0]].pos, P[U.v[1]].pos, P[U.v[2]].pos)) {
        // r^2 - pi via the lifted determinant: no cancellation for slivers
        // whose orthocentres lie far away. Each side is judged against its
        // own radius so a sliver cannot mask its neighbour's violation.
        const double det = power_incircle(P[T.v[0]], P[T.v[1]], P[T.v[2]], P[U.v[f.side]]);
        if (det <= 0.0) {
            return EdgeRegularity::regular;
        }
        const auto bi = try_orthoball(P[T.v[0]], P[T.v[1]], P[T.v[2]]);
        const auto bj = try_orthoball(P[U.v[0]], P[U.v[1]], P[U.v[2]]);
        if (bi && bj) {
            const double ct = cross(P[T.v[1]].pos - P[T.v[0]].pos, P[T.v[2]].pos - P[T.v[0]].pos);
            const double cu = cross(P[U.v[1]].pos - P[U.v[0]].pos, P[U.v[2]].pos - P[U.v[0]].pos);
            const auto [a, b] = mesh.edge_vertices(e);
            const double quarter = 0.25 * norm2(P[a].pos - P[b].pos);
            const double eps_i = std::max(std::abs(bi->radius2), quarter) * tolerance;
            const double eps_j = std::max(std::abs(bj->radius2), quarter) * tolerance;
            violated = det / ct > eps_i && det / cu > eps_j;
        }
    }
    if (!violated) {
        return EdgeRegularity::regular;
    }
    return flip_is_valid(mesh, e) ? EdgeRegularity::flippable_violation
                                  : EdgeRegularity::locked_violation;
}

bool is_locally_regular(const TriMesh& mesh, EdgeRef e, double tolerance)
{
    return classify_edge(mesh, e, tolerance) != EdgeRegularity::flippable_violation;
}

bool is_well_centred(const TriMesh& mesh, int t)
{
    const auto g = mesh.generators(t);
    const auto o = try_face_orthocentre(g[0], g[1], g[2]);
    return o && point_in_triangle(*o, g[0].pos, g[1].pos, g[2].pos);
}

int count_poorly_staggered(const TriMesh& mesh)
{
    int bad = 0;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (mesh.triangle_alive(t) && !is_well_centred(mesh, t)) {
            ++bad;
        }
    }
    return bad;
}

namespace {

void finish_cell(DualCell& cell)
{
    const auto& poly = cell.polygon;
    const std::size_t n = poly.size();
    double a2 = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 p = poly[k];
        const Point2 q = poly[(k + 1) % n];
        const double c = cross(p, q);
        a2 += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    cell.area = 0.5 * a2;
    if (std::abs(a2) > 0.0) {
        cell.centroid = {cx / (3.0 * a2), cy / (3.0 * a2)};
    } else if (n > 0) {
        Point2 s;
        for (auto p : poly) {
            s = s + p;
        }
        cell.centroid = (1.0 / static_cast<double>(n)) * s;
    }
}

} // namespace

PowerDual build_dual(const TriMesh& mesh)
{
    PowerDual dual;
    const auto& P = mesh.vertices();
    dual.dual_vertices.assign(mesh.triangle_slots(), Point2{NAN, NAN});
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (!mesh.triangle_alive(t)) {
            continue;
        }
        const auto& v = mesh.triangle(t).v;
        dual.dual_vertices[t] = face_orthocentre(P[v[0]], P[v[1]], P[v[2]]);
    }

    for (const EdgeRef e : mesh.edges()) {
        DualEdge de;
        std::tie(de.a, de.b) = mesh.edge_vertices(e);
        de.left = e.tri;
        de.right = mesh.triangle(e.tri).nbr[e.side];
        de.from = dual.dual_vertices[de.left];
        if (de.right >= 0) {
            de.to = dual.dual_vertices[de.right];
            de.interior = true;
        } else {
            de.to = edge_orthocentre(P[de.a], P[de.b]).point;
        }
        dual.edges.push_back(de);
    }

    dual.cells.resize(mesh.vertex_slots());
    std::vector<int> fan;
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (!mesh.vertex_alive(i)) {
            continue;
        }
        DualCell& cell = dual.cells[i];
        cell.vertex = i;
        star_into(mesh, i, fan);
        const auto& first = mesh.triangle(fan.front());
        cell.on_boundary = first.nbr[prev3(first.local_index(i))] < 0;
        if (cell.on_boundary) {
            cell.polygon.push_back(P[i].pos);
        }
        for (std::size_t n = 0; n < fan.size(); ++n) {
            const auto& tri = mesh.triangle(fan[n]);
            const int k = tri.local_index(i);
            const int a = tri.v[next3(k)];
            const int b = tri.v[prev3(k)];
            // Incoming edge (i, a): closed with its orthocentre when it is a
            // boundary edge or an interior constraint.
            if ((n == 0 && cell.on_boundary) || mesh.is_constrained(i, a)) {
                cell.polygon.push_back(edge_orthocentre(P[i], P[a]).point);
            }
            cell.polygon.push_back(dual.dual_vertices[fan[n]]);
            const bool last = n + 1 == fan.size();
            if ((last && cell.on_boundary) || (!last && mesh.is_constrained(i, b))) {
                cell.polygon.push_back(edge_orthocentre(P[i], P[b]).point);
            }
        }
        finish_cell(cell);
    }
    return dual;
}

std::string check_mesh(const TriMesh& mesh)
{
    std::ostringstream err;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        const auto& tri = mesh.triangle(t);
        if (!tri.alive()) {
            continue;
        }
        const auto c = mesh.corners(t);
        if (!(signed_area(c[0], c[1], c[2]) > 0.0)) {
            err << "triangle " << t << " not positively oriented\n";
        }
        for (int k = 0; k < 3; ++k) {
            if (!mesh.vertex_alive(tri.v[k])) {
                err << "triangle " << t << " references dead vertex " << tri.v[k] << "\n";
            }
            const int n = tri.nbr[k];
            if (n < 0) {
                if (!mesh.is_constrained(tri.v[next3(k)], tri.v[prev3(k)])) {
                    err << "boundary edge of triangle " << t << " not constrained\n";
                }
                continue;
            }
            if (!mesh.triangle_alive(n)) {
                err << "triangle " << t << " links dead neighbour " << n << "\n";
                continue;
            }
            const EdgeRef f = mesh.twin({t, k});
            if (f.tri != n || mesh.triangle(n).nbr[f.side] != t) {
                err << "asymmetric adjacency " << t << " <-> " << n << "\n";
            }
        }
    }
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        const int t = mesh.incident_triangle(i);
        if (t >= 0 && (!mesh.triangle_alive(t) || mesh.triangle(t).local_index(i) < 0)) {
            err << "vertex " << i << " has a stale incident triangle\n";
        }
    }
    return err.str();
}

} // namespace pdgrid
