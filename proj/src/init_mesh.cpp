#include "pdgrid/init_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>

#include "pdgrid/errors.hpp"
#include "pdgrid/tessellation.hpp"

namespace pdgrid {

namespace {

double orient(Point2 a, Point2 b, Point2 p)
{
    return cross(b - a, p - a);
}

bool on_segment(Point2 a, Point2 b, Point2 p)
{
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y
        && p.y <= std::max(a.y, b.y);
}

bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d)
{
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
        return true;
    }
    return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

void split_triangle(TriMesh& mesh, int t, int p)
{
    const Triangle T = mesh.triangle(t);
    const int a = T.v[0], b = T.v[1], c = T.v[2];
    const int na = T.nbr[0], nb = T.nbr[1], nc = T.nbr[2];
    const int t1 = mesh.triangle_slots();
    const int t2 = t1 + 1;
    Triangle x0, x1, x2;
    x0.v = {a, b, p};
    x0.nbr = {t1, t2, nc};
    x1.v = {b, c, p};
    x1.nbr = {t2, t, na};
    x2.v = {c, a, p};
    x2.nbr = {t, t1, nb};
    mesh.set_triangle(t, x0);
    mesh.add_triangle(x1);
    mesh.add_triangle(x2);
    mesh.relink(na, t, t1);
    mesh.relink(nb, t, t2);
    mesh.set_incident(a, t);
    mesh.set_incident(b, t1);
    mesh.set_incident(c, t2);
    mesh.set_incident(p, t);
}

// Splits edge e = (y, z) of T = (x, y, z) at new vertex p.
void split_edge(TriMesh& mesh, EdgeRef e, int p)
{
    const int t = e.tri;
    const int k = e.side;
    const Triangle T = mesh.triangle(t);
    const int x = T.v[k], y = T.v[next3(k)], z = T.v[prev3(k)];
    const int n_zx = T.nbr[next3(k)];
    const int n_xy = T.nbr[prev3(k)];
    const EdgeRef f = mesh.twin(e);
    const int u = f.tri;
    const bool constrained = mesh.is_constrained(y, z);

    const int t2 = mesh.triangle_slots();
    const int u2 = u >= 0 ? t2 + 1 : kBoundary;
    Triangle a, b;
    a.v = {x, y, p};
    a.nbr = {u2, t2, n_xy};
    b.v = {x, p, z};
    b.nbr = {u, n_zx, t};
    mesh.set_triangle(t, a);
    mesh.add_triangle(b);
    mesh.relink(n_zx, t, t2);
    mesh.set_incident(x, t);
    mesh.set_incident(y, t);
    mesh.set_incident(z, t2);
    mesh.set_incident(p, t);
    if (u >= 0) {
        const Triangle U = mesh.triangle(u);
        const int j = f.side;
        const int w = U.v[j];
        const int n_yw = U.nbr[next3(j)];
        const int n_wz = U.nbr[prev3(j)];
        Triangle c, d;
        c.v = {w, z, p};
        c.nbr = {t2, u2, n_wz};
        d.v = {w, p, y};
        d.nbr = {t, n_yw, u};
        mesh.set_triangle(u, c);
        mesh.add_triangle(d);
        mesh.relink(n_yw, u, u2);
        mesh.set_incident(w, u);
    }
    if (constrained) {
        mesh.remove_constraint(y, z);
        mesh.add_constraint(y, p);
        mesh.add_constraint(p, z);
    }
}

void lawson(TriMesh& mesh, int p)
{
    std::vector<EdgeRef> stack;
    for (int t : star(mesh, p)) {
        stack.push_back({t, mesh.triangle(t).local_index(p)});
    }
    while (!stack.empty()) {
        const EdgeRef top = stack.back();
        stack.pop_back();
        if (!mesh.triangle_alive(top.tri)) {
            continue;
        }
        const int k = mesh.triangle(top.tri).local_index(p);
        if (k < 0) {
            continue;
        }
        const EdgeRef e{top.tri, k};
        if (classify_edge(mesh, e) != EdgeRegularity::flippable_violation) {
            continue;
        }
        const EdgeRef diag = mesh.flip(e);
        const int u = mesh.triangle(diag.tri).nbr[diag.side];
        stack.push_back({diag.tri, 0});
        stack.push_back({u, 2});
    }
}

// Relative distance below which a point is taken to lie on an edge or vertex.
constexpr double kSnap = 1e-9;

Location classify_point(const TriMesh& mesh, int t, Point2 p)
{
    const auto& tri = mesh.triangle(t);
    int near_count = 0;
    int near_side = -1;
    double scale = 0.0;
    for (int k = 0; k < 3; ++k) {
        scale = std::max(scale, norm2(mesh.pos(tri.v[next3(k)]) - mesh.pos(tri.v[k])));
    }
    for (int k = 0; k < 3; ++k) {
        if (norm2(p - mesh.pos(tri.v[k])) <= kSnap * kSnap * scale) {
            return {LocateKind::on_vertex, {t, k}, tri.v[k]};
        }
    }
    for (int k = 0; k < 3; ++k) {
        const Point2 a = mesh.pos(tri.v[next3(k)]);
        const Point2 b = mesh.pos(tri.v[prev3(k)]);
        const double o = orient(a, b, p);
        if (std::abs(o) <= kSnap * norm2(b - a)) {
            ++near_count;
            near_side = k;
        }
    }
    if (near_count == 1) {
        return {LocateKind::on_edge, {t, near_side}, -1};
    }
    if (near_count >= 2) {
        // Closest corner.
        int best = 0;
        for (int k = 1; k < 3; ++k) {
            if (norm2(p - mesh.pos(tri.v[k])) < norm2(p - mesh.pos(tri.v[best]))) {
                best = k;
            }
        }
        return {LocateKind::on_vertex, {t, best}, tri.v[best]};
    }
    return {LocateKind::inside, {t, 0}, -1};
}

} // namespace

Location locate(const TriMesh& mesh, Point2 p, int hint)
{
    int t = hint;
    if (t < 0 || t >= mesh.triangle_slots() || !mesh.triangle_alive(t)) {
        t = -1;
        for (int s = 0; s < mesh.triangle_slots(); ++s) {
            if (mesh.triangle_alive(s)) {
                t = s;
                break;
            }
        }
    }
    if (t < 0) {
        return {};
    }
    const int limit = mesh.triangle_slots() + 64;
    int offset = 0;
    for (int step = 0; step < limit; ++step) {
        const auto& tri = mesh.triangle(t);
        bool moved = false;
        for (int r = 0; r < 3; ++r) {
            const int k = (r + offset) % 3;
            const Point2 a = mesh.pos(tri.v[next3(k)]);
            const Point2 b = mesh.pos(tri.v[prev3(k)]);
            if (orient(a, b, p) < 0.0) {
                if (tri.nbr[k] < 0) {
                    return {LocateKind::outside, {t, k}, -1};
                }
                t = tri.nbr[k];
                moved = true;
                break;
            }
        }
        offset = (offset + 1) % 3;
        if (!moved) {
            return classify_point(mesh, t, p);
        }
    }
    for (int s = 0; s < mesh.triangle_slots(); ++s) {
        if (!mesh.triangle_alive(s)) {
            continue;
        }
        const auto c = mesh.corners(s);
        if (orient(c[0], c[1], p) >= 0.0 && orient(c[1], c[2], p) >= 0.0
            && orient(c[2], c[0], p) >= 0.0) {
            return classify_point(mesh, s, p);
        }
    }
    return {};
}

int insert_point(TriMesh& mesh, Point2 p, int hint, bool flip)
{
    const Location loc = locate(mesh, p, hint);
    int v = -1;
    if (loc.kind == LocateKind::inside) {
        v = mesh.add_vertex({p, 0.0, false});
        split_triangle(mesh, loc.edge.tri, v);
    } else if (loc.kind == LocateKind::on_edge) {
        if (mesh.in_transaction() && mesh.is_constrained(loc.edge)) {
            return -1;
        }
        const auto [a, b] = mesh.edge_vertices(loc.edge);
        const Point2 pa = mesh.pos(a);
        const Point2 d = mesh.pos(b) - pa;
        const double s = std::clamp(dot(p - pa, d) / norm2(d), 0.0, 1.0);
        v = mesh.add_vertex({pa + s * d, 0.0, false});
        split_edge(mesh, loc.edge, v);
    } else {
        return -1;
    }
    if (flip) {
        lawson(mesh, v);
    }
    return v;
}

void Pslg::add_loop(std::span<const Point2> loop)
{
    const int base = static_cast<int>(points.size());
    const int n = static_cast<int>(loop.size());
    points.insert(points.end(), loop.begin(), loop.end());
    for (int k = 0; k < n; ++k) {
        segments.emplace_back(base + k, base + (k + 1) % n);
    }
}

void Pslg::validate() const
{
    const int n = static_cast<int>(points.size());
    for (const auto& p : points) {
        if (!is_finite(p)) {
            throw GeometryError("pslg: non-finite point");
        }
    }
    std::vector<int> degree(n, 0);
    for (const auto& [a, b] : segments) {
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw GeometryError("pslg: segment index out of range");
        }
        if (a == b || points[a] == points[b]) {
            throw GeometryError("pslg: zero-length segment");
        }
        ++degree[a];
        ++degree[b];
    }
    if (segments.size() < 3) {
        throw GeometryError("pslg: needs at least one closed loop");
    }
    for (int i = 0; i < n; ++i) {
        if (degree[i] != 0 && degree[i] != 2) {
            throw GeometryError("pslg: point " + std::to_string(i)
                                + " does not lie on exactly one closed loop");
        }
    }
    std::vector<std::size_t> order(segments.size());
    for (std::size_t s = 0; s < order.size(); ++s) {
        order[s] = s;
    }
    auto lo = [&](std::size_t s) {
        return std::min(points[segments[s].first].x, points[segments[s].second].x);
    };
    auto hi = [&](std::size_t s) {
        return std::max(points[segments[s].first].x, points[segments[s].second].x);
    };
    std::sort(order.begin(), order.end(), [&](auto l, auto r) { return lo(l) < lo(r); });
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto [a, b] = segments[order[i]];
        for (std::size_t j = i + 1; j < order.size() && lo(order[j]) <= hi(order[i]); ++j) {
            const auto [c, d] = segments[order[j]];
            const int shared = (a == c) + (a == d) + (b == c) + (b == d);
            if (shared == 2) {
                throw GeometryError("pslg: duplicate segment");
            }
            if (shared == 1) {
                // Adjacent segments may only meet at the shared point.
                const int s = (a == c || a == d) ? a : b;
                const int p = s == a ? b : a;
                const int q = (c == s) ? d : c;
                const Point2 u = points[p] - points[s];
                const Point2 v = points[q] - points[s];
                if (cross(u, v) == 0.0 && dot(u, v) > 0.0) {
                    throw GeometryError("pslg: overlapping segments");
                }
                continue;
            }
            if (segments_touch(points[a], points[b], points[c], points[d])) {
                throw GeometryError("pslg: segments intersect");
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (degree[i] != 0) {
            continue;
        }
        for (const auto& [a, b] : segments) {
            if (orient(points[a], points[b], points[i]) == 0.0
                && on_segment(points[a], points[b], points[i])) {
                throw GeometryError("pslg: interior point lies on a segment");
            }
        }
    }
}

namespace {

TriMesh rebuild_inside(const TriMesh& mesh)
{
    std::vector<int> parity(mesh.triangle_slots(), -1);
    std::deque<int> queue;
    const int seed = mesh.incident_triangle(0); // bounding-box corner
    parity[seed] = 0;
    queue.push_back(seed);
    while (!queue.empty()) {
        const int t = queue.front();
        queue.pop_front();
        const auto& tri = mesh.triangle(t);
        for (int k = 0; k < 3; ++k) {
            const int n = tri.nbr[k];
            if (n < 0 || parity[n] >= 0) {
                continue;
            }
            parity[n] = parity[t] ^ (mesh.is_constrained(EdgeRef{t, k}) ? 1 : 0);
            queue.push_back(n);
        }
    }
    std::vector<int> vmap(mesh.vertex_slots(), -1);
    std::vector<WeightedVertex> verts;
    std::vector<std::array<int, 3>> tris;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (parity[t] != 1) {
            continue;
        }
        std::array<int, 3> tv{};
        for (int k = 0; k < 3; ++k) {
            const int v = mesh.triangle(t).v[k];
            if (vmap[v] < 0) {
                vmap[v] = static_cast<int>(verts.size());
                verts.push_back(mesh.vertex(v));
            }
            tv[k] = vmap[v];
        }
        tris.push_back(tv);
    }
    if (tris.empty()) {
        throw GeometryError("pslg encloses no area");
    }
    std::vector<std::pair<int, int>> interior;
    for (const auto& [a, b] : mesh.constrained_edges()) {
        if (vmap[a] < 0 || vmap[b] < 0) {
            continue;
        }
        const auto e = mesh.find_edge(a, b);
        const int n = e ? mesh.triangle(e->tri).nbr[e->side] : -1;
        if (e && n >= 0 && parity[e->tri] == 1 && parity[n] == 1) {
            interior.emplace_back(vmap[a], vmap[b]);
        }
    }
    TriMesh out = TriMesh::from_triangles(std::move(verts), tris, interior);
    for (const auto& [a, b] : out.constrained_edges()) {
        for (int v : {a, b}) {
            auto w = out.vertex(v);
            w.fixed = true;
            out.set_vertex(v, w);
        }
    }
    return out;
}

} // namespace

TriMesh triangulate(const Pslg& pslg, std::span<const Point2> interior, std::uint64_t seed)
{
    pslg.validate();
    std::vector<Point2> pts = pslg.points;
    pts.insert(pts.end(), interior.begin(), interior.end());

    Point2 lo = pts[0], hi = pts[0];
    for (auto p : pts) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const Point2 mid = midpoint(lo, hi);
    const double r = 4.0 * std::max({hi.x - lo.x, hi.y - lo.y, 1e-12});
    std::vector<WeightedVertex> box{{{mid.x - r, mid.y - r}},
                                    {{mid.x + r, mid.y - r}},
                                    {{mid.x + r, mid.y + r}},
                                    {{mid.x - r, mid.y + r}}};
    const std::array<std::array<int, 3>, 2> box_tris{{{0, 1, 2}, {0, 2, 3}}};
    TriMesh mesh = TriMesh::from_triangles(std::move(box), box_tris);

    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> id(pts.size(), -1);
    int hint = 0;
    for (std::size_t i : order) {
        const int v = insert_point(mesh, pts[i], hint, true);
        if (v < 0) {
            throw GeometryError("duplicate or unlocatable point " + std::to_string(i));
        }
        id[i] = v;
        hint = mesh.incident_triangle(v);
    }

    struct Pending {
        int a, b, depth;
    };
    std::vector<Pending> stack;
    for (auto it = pslg.segments.rbegin(); it != pslg.segments.rend(); ++it) {
        stack.push_back({id[it->first], id[it->second], 0});
    }
    while (!stack.empty()) {
        const Pending s = stack.back();
        stack.pop_back();
        if (mesh.find_edge(s.a, s.b)) {
            mesh.add_constraint(s.a, s.b);
            continue;
        }
        if (s.depth > 48) {
            throw GeometryError("could not recover a boundary segment");
        }
        const int v = insert_point(mesh, midpoint(mesh.pos(s.a), mesh.pos(s.b)),
                                   mesh.incident_triangle(s.a), true);
        if (v < 0) {
            throw GeometryError("could not recover a boundary segment");
        }
        stack.push_back({v, s.b, s.depth + 1});
        stack.push_back({s.a, v, s.depth + 1});
    }
    return rebuild_inside(mesh);
}

namespace {

Pslg discretise(const Pslg& in, const SpacingField& h)
{
    Pslg out;
    out.points = in.points;
    constexpr int samples = 64;
    for (const auto& [a, b] : in.segments) {
        const Point2 pa = in.points[a];
        const Point2 pb = in.points[b];
        const double len = distance(pa, pb);
        std::vector<double> cum(samples + 1, 0.0);
        for (int k = 0; k < samples; ++k) {
            const double s = (k + 0.5) / samples;
            cum[k + 1] = cum[k] + len / samples / h(pa + s * (pb - pa));
        }
        const int n = std::max(1, static_cast<int>(std::lround(cum[samples])));
        int prev = a;
        int k = 0;
        for (int j = 1; j < n; ++j) {
            const double target = cum[samples] * j / n;
            while (cum[k + 1] < target) {
                ++k;
            }
            const double frac = (target - cum[k]) / (cum[k + 1] - cum[k]);
            const double s = (k + frac) / samples;
            const int id = static_cast<int>(out.points.size());
            out.points.push_back(pa + s * (pb - pa));
            out.segments.emplace_back(prev, id);
            prev = id;
        }
        out.segments.emplace_back(prev, b);
    }
    return out;
}

class Refiner {
public:
    Refiner(TriMesh& mesh, const SpacingField& h, const InitOptions& opt)
        : mesh_(mesh), h_(h), opt_(opt),
          sin_min_(std::sin(opt.min_angle * std::numbers::pi / 180.0))
    {}

    void run()
    {
        for (const auto& [a, b] : mesh_.constrained_edges()) {
            segs_.push_back({a, b});
        }
        for (int t = 0; t < mesh_.triangle_slots(); ++t) {
            push(t);
        }
        bool fallback = false;
        while (mesh_.vertex_slots() < opt_.max_vertices) {
            drain_segments();
            if (tris_.empty()) {
                if (deferred_.empty()) {
                    break;
                }
                // Without progress no front remains; seed one circumcentre.
                fallback = !progress_;
                progress_ = false;
                for (int t : deferred_) {
                    push(t);
                }
                deferred_.clear();
                continue;
            }
            const int t = tris_.top().second;
            tris_.pop();
            if (!mesh_.triangle_alive(t) || !is_bad(t)) {
                continue;
            }
            const int edge = opt_.off_centre ? frontal_edge(t) : -1;
            if (opt_.off_centre && edge < 0 && !fallback) {
                deferred_.push_back(t);
                continue;
            }
            fallback = false;
            insert_steiner(t, edge);
        }
    }

private:
    bool encroached(EdgeRef e) const
    {
        const auto [a, b] = mesh_.edge_vertices(e);
        const int o = mesh_.triangle(e.tri).v[e.side];
        if (mesh_.is_constrained(o, a) || mesh_.is_constrained(o, b)) {
            return false;
        }
        return dot(mesh_.pos(a) - mesh_.pos(o), mesh_.pos(b) - mesh_.pos(o)) <= 0.0;
    }

    void drain_segments()
    {
        while (!segs_.empty() && mesh_.vertex_slots() < opt_.max_vertices) {
            const auto [a, b] = segs_.front();
            segs_.pop_front();
            const auto e = mesh_.find_edge(a, b);
            if (!e || !mesh_.is_constrained(a, b)) {
                continue;
            }
            if (encroached(*e)) {
                split_segment(a, b);
            }
        }
    }

    void split_segment(int a, int b)
    {
        const auto e = mesh_.find_edge(a, b);
        if (!e) {
            return;
        }
        const int v = mesh_.add_vertex({midpoint(mesh_.pos(a), mesh_.pos(b)), 0.0, true});
        split_edge(mesh_, *e, v);
        lawson(mesh_, v);
        segs_.push_back({a, v});
        segs_.push_back({v, b});
        for (int t : star(mesh_, v)) {
            push(t);
        }
    }

    bool is_bad(int t) const
    {
        const auto g = mesh_.generators(t);
        const auto ball = try_orthoball(g[0], g[1], g[2]);
        if (!ball) {
            return false;
        }
        const double r = std::sqrt(ball->radius2);
        const Point2 c = centroid(g[0].pos, g[1].pos, g[2].pos);
        if (r > opt_.size_factor * h_(c) / std::numbers::sqrt3) {
            return true;
        }
        int shortest = 0;
        double lmin = 1e300;
        for (int k = 0; k < 3; ++k) {
            const double l = distance(g[next3(k)].pos, g[prev3(k)].pos);
            if (l < lmin) {
                lmin = l;
                shortest = k;
            }
        }
        if (lmin / (2.0 * r) >= sin_min_) {
            return false;
        }
        const auto& tri = mesh_.triangle(t);
        const int apex = tri.v[shortest];
        // Small angles between input segments cannot be repaired.
        return !(mesh_.is_constrained(apex, tri.v[next3(shortest)])
                 && mesh_.is_constrained(apex, tri.v[prev3(shortest)]));
    }

    void push(int t)
    {
        const auto c = mesh_.corners(t);
        const double r2 = norm2(c[0] - face_orthocentre(mesh_.generators(t)[0],
                                                          mesh_.generators(t)[1],
                                                          mesh_.generators(t)[2]));
        const double h = h_(centroid(c[0], c[1], c[2]));
        tris_.emplace(r2 / (h * h), t);
    }

    // Side of an edge facing a constrained edge or an acceptable triangle.
    int frontal_edge(int t) const
    {
        const auto& tri = mesh_.triangle(t);
        int best = -1;
        double best_err = 1e300;
        for (int k = 0; k < 3; ++k) {
            const int n = tri.nbr[k];
            const EdgeRef e{t, k};
            if (!(n < 0 || mesh_.is_constrained(e) || !is_bad(n))) {
                continue;
            }
            const Point2 a = mesh_.pos(tri.v[next3(k)]);
            const Point2 b = mesh_.pos(tri.v[prev3(k)]);
            const double err = std::abs(distance(a, b) / h_(midpoint(a, b)) - 1.0);
            if (err < best_err) {
                best_err = err;
                best = k;
            }
        }
        return best;
    }

    // Point on the bisector of the frontal edge forming a triangle of the
    // local size, never beyond the circumcentre. Circumcentre when edge < 0.
    Point2 steiner_point(int t, int edge) const
    {
        const auto g = mesh_.generators(t);
        const Point2 cc = face_orthocentre(g[0], g[1], g[2]);
        if (edge < 0) {
            return cc;
        }
        const Point2 a = g[next3(edge)].pos;
        const Point2 b = g[prev3(edge)].pos;
        const Point2 m = midpoint(a, b);
        const double l = distance(a, b);
        const Point2 n{-(b - a).y / l, (b - a).x / l};
        const double s = dot(cc - m, n);
        const double r = distance(cc, a);
        const double cap = s > 0.0 ? s : 0.5 * (s + r);
        // Apex of the isosceles triangle on (a, b) whose circumradius matches
        // the local size, halving overlong front edges.
        const double rho = std::max(h_(m) / std::numbers::sqrt3, 0.5 * l);
        // The triangle (a, b, p) itself must meet the angle bound.
        const double theta = opt_.min_angle * std::numbers::pi / 180.0;
        const double lo = 0.5 * l * std::tan(theta);
        const double hi = 0.5 * l / std::tan(0.5 * theta);
        const double d = std::min(std::clamp(rho + std::sqrt(std::max(rho * rho - 0.25 * l * l, 0.0)), lo, hi), cap);
        if (d < lo) {
            return cc;
        }
        return m + d * n;
    }

    // First constrained edge met walking straight from the centroid of t
    // to p, if any.
    std::optional<EdgeRef> crossed_segment(int t, Point2 p) const
    {
        const auto c = mesh_.corners(t);
        const Point2 s = centroid(c[0], c[1], c[2]);
        int prev = -1;
        for (int step = 0; step < mesh_.triangle_slots() + 8; ++step) {
            const auto& tri = mesh_.triangle(t);
            int exit = -1;
            for (int k = 0; k < 3; ++k) {
                if (prev >= 0 && tri.nbr[k] == prev) {
                    continue;
                }
                const Point2 a = mesh_.pos(tri.v[next3(k)]);
                const Point2 b = mesh_.pos(tri.v[prev3(k)]);
                if (orient(a, b, p) < 0.0 && orient(s, p, a) * orient(s, p, b) <= 0.0) {
                    exit = k;
                    break;
                }
            }
            if (exit < 0) {
                return std::nullopt;
            }
            const EdgeRef e{t, exit};
            if (mesh_.is_constrained(e)) {
                return e;
            }
            prev = t;
            t = tri.nbr[exit];
        }
        return std::nullopt;
    }

    void insert_steiner(int t, int edge)
    {
        const Point2 c = steiner_point(t, edge);
        if (const auto seg = crossed_segment(t, c)) {
            const auto [a, b] = mesh_.edge_vertices(*seg);
            split_segment(a, b);
            push(t);
            return;
        }
        const Location loc = locate(mesh_, c, t);
        if (loc.kind == LocateKind::on_vertex) {
            return;
        }
        if (loc.kind == LocateKind::outside
            || (loc.kind == LocateKind::on_edge && mesh_.is_constrained(loc.edge))) {
            if (loc.edge.tri >= 0) {
                const auto [a, b] = mesh_.edge_vertices(loc.edge);
                split_segment(a, b);
                push(t);
            }
            return;
        }
        mesh_.begin();
        const int v = insert_point(mesh_, c, loc.edge.tri, true);
        if (v < 0) {
            mesh_.rollback();
            return;
        }
        std::vector<std::pair<int, int>> hit;
        const std::vector<int> fan = star(mesh_, v);
        for (int s : fan) {
            const EdgeRef e{s, mesh_.triangle(s).local_index(v)};
            if (mesh_.is_constrained(e) && encroached(e)) {
                hit.push_back(mesh_.edge_vertices(e));
            }
        }
        if (!hit.empty()) {
            mesh_.rollback();
            for (const auto& [a, b] : hit) {
                split_segment(a, b);
            }
            push(t);
            return;
        }
        mesh_.commit();
        progress_ = true;
        for (int s : fan) {
            push(s);
        }
    }

    TriMesh& mesh_;
    const SpacingField& h_;
    InitOptions opt_;
    double sin_min_;
    std::deque<std::pair<int, int>> segs_;
    std::priority_queue<std::pair<double, int>> tris_;
    std::vector<int> deferred_;
    bool progress_ = false;
};

} // namespace

TriMesh init_mesh(const Pslg& pslg, const SpacingField& h, std::uint64_t seed,
                  const InitOptions& opt)
{
    pslg.validate();
    TriMesh mesh = triangulate(discretise(pslg, h), {}, seed);
    Refiner(mesh, h, opt).run();
    mesh.compact();
    for (const auto& [a, b] : mesh.constrained_edges()) {
        for (int v : {a, b}) {
            auto w = mesh.vertex(v);
            w.fixed = true;
            mesh.set_vertex(v, w);
        }
    }
    return mesh;
}

} // namespace pdgrid
