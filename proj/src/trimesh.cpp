#include "pdgrid/trimesh.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "pdgrid/errors.hpp"

namespace pdgrid {

TriMesh TriMesh::from_triangles(std::vector<WeightedVertex> vertices,
                                std::span<const std::array<int, 3>> triangles,
                                std::span<const std::pair<int, int>> constrained)
{
    TriMesh mesh;
    const int nv = static_cast<int>(vertices.size());
    mesh.vertices_ = std::move(vertices);
    mesh.vert_tri_.assign(nv, -1);
    mesh.triangles_.reserve(triangles.size());

    // directed edge (a -> b) -> (triangle, side)
    std::unordered_map<std::uint64_t, EdgeRef> half;
    half.reserve(triangles.size() * 3);
    auto directed = [](int a, int b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32)
            | static_cast<std::uint32_t>(b);
    };

    for (const auto& tv : triangles) {
        const int t = static_cast<int>(mesh.triangles_.size());
        for (int k = 0; k < 3; ++k) {
            if (tv[k] < 0 || tv[k] >= nv) {
                throw GeometryError("triangle " + std::to_string(t) + " references vertex "
                                    + std::to_string(tv[k]) + " out of range");
            }
        }
        if (tv[0] == tv[1] || tv[1] == tv[2] || tv[0] == tv[2]) {
            throw GeometryError("triangle " + std::to_string(t) + " repeats a vertex");
        }
        const auto& P = mesh.vertices_;
        if (!(signed_area(P[tv[0]].pos, P[tv[1]].pos, P[tv[2]].pos) > 0.0)) {
            throw GeometryError("triangle " + std::to_string(t) + " is not counter-clockwise");
        }
        Triangle tri;
        tri.v = tv;
        mesh.triangles_.push_back(tri);
        for (int k = 0; k < 3; ++k) {
            const int a = tv[next3(k)];
            const int b = tv[prev3(k)];
            if (!half.emplace(directed(a, b), EdgeRef{t, k}).second) {
                throw GeometryError("edge (" + std::to_string(a) + "," + std::to_string(b)
                                    + ") is used twice with the same orientation");
            }
            mesh.vert_tri_[tv[k]] = t;
        }
    }
    for (auto& [key, ref] : half) {
        const int a = static_cast<int>(key >> 32);
        const int b = static_cast<int>(key & 0xffffffffu);
        auto it = half.find(directed(b, a));
        if (it != half.end()) {
            mesh.triangles_[ref.tri].nbr[ref.side] = it->second.tri;
        } else {
            mesh.constrained_.insert(edge_key(a, b));
        }
    }
    for (const auto& [a, b] : constrained) {
        if (!mesh.find_edge(a, b)) {
            throw GeometryError("constrained edge (" + std::to_string(a) + "," + std::to_string(b)
                                + ") is not an edge of the mesh");
        }
        mesh.constrained_.insert(edge_key(a, b));
    }
    return mesh;
}

int TriMesh::vertex_count() const
{
    return static_cast<int>(std::count_if(vert_tri_.begin(), vert_tri_.end(),
                                          [](int t) { return t >= 0; }));
}

int TriMesh::triangle_count() const
{
    return static_cast<int>(std::count_if(triangles_.begin(), triangles_.end(),
                                          [](const Triangle& t) { return t.alive(); }));
}

std::array<Point2, 3> TriMesh::corners(int t) const
{
    const auto& v = triangles_[t].v;
    return {vertices_[v[0]].pos, vertices_[v[1]].pos, vertices_[v[2]].pos};
}

std::array<WeightedVertex, 3> TriMesh::generators(int t) const
{
    const auto& v = triangles_[t].v;
    return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
}

std::pair<int, int> TriMesh::edge_vertices(EdgeRef e) const
{
    const auto& v = triangles_[e.tri].v;
    return {v[next3(e.side)], v[prev3(e.side)]};
}

EdgeRef TriMesh::twin(EdgeRef e) const
{
    const int n = triangles_[e.tri].nbr[e.side];
    if (n < 0) {
        return {-1, 0};
    }
    const auto [a, b] = edge_vertices(e);
    const auto& tv = triangles_[n].v;
    for (int k = 0; k < 3; ++k) {
        if (tv[next3(k)] == b && tv[prev3(k)] == a) {
            return {n, k};
        }
    }
    return {-1, 0};
}

std::optional<EdgeRef> TriMesh::find_edge(int a, int b) const
{
    const int start = vert_tri_[a];
    if (start < 0) {
        return std::nullopt;
    }
    // Rotate counter-clockwise around a, then clockwise if a boundary stops us.
    int t = start;
    do {
        const auto& tri = triangles_[t];
        const int k = tri.local_index(a);
        if (tri.v[next3(k)] == b) {
            return EdgeRef{t, prev3(k)};
        }
        if (tri.v[prev3(k)] == b) {
            return EdgeRef{t, next3(k)};
        }
        t = tri.nbr[next3(k)];
    } while (t >= 0 && t != start);
    if (t == start) {
        return std::nullopt;
    }
    t = triangles_[start].nbr[prev3(triangles_[start].local_index(a))];
    while (t >= 0) {
        const auto& tri = triangles_[t];
        const int k = tri.local_index(a);
        if (tri.v[next3(k)] == b) {
            return EdgeRef{t, prev3(k)};
        }
        if (tri.v[prev3(k)] == b) {
            return EdgeRef{t, next3(k)};
        }
        t = tri.nbr[prev3(k)];
    }
    return std::nullopt;
}

std::vector<EdgeRef> TriMesh::edges() const
{
    std::vector<EdgeRef> out;
    out.reserve(triangles_.size() * 3 / 2 + 16);
    for (int t = 0; t < triangle_slots(); ++t) {
        const auto& tri = triangles_[t];
        if (!tri.alive()) {
            continue;
        }
        for (int k = 0; k < 3; ++k) {
            if (tri.nbr[k] < 0 || t < tri.nbr[k]) {
                out.push_back({t, k});
            }
        }
    }
    return out;
}

int TriMesh::edge_count() const
{
    int n = 0;
    for (int t = 0; t < triangle_slots(); ++t) {
        const auto& tri = triangles_[t];
        if (!tri.alive()) {
            continue;
        }
        for (int k = 0; k < 3; ++k) {
            n += (tri.nbr[k] < 0 || t < tri.nbr[k]) ? 1 : 0;
        }
    }
    return n;
}

bool TriMesh::is_constrained(EdgeRef e) const
{
    const auto [a, b] = edge_vertices(e);
    return is_constrained(a, b);
}

std::vector<std::pair<int, int>> TriMesh::constrained_edges() const
{
    std::vector<std::pair<int, int>> out;
    out.reserve(constrained_.size());
    for (auto key : constrained_) {
        out.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void TriMesh::add_constraint(int a, int b)
{
    if (journaling_) {
        throw Error("TriMesh: constraints cannot change inside a transaction");
    }
    constrained_.insert(edge_key(a, b));
}

void TriMesh::remove_constraint(int a, int b)
{
    if (journaling_) {
        throw Error("TriMesh: constraints cannot change inside a transaction");
    }
    constrained_.erase(edge_key(a, b));
}

// --- journal -----------------------------------------------------------------

void TriMesh::log_vertex(int i)
{
    if (journaling_ && static_cast<std::size_t>(i) < mark_vertices_) {
        journal_.push_back({UndoEntry::Kind::vertex, i, vertices_[i], {}, 0});
    }
}

void TriMesh::log_triangle(int t)
{
    if (journaling_ && static_cast<std::size_t>(t) < mark_triangles_) {
        journal_.push_back({UndoEntry::Kind::triangle, t, {}, triangles_[t], 0});
    }
}

void TriMesh::log_incident(int i)
{
    if (journaling_ && static_cast<std::size_t>(i) < mark_vertices_) {
        journal_.push_back({UndoEntry::Kind::incident, i, {}, {}, vert_tri_[i]});
    }
}

void TriMesh::set_vertex(int i, const WeightedVertex& v)
{
    log_vertex(i);
    vertices_[i] = v;
}

void TriMesh::set_position(int i, Point2 p)
{
    log_vertex(i);
    vertices_[i].pos = p;
}

void TriMesh::set_weight(int i, double w)
{
    log_vertex(i);
    vertices_[i].weight = w;
}

int TriMesh::add_vertex(const WeightedVertex& v)
{
    vertices_.push_back(v);
    vert_tri_.push_back(-1);
    return static_cast<int>(vertices_.size()) - 1;
}

void TriMesh::kill_vertex(int i)
{
    log_incident(i);
    vert_tri_[i] = -1;
}

int TriMesh::add_triangle(const Triangle& t)
{
    triangles_.push_back(t);
    return static_cast<int>(triangles_.size()) - 1;
}

void TriMesh::set_triangle(int t, const Triangle& tri)
{
    log_triangle(t);
    triangles_[t] = tri;
}

void TriMesh::kill_triangle(int t)
{
    log_triangle(t);
    triangles_[t] = Triangle{};
}

void TriMesh::set_incident(int i, int t)
{
    if (vert_tri_[i] != t) {
        log_incident(i);
        vert_tri_[i] = t;
    }
}

void TriMesh::relink(int t, int old_nbr, int new_nbr)
{
    if (t < 0) {
        return;
    }
    auto& nb = triangles_[t].nbr;
    for (int k = 0; k < 3; ++k) {
        if (nb[k] == old_nbr) {
            log_triangle(t);
            nb[k] = new_nbr;
            return;
        }
    }
}

EdgeRef TriMesh::flip(EdgeRef e)
{
    const int t = e.tri;
    const EdgeRef f = twin(e);
    const int u = f.tri;

    const Triangle T = triangles_[t];
    const Triangle U = triangles_[u];
    const int p = T.v[e.side];
    const int q = T.v[next3(e.side)];
    const int r = T.v[prev3(e.side)];
    const int o = U.v[f.side];

    const int nt_q = T.nbr[next3(e.side)]; // across (r, p)
    const int nt_r = T.nbr[prev3(e.side)]; // across (p, q)
    // In U = (o, r, q): across (q, o) is opposite r, across (o, r) is opposite q.
    const int ku_r = U.local_index(r);
    const int ku_q = U.local_index(q);
    const int nu_r = U.nbr[ku_r];
    const int nu_q = U.nbr[ku_q];

    Triangle a; // (p, q, o)
    a.v = {p, q, o};
    a.nbr = {nu_r, u, nt_r};
    Triangle b; // (o, r, p)
    b.v = {o, r, p};
    b.nbr = {nt_q, t, nu_q};

    set_triangle(t, a);
    set_triangle(u, b);
    relink(nu_r, u, t);
    relink(nt_q, t, u);
    set_incident(p, t);
    set_incident(q, t);
    set_incident(o, t);
    set_incident(r, u);
    return {t, 1};
}

void TriMesh::begin()
{
    if (journaling_) {
        throw Error("TriMesh: nested transaction");
    }
    journaling_ = true;
    journal_.clear();
    mark_vertices_ = vertices_.size();
    mark_triangles_ = triangles_.size();
}

std::vector<std::pair<int, Triangle>> TriMesh::original_triangles() const
{
    std::vector<std::pair<int, Triangle>> out;
    std::unordered_set<int> seen;
    for (const auto& entry : journal_) {
        if (entry.kind == UndoEntry::Kind::triangle && seen.insert(entry.index).second) {
            out.emplace_back(entry.index, entry.tri);
        }
    }
    return out;
}

std::vector<int> TriMesh::appended_triangles() const
{
    std::vector<int> out;
    for (std::size_t t = mark_triangles_; t < triangles_.size(); ++t) {
        out.push_back(static_cast<int>(t));
    }
    return out;
}

void TriMesh::commit()
{
    journaling_ = false;
    journal_.clear();
}

void TriMesh::rollback()
{
    for (auto it = journal_.rbegin(); it != journal_.rend(); ++it) {
        switch (it->kind) {
        case UndoEntry::Kind::vertex:
            vertices_[it->index] = it->vertex;
            break;
        case UndoEntry::Kind::triangle:
            triangles_[it->index] = it->tri;
            break;
        case UndoEntry::Kind::incident:
            vert_tri_[it->index] = it->incident;
            break;
        }
    }
    vertices_.resize(mark_vertices_);
    vert_tri_.resize(mark_vertices_);
    triangles_.resize(mark_triangles_);
    journaling_ = false;
    journal_.clear();
}

std::vector<int> TriMesh::compact()
{
    if (journaling_) {
        throw Error("TriMesh: compact inside a transaction");
    }
    std::vector<int> vmap(vertices_.size(), -1);
    std::vector<WeightedVertex> nv;
    nv.reserve(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (vert_tri_[i] >= 0) {
            vmap[i] = static_cast<int>(nv.size());
            nv.push_back(vertices_[i]);
        }
    }
    std::vector<int> tmap(triangles_.size(), -1);
    std::vector<Triangle> nt;
    nt.reserve(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        if (triangles_[t].alive()) {
            tmap[t] = static_cast<int>(nt.size());
            nt.push_back(triangles_[t]);
        }
    }
    std::vector<int> nvt(nv.size(), -1);
    for (std::size_t t = 0; t < nt.size(); ++t) {
        for (int k = 0; k < 3; ++k) {
            nt[t].v[k] = vmap[nt[t].v[k]];
            nt[t].nbr[k] = nt[t].nbr[k] < 0 ? kBoundary : tmap[nt[t].nbr[k]];
            nvt[nt[t].v[k]] = static_cast<int>(t);
        }
    }
    std::unordered_set<std::uint64_t> nc;
    for (auto key : constrained_) {
        const int a = vmap[static_cast<int>(key >> 32)];
        const int b = vmap[static_cast<int>(key & 0xffffffffu)];
        if (a >= 0 && b >= 0) {
            nc.insert(edge_key(a, b));
        }
    }
    vertices_ = std::move(nv);
    triangles_ = std::move(nt);
    vert_tri_ = std::move(nvt);
    constrained_ = std::move(nc);
    return vmap;
}

} // namespace pdgrid
