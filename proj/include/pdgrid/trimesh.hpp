#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pdgrid/geom.hpp"

namespace pdgrid {

inline constexpr int kBoundary = -1;

// Triangle slot. `nbr[k]` is the triangle across the edge opposite `v[k]`,
// i.e. the edge (v[k+1], v[k+2]), or kBoundary. Dead slots have v[0] < 0.
struct Triangle {
    std::array<int, 3> v{-1, -1, -1};
    std::array<int, 3> nbr{kBoundary, kBoundary, kBoundary};

    bool alive() const { return v[0] >= 0; }
    int local_index(int vertex) const
    {
        return v[0] == vertex ? 0 : v[1] == vertex ? 1 : v[2] == vertex ? 2 : -1;
    }
    friend bool operator==(const Triangle&, const Triangle&) = default;
};

// Directed reference to the edge opposite vertex `side` of triangle `tri`.
struct EdgeRef {
    int tri = -1;
    int side = 0;
    friend bool operator==(EdgeRef, EdgeRef) = default;
};

inline constexpr int next3(int k) { return k == 2 ? 0 : k + 1; }
inline constexpr int prev3(int k) { return k == 0 ? 2 : k - 1; }

constexpr std::uint64_t edge_key(int a, int b)
{
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32)
        | static_cast<std::uint32_t>(b);
}

// Indexed triangle mesh with triangle-neighbour adjacency: the regular
// triangulation T(X, W). Slots are stable until compact(); deletions leave
// dead slots behind.
//
// All mutations may be journaled: begin() opens a transaction, rollback()
// restores the exact pre-transaction state, commit() keeps the changes.
// Constraint edits are not journaled and are refused inside a transaction.
class TriMesh {
public:
    TriMesh() = default;

    // Builds adjacency from an indexed triangle list. Triangles must be
    // counter-clockwise and form an edge-manifold. Every hull edge is
    // implicitly a boundary edge; `constrained` may add interior edges.
    static TriMesh from_triangles(std::vector<WeightedVertex> vertices,
                                  std::span<const std::array<int, 3>> triangles,
                                  std::span<const std::pair<int, int>> constrained = {});

    // Slot counts (including dead slots) and live counts.
    int vertex_slots() const { return static_cast<int>(vertices_.size()); }
    int triangle_slots() const { return static_cast<int>(triangles_.size()); }
    int vertex_count() const;
    int triangle_count() const;

    const WeightedVertex& vertex(int i) const { return vertices_[i]; }
    const Triangle& triangle(int t) const { return triangles_[t]; }
    const std::vector<WeightedVertex>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    bool vertex_alive(int i) const { return vert_tri_[i] >= 0; }
    bool triangle_alive(int t) const { return triangles_[t].alive(); }
    int incident_triangle(int i) const { return vert_tri_[i]; }

    Point2 pos(int i) const { return vertices_[i].pos; }
    std::array<Point2, 3> corners(int t) const;
    std::array<WeightedVertex, 3> generators(int t) const;

    std::pair<int, int> edge_vertices(EdgeRef e) const;
    // The same edge seen from the neighbouring triangle; tri == -1 at the boundary.
    EdgeRef twin(EdgeRef e) const;
    std::optional<EdgeRef> find_edge(int a, int b) const;
    // Every undirected edge once, from the lower-indexed triangle slot.
    std::vector<EdgeRef> edges() const;
    int edge_count() const;

    bool is_constrained(int a, int b) const { return constrained_.count(edge_key(a, b)) != 0; }
    bool is_constrained(EdgeRef e) const;
    const std::unordered_set<std::uint64_t>& constrained_keys() const { return constrained_; }
    std::vector<std::pair<int, int>> constrained_edges() const;
    void add_constraint(int a, int b);
    void remove_constraint(int a, int b);

    // --- journaled mutations -------------------------------------------------
    void set_vertex(int i, const WeightedVertex& v);
    void set_position(int i, Point2 p);
    void set_weight(int i, double w);
    int add_vertex(const WeightedVertex& v); // dead until a triangle references it
    void kill_vertex(int i);
    int add_triangle(const Triangle& t);
    void set_triangle(int t, const Triangle& tri);
    void kill_triangle(int t);
    void set_incident(int i, int t);
    // Replaces the pointer of `t` that refers to `old_nbr` with `new_nbr`.
    void relink(int t, int old_nbr, int new_nbr);

    // Swaps the diagonal of the quad formed by e and its twin. No validity
    // checks: callers guarantee an interior edge in a convex quad. Returns the
    // new diagonal.
    EdgeRef flip(EdgeRef e);

    void begin();
    void commit();
    void rollback();
    bool in_transaction() const { return journaling_; }
    // Slots modified since begin(): every journaled pre-existing triangle
    // paired with its contents at begin(), then the appended slots.
    std::vector<std::pair<int, Triangle>> original_triangles() const;
    std::vector<int> appended_triangles() const;

    // Drops dead slots and renumbers. Returns old->new vertex map (-1 = dropped).
    std::vector<int> compact();

private:
    struct UndoEntry {
        enum class Kind : std::uint8_t { vertex, triangle, incident } kind;
        int index;
        WeightedVertex vertex;
        Triangle tri;
        int incident;
    };

    void log_vertex(int i);
    void log_triangle(int t);
    void log_incident(int i);

    std::vector<WeightedVertex> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<int> vert_tri_;
    std::unordered_set<std::uint64_t> constrained_;

    bool journaling_ = false;
    std::vector<UndoEntry> journal_;
    std::size_t mark_vertices_ = 0;
    std::size_t mark_triangles_ = 0;
};

} // namespace pdgrid
