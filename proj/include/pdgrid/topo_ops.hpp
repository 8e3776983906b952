#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "pdgrid/metrics.hpp"
#include "pdgrid/spacing.hpp"
#include "pdgrid/tessellation.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid {

inline constexpr double kTopoImprovement = 1e-8;

// Throws InvalidFlip for boundary, constrained, or inverting flips.
EdgeRef flip_edge(TriMesh& mesh, EdgeRef e);

// Lawson cascade over every edge until all interior edges are locally
// regular or locked. Returns the flip count; throws NonTermination past 10*E.
int restore_regularity(TriMesh& mesh, double tolerance = kRegularityTolerance);

// Cascade seeded by the edges of `seeds`. Appends the slots of every flipped
// triangle to `touched` and every edge seen as a locked violation to
// `locked` (stale entries possible; callers reclassify). Returns -1 once
// `max_flips` is exceeded (the mesh is then left mid-cascade; callers roll back).
int restore_regularity_local(TriMesh& mesh, std::span<const int> seeds, int max_flips,
                             std::vector<int>* touched = nullptr,
                             double tolerance = kRegularityTolerance,
                             std::vector<EdgeRef>* locked = nullptr);

// Interior edges that violate the weighted criterion but cannot be flipped.
int count_locked_violations(const TriMesh& mesh, double tolerance = kRegularityTolerance);

struct TopoConfig {
    double improvement = kTopoImprovement;
    int max_cavity_depth = 8;
    double collapse_below = 0.5;           // h_r trigger
    double refine_above = std::numbers::sqrt2;
    bool spacing_triggers = true;
    DualQualityParams params;
};

// Outcome of re-triangulating a star-shaped cavity by a fan from `apex`.
// Never mutates the mesh.
struct CavitySim {
    std::vector<int> before;     // cavity triangle slots
    std::vector<int> loop;       // cavity boundary, counter-clockwise
    std::vector<int> outer;      // triangle across loop edge k (or kBoundary)
    std::vector<int> inner;      // cavity triangle on loop edge k
    std::vector<int> removed;    // vertices strictly inside the cavity
    Point2 apex;
    double apex_weight = 0.0;
    double min_before = 0.0;     // min Q^T over `before`
    double min_after = 0.0;      // min Q^T over the fan
    bool valid = false;
};

CavitySim simulate_collapse(const TriMesh& mesh, EdgeRef e);
CavitySim simulate_refine(const TriMesh& mesh, EdgeRef e, const TopoConfig& cfg = {});

// Quality-driven single operations: applied only when the cavity's min Q^T
// rises by at least cfg.improvement after regularity is restored.
bool collapse_edge(TriMesh& mesh, EdgeRef e, const TopoConfig& cfg = {});
bool refine_edge(TriMesh& mesh, EdgeRef e, const TopoConfig& cfg = {});

struct TopoCounts {
    int attempted = 0;
    int collapsed = 0;
    int refined = 0;
    int flips = 0;
};

// One pass over the current edges each, followed by restore_regularity and
// compaction. Spacing-triggered operations must keep the affected minima of
// Q^T and Q^D at or above the mesh-wide minima taken at the start of the pass.
TopoCounts prune_edges(TriMesh& mesh, const SpacingField& h, const TopoConfig& cfg = {});
TopoCounts refine_edges(TriMesh& mesh, const SpacingField& h, const TopoConfig& cfg = {});

} // namespace pdgrid
