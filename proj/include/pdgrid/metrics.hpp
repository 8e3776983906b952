#pragma once

#include <array>
#include <vector>

#include "pdgrid/geom.hpp"
#include "pdgrid/spacing.hpp"
#include "pdgrid/tessellation.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid {

struct DualQualityParams {
    double beta_f = 0.5;
    double beta_e = 0.5;

    // Throws ValidationError unless both are >= 0 and sum to 1.
    void validate() const;
};

// Area-length ratio: +1 equilateral, 0 degenerate, negative when inverted.
double tri_quality(Point2 a, Point2 b, Point2 c);
double tri_quality(const TriMesh& mesh, int t);

// Staggering quality of the orthocentres against the primal centroid and
// edge midpoints. Degenerate (collinear) triangles score 0. Not clamped
// below, so severe defects go negative.
double dual_quality(const WeightedVertex& a, const WeightedVertex& b, const WeightedVertex& c,
                    const DualQualityParams& params = {});
double dual_quality(const TriMesh& mesh, int t, const DualQualityParams& params = {});

// Interior angles in degrees at a, b, c.
std::array<double, 3> triangle_angles(Point2 a, Point2 b, Point2 c);

struct DefectReport {
    std::vector<double> delta_f; // per triangle slot: |o_f - centroid|
    std::vector<double> delta_e; // per edge of mesh.edges(): |o_e - midpoint|
    std::vector<double> gamma_f; // per vertex slot: |x_i - dual cell centroid|
    std::vector<double> gamma_e; // per edge of mesh.edges(): distance from the dual
                                 // edge midpoint to the primal segment; NaN on the boundary
};

DefectReport defects(const TriMesh& mesh, const PowerDual& dual);

// w_i / |cell_i|. Throws DegenerateCell for a non-positive cell area.
double relative_power(const TriMesh& mesh, const PowerDual& dual, int i);

// Edge length over the spacing sampled at the edge midpoint.
double relative_length(const TriMesh& mesh, const SpacingField& h, EdgeRef e);

struct Stat {
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

struct QualityReport {
    // Per live triangle, in slot order.
    std::vector<int> tri_id;
    std::vector<double> q_tri;
    std::vector<double> q_dual;
    std::vector<double> angle_min;
    std::vector<double> angle_max;
    std::vector<bool> poorly_staggered;
    // Per edge (mesh.edges() order).
    std::vector<std::pair<int, int>> edge_vertices;
    std::vector<double> h_rel;
    // Per live vertex, in slot order. W_r is NaN where the cell area is not positive.
    std::vector<int> vertex_id;
    std::vector<double> w_rel;

    int vertices = 0;
    int triangles = 0;
    int edges = 0;
    Stat qt;
    Stat qd;
    Stat angle;
    Stat hr;
    Stat wr;
    double sigma_theta = 0.0; // mean absolute deviation of all angles, degrees
    double sigma_h = 0.0;     // mean absolute deviation of h_r
    int bad = 0;              // poorly staggered triangles
};

QualityReport report(const TriMesh& mesh, const PowerDual& dual, const SpacingField& h,
                     const DualQualityParams& params = {});
// Builds the dual itself; degenerate triangles are tolerated (W_r becomes NaN).
QualityReport report(const TriMesh& mesh, const SpacingField& h,
                     const DualQualityParams& params = {});

// Q^T / Q^D per triangle slot, kept in sync by the optimiser.
struct QualityCache {
    std::vector<double> qt;
    std::vector<double> qd;

    void rebuild(const TriMesh& mesh, const DualQualityParams& params);
    void update(const TriMesh& mesh, int t, const DualQualityParams& params);
    double min_qt(const TriMesh& mesh) const;
    double min_qd(const TriMesh& mesh) const;
};

} // namespace pdgrid
