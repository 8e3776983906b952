#pragma once

#include <cstdint>
#include <vector>

#include "pdgrid/metrics.hpp"
#include "pdgrid/spacing.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid {

struct LineSearchConfig {
    int max_bisections = 5;
    double improvement = 0.0;   // required gain of the worst incident metric
    bool analytic = true;       // analytic gradients; false uses central differences
    bool record = false;        // keep an UpdateRecord per accepted update
};

struct UpdateRecord {
    int vertex = -1;
    double before = 0.0; // worst metric over the affected triangles
    double after = 0.0;
};

struct SweepOutcome {
    int attempted = 0;
    int accepted = 0;
    double worst_before = 0.0; // global minimum at the start of the sweep
    double worst_after = 0.0;
    std::vector<UpdateRecord> records;
};

struct WeightGradient {
    double dq_dw = 0.0;
    int worst_tri = -1;
};

// d Q^D_j / d w_i for the worst incident triangle j.
WeightGradient weight_gradient(const TriMesh& mesh, int i, const DualQualityParams& params = {},
                               bool analytic = true);

// d Q^D / d w_k for corner k of the triangle (a, b, c).
double dual_quality_weight_derivative(const WeightedVertex& a, const WeightedVertex& b,
                                      const WeightedVertex& c, int k,
                                      const DualQualityParams& params = {});
double dual_quality_weight_derivative_fd(const WeightedVertex& a, const WeightedVertex& b,
                                         const WeightedVertex& c, int k,
                                         const DualQualityParams& params = {});

// Gradient of Q^T with respect to the position of corner a.
Point2 tri_quality_gradient(Point2 a, Point2 b, Point2 c);
Point2 tri_quality_gradient_fd(Point2 a, Point2 b, Point2 c);

// Spacing-weighted mean of the orthocentres around interior vertex i.
// Throws EmptyStar when i has no incident triangles.
Point2 owt_target(const TriMesh& mesh, const SpacingField& h, int i);

// Gauss-Seidel optimiser over vertex positions and weights. Every trial step
// runs inside a mesh transaction: the step is applied, regularity restored
// by local flips, and the result kept only if the worst incident metric
// strictly improves and no triangle inverts, degenerates, or locks.
class LocalOptimiser {
public:
    LocalOptimiser(TriMesh& mesh, const SpacingField& h, DualQualityParams params = {},
                   LineSearchConfig cfg = {});

    bool update_weight(int i, UpdateRecord* record = nullptr);
    bool update_vertex(int i, UpdateRecord* record = nullptr);

    // Visits vertices in a seeded random order. Vertices whose neighbourhood
    // has not changed since their last rejected update are skipped.
    SweepOutcome weight_sweep(std::uint64_t seed);
    SweepOutcome vertex_sweep(std::uint64_t seed);

    // Call after the mesh was changed behind the optimiser's back.
    void refresh();
    const QualityCache& cache() const { return cache_; }
    double min_qt() const;
    double min_qd() const;

private:
    enum class Metric { primal, dual };
    struct Trial;

    bool try_step(int i, Point2 pos, double weight, Metric metric, UpdateRecord* record);
    void mark_dirty_after(const std::vector<int>& tris);
    SweepOutcome sweep(std::uint64_t seed, Metric metric);

    TriMesh& mesh_;
    const SpacingField& h_;
    DualQualityParams params_;
    LineSearchConfig cfg_;
    QualityCache cache_;
    double floor_qt_ = 0.0;
    double floor_qd_ = 0.0;
    std::vector<char> dirty_weight_;
    std::vector<char> dirty_vertex_;
    std::vector<int> fan_;
    std::vector<int> touched_;
    std::vector<EdgeRef> locked_;
};

SweepOutcome weight_sweep(TriMesh& mesh, std::uint64_t seed, const DualQualityParams& params = {},
                          const LineSearchConfig& cfg = {});
SweepOutcome vertex_sweep(TriMesh& mesh, const SpacingField& h, std::uint64_t seed,
                          const DualQualityParams& params = {}, const LineSearchConfig& cfg = {});

// Single updates on a mesh without a long-lived optimiser.
bool update_weight(TriMesh& mesh, int i, const DualQualityParams& params = {},
                   const LineSearchConfig& cfg = {});
bool update_vertex(TriMesh& mesh, const SpacingField& h, int i,
                   const DualQualityParams& params = {}, const LineSearchConfig& cfg = {});

} // namespace pdgrid
