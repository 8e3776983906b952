#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdgrid/local_updates.hpp"
#include "pdgrid/metrics.hpp"
#include "pdgrid/spacing.hpp"
#include "pdgrid/topo_ops.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid {

enum class Mode { coupled, primal_only, weights_only };

// Accepts "coupled", "primal_only"/"primal-only", "weights_only"/"weights-only".
Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

struct ScheduleConfig {
    int outer = 16;
    int inner = 8;
    std::uint64_t seed = 0;
    Mode mode = Mode::coupled;
    bool early_stop = true;
    LineSearchConfig line_search;
    TopoConfig topo;
    DualQualityParams params;

    void validate() const;
};

struct TraceRow {
    int iteration = 0; // 0 = input mesh
    int vertices = 0;
    int triangles = 0;
    double min_qt = 0.0;
    double mean_qt = 0.0;
    double min_qd = 0.0;
    double mean_qd = 0.0;
    int bad = 0;
    int vertex_accepted = 0;
    int weight_accepted = 0;
    int flips = 0;
    int collapsed = 0;
    int refined = 0;
    double seconds = 0.0;
};

struct ScheduleResult {
    std::vector<TraceRow> trace;
    // Every accepted local update, when cfg.line_search.record is set.
    std::vector<UpdateRecord> vertex_records;
    std::vector<UpdateRecord> weight_records;
};

// Alternates vertex and weight sweeps with flip cascades and edge
// collapse/refinement passes; the mesh is modified in place.
ScheduleResult optimise(TriMesh& mesh, const SpacingField& h, const ScheduleConfig& cfg = {});

TraceRow trace_row(const TriMesh& mesh, int iteration, const DualQualityParams& params);

} // namespace pdgrid
