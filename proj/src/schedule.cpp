#include "pdgrid/schedule.hpp"

#include <chrono>

#include "pdgrid/errors.hpp"

namespace pdgrid {

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t sweep_seed(std::uint64_t seed, int outer, int inner, int pass)
{
    return splitmix(seed ^ splitmix((static_cast<std::uint64_t>(outer) << 32)
                                    ^ (static_cast<std::uint64_t>(inner) << 2)
                                    ^ static_cast<std::uint64_t>(pass)));
}

} // namespace

Mode parse_mode(const std::string& s)
{
    if (s == "coupled") {
        return Mode::coupled;
    }
    if (s == "primal_only" || s == "primal-only") {
        return Mode::primal_only;
    }
    if (s == "weights_only" || s == "weights-only") {
        return Mode::weights_only;
    }
    throw ValidationError("unknown mode '" + s + "' (coupled, primal-only, weights-only)");
}

std::string to_string(Mode m)
{
    switch (m) {
    case Mode::coupled:
        return "coupled";
    case Mode::primal_only:
        return "primal_only";
    case Mode::weights_only:
        return "weights_only";
    }
    return "?";
}

void ScheduleConfig::validate() const
{
    if (outer < 1 || inner < 1) {
        throw ValidationError("outer and inner iteration counts must be >= 1");
    }
    if (line_search.max_bisections < 1) {
        throw ValidationError("max_bisections must be >= 1");
    }
    params.validate();
}

TraceRow trace_row(const TriMesh& mesh, int iteration, const DualQualityParams& params)
{
    TraceRow row;
    row.iteration = iteration;
    row.vertices = mesh.vertex_count();
    double sum_qt = 0.0;
    double sum_qd = 0.0;
    row.min_qt = row.min_qd = 1e300;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (!mesh.triangle_alive(t)) {
            continue;
        }
        const double qt = tri_quality(mesh, t);
        const double qd = dual_quality(mesh, t, params);
        row.min_qt = std::min(row.min_qt, qt);
        row.min_qd = std::min(row.min_qd, qd);
        sum_qt += qt;
        sum_qd += qd;
        ++row.triangles;
        row.bad += is_well_centred(mesh, t) ? 0 : 1;
    }
    if (row.triangles > 0) {
        row.mean_qt = sum_qt / row.triangles;
        row.mean_qd = sum_qd / row.triangles;
    }
    return row;
}

ScheduleResult optimise(TriMesh& mesh, const SpacingField& h, const ScheduleConfig& cfg)
{
    cfg.validate();
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    ScheduleResult result;
    TopoConfig topo = cfg.topo;
    topo.params = cfg.params;
    restore_regularity(mesh);
    result.trace.push_back(trace_row(mesh, 0, cfg.params));

    LocalOptimiser opt(mesh, h, cfg.params, cfg.line_search);
    for (int n = 1; n <= cfg.outer; ++n) {
        int vertex_accepted = 0;
        int weight_accepted = 0;
        for (int m = 1; m <= cfg.inner; ++m) {
            if (cfg.mode != Mode::weights_only) {
                auto s = opt.vertex_sweep(sweep_seed(cfg.seed, n, m, 0));
                vertex_accepted += s.accepted;
                result.vertex_records.insert(result.vertex_records.end(), s.records.begin(),
                                             s.records.end());
            }
            if (cfg.mode != Mode::primal_only) {
                auto s = opt.weight_sweep(sweep_seed(cfg.seed, n, m, 1));
                weight_accepted += s.accepted;
                result.weight_records.insert(result.weight_records.end(), s.records.begin(),
                                             s.records.end());
            }
        }
        int flips = restore_regularity(mesh);
        int collapsed = 0;
        int refined = 0;
        if (cfg.mode != Mode::weights_only) {
            const TopoCounts pruned = prune_edges(mesh, h, topo);
            const TopoCounts grown = refine_edges(mesh, h, topo);
            collapsed = pruned.collapsed;
            refined = grown.refined;
            flips += pruned.flips + grown.flips + restore_regularity(mesh);
        }
        if (flips + collapsed + refined > 0) {
            opt.refresh();
        }

        TraceRow row = trace_row(mesh, n, cfg.params);
        row.vertex_accepted = vertex_accepted;
        row.weight_accepted = weight_accepted;
        row.flips = flips;
        row.collapsed = collapsed;
        row.refined = refined;
        row.seconds = std::chrono::duration<double>(clock::now() - start).count();
        result.trace.push_back(row);
        if (cfg.early_stop && vertex_accepted + weight_accepted + collapsed + refined + flips == 0) {
            break;
        }
    }
    return result;
}

} // namespace pdgrid
