#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdgrid/init_mesh.hpp"
#include "pdgrid/metrics.hpp"
#include "pdgrid/schedule.hpp"
#include "pdgrid/spacing.hpp"
#include "pdgrid/trimesh.hpp"

namespace pdgrid {

inline constexpr int kMeshFormatVersion = 1;

// Mesh document:
//
//   pdgrid-mesh 1
//   vertices N
//   <id> <x> <y> <weight> <fixed 0|1>     (N rows, ids 0..N-1)
//   triangles M
//   <id> <i> <j> <k>                      (M rows, counter-clockwise)
//   constrained K
//   <i> <j>                               (K rows)
//
// Blank lines and '#' comments are ignored on input. Numbers are written
// with 17 significant digits. Dead slots are dropped and live ones
// renumbered in slot order.
void write_mesh(std::ostream& out, const TriMesh& mesh);
TriMesh read_mesh(std::istream& in, const std::string& name = "<stream>");
void save_mesh(const std::string& path, const TriMesh& mesh);
TriMesh load_mesh(const std::string& path);

// Planar straight-line graph:
//
//   pdgrid-pslg 1
//   points N
//   <x> <y>
//   segments M
//   <i> <j>
Pslg read_pslg(std::istream& in, const std::string& name = "<stream>");
Pslg load_pslg(const std::string& path);
void write_pslg(std::ostream& out, const Pslg& pslg);
void save_pslg(const std::string& path, const Pslg& pslg);

// ESRI-ASCII-like raster. Header keys ncols, nrows, xllcorner (or
// xllcenter), yllcorner (or yllcenter), cellsize and an optional
// NODATA_value, then nrows lines of ncols values, northernmost row first.
// The lower-left coordinate is the position of node (0, 0). NODATA cells
// are rejected.
Raster read_raster(std::istream& in, const std::string& name = "<stream>");
Raster load_raster(const std::string& path);
void write_raster(std::ostream& out, const Raster& r);
void save_raster(const std::string& path, const Raster& r);

// Triangle-style split files <base>.node, <base>.ele and <base>.edge. Node
// attributes carry the weight and the boundary marker the fixed flag; the
// .edge file lists constrained edges. Either 0- or 1-based numbering is read.
void save_triangle_files(const std::string& base, const TriMesh& mesh);
TriMesh load_triangle_files(const std::string& base);

// Optimisation trace: one row per outer iteration.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

// Per-element rows tagged by kind (triangle, edge, vertex); columns that do
// not apply to a kind are left empty.
void write_report_csv(std::ostream& out, const QualityReport& rep);
// Fixed-width summary in the layout of a results table.
void write_report_summary(std::ostream& out, const QualityReport& rep);

struct SvgOptions {
    double width = 1000.0; // pixels
    bool primal = true;
    bool dual = true;
};

// Dual cells filled by relative power on a diverging ramp (blue negative,
// orange positive, white near zero), primal and dual edges, poorly
// staggered triangles outlined in red. One <polygon class="cell"> per cell.
void write_svg(std::ostream& out, const TriMesh& mesh, const SvgOptions& opt = {});

// Diverging ramp: t in [-1, 1] to "#rrggbb".
std::string diverging_colour(double t);

struct SpacingConfig {
    std::string kind = "constant"; // constant | raster | depth
    double h = 0.0;
    std::string path;              // raster of h, or of depth
    std::optional<double> limit_g; // gradient-limit a raster field
    DepthParams depth;
};

// JSON run configuration; relative paths resolve against the config file.
struct RunConfig {
    std::string geometry; // PSLG, used when no input mesh is given
    std::string mesh;     // optional starting mesh
    SpacingConfig spacing;
    ScheduleConfig schedule;
    std::string out_mesh;
    std::string out_trace;
    std::string out_report;
    std::string out_svg;

    // Throws ValidationError on missing inputs or inconsistent values.
    void validate() const;
};

RunConfig parse_run_config(const std::string& json_text, const std::string& name,
                           const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);

SpacingField make_spacing(const SpacingConfig& cfg);

} // namespace pdgrid
