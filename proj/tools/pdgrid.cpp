#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pdgrid/errors.hpp"
#include "pdgrid/experiments.hpp"
#include "pdgrid/init_mesh.hpp"
#include "pdgrid/io.hpp"
#include "pdgrid/metrics.hpp"
#include "pdgrid/schedule.hpp"
#include "pdgrid/spacing.hpp"

using namespace pdgrid;

namespace {

struct SpacingArgs {
    std::optional<double> h;
    std::string raster;
    std::string depth;
    std::optional<double> beta;
    double g_accel = DepthParams{}.g_accel;
    double h_min = 0.0;
    double h_max = 0.0;
    std::optional<double> g;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--h", h, "Constant target edge length")->check(CLI::PositiveNumber);
        cmd->add_option("--spacing", raster, "Raster of target edge lengths")
            ->check(CLI::ExistingFile);
        cmd->add_option("--depth", depth, "Raster of depths for a wave-speed spacing")
            ->check(CLI::ExistingFile);
        cmd->add_option("--beta", beta, "Time-like resolution scale for --depth (required)");
        cmd->add_option("--g-accel", g_accel, "Gravitational acceleration for --depth");
        cmd->add_option("--h-min", h_min, "Lower clamp for --depth");
        cmd->add_option("--h-max", h_max, "Upper clamp for --depth");
        cmd->add_option("--g", g, "Gradient-limit the raster spacing with this slope")
            ->check(CLI::PositiveNumber);
    }

    bool given() const { return h || !raster.empty() || !depth.empty(); }

    SpacingConfig config() const
    {
        const int n = (h ? 1 : 0) + (raster.empty() ? 0 : 1) + (depth.empty() ? 0 : 1);
        if (n != 1) {
            throw ValidationError("give exactly one of --h, --spacing, --depth");
        }
        SpacingConfig c;
        c.limit_g = g;
        if (h) {
            c.kind = "constant";
            c.h = *h;
        } else if (!raster.empty()) {
            c.kind = "raster";
            c.path = raster;
        } else {
            if (!beta) {
                throw ValidationError("--depth requires --beta");
            }
            c.kind = "depth";
            c.path = depth;
            c.depth = {*beta, g_accel, h_min, h_max};
            if (!(c.depth.h_min > 0.0) || !(c.depth.h_max >= c.depth.h_min)) {
                throw ValidationError("--depth requires 0 < --h-min <= --h-max");
            }
        }
        return c;
    }
};

struct ScheduleArgs {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<int> outer;
    std::optional<int> inner;
    std::optional<double> beta_f;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--mode", mode, "coupled | primal-only | weights-only");
        cmd->add_option("--outer", outer, "Outer iterations N");
        cmd->add_option("--inner", inner, "Inner sweeps M per outer iteration");
        cmd->add_option("--beta-f", beta_f, "Face weight of Q^D (edge weight is 1 - beta_f)");
    }

    void apply(ScheduleConfig& s) const
    {
        if (seed) {
            s.seed = *seed;
        }
        if (mode) {
            s.mode = parse_mode(*mode);
        }
        if (outer) {
            s.outer = *outer;
        }
        if (inner) {
            s.inner = *inner;
        }
        if (beta_f) {
            s.params.beta_f = *beta_f;
            s.params.beta_e = 1.0 - *beta_f;
        }
        s.validate();
    }
};

template <class F>
void write_file(const std::string& path, F&& body)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    body(out);
    out.flush();
    if (!out) {
        throw Error("write to '" + path + "' failed");
    }
}

double mean_edge_length(const TriMesh& mesh)
{
    double sum = 0.0;
    int n = 0;
    for (const EdgeRef e : mesh.edges()) {
        const auto [a, b] = mesh.edge_vertices(e);
        sum += distance(mesh.pos(a), mesh.pos(b));
        ++n;
    }
    return n > 0 ? sum / n : 1.0;
}

bool is_triangle_base(const std::string& path)
{
    return std::filesystem::path(path).extension() != ".mesh";
}

std::string triangle_base(const std::string& path)
{
    const std::filesystem::path p(path);
    const auto ext = p.extension();
    if (ext == ".node" || ext == ".ele" || ext == ".edge") {
        return (p.parent_path() / p.stem()).string();
    }
    return path;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Weighted primal-dual grid generation and optimisation"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    std::uint64_t seed = 0;

    // init
    auto* init = app.add_subcommand("init", "Build an initial conforming Delaunay mesh");
    std::string init_config, init_geometry, init_example, init_out;
    double init_angle = InitOptions{}.min_angle;
    double example_hmin = 0.02;
    SpacingArgs init_spacing;
    init->add_option("--config", init_config, "JSON run config (geometry, spacing, output.mesh)")
        ->check(CLI::ExistingFile);
    init->add_option("--geometry", init_geometry, "PSLG file")->check(CLI::ExistingFile);
    init->add_option("--example", init_example, "Built-in setup: box | l-domain")
        ->check(CLI::IsMember({"box", "l-domain"}));
    init->add_option("--example-hmin", example_hmin, "Finest spacing of the l-domain example")
        ->check(CLI::PositiveNumber);
    init->add_option("--min-angle", init_angle, "Refinement angle bound in degrees");
    init->add_option("--seed", seed, "Random seed");
    init->add_option("-o,--out", init_out, "Output mesh");
    init_spacing.add(init);

    // optimise
    auto* opt = app.add_subcommand("optimise", "Optimise positions, weights and topology");
    std::string opt_config, opt_mesh, opt_out, opt_trace, opt_report, opt_svg;
    SpacingArgs opt_spacing;
    ScheduleArgs opt_sched;
    opt->add_option("--config", opt_config, "JSON run config")->check(CLI::ExistingFile);
    opt->add_option("--mesh", opt_mesh, "Input mesh")->check(CLI::ExistingFile);
    opt->add_option("-o,--out", opt_out, "Output mesh");
    opt->add_option("--trace", opt_trace, "Trace CSV");
    opt->add_option("--report", opt_report, "Final quality report CSV");
    opt->add_option("--svg", opt_svg, "Final rendering");
    opt->add_option("--seed", opt_sched.seed, "Random seed");
    opt_spacing.add(opt);
    opt_sched.add(opt);

    // report
    auto* rep = app.add_subcommand("report", "Quality report: CSV plus summary table");
    std::string rep_mesh, rep_csv;
    std::optional<double> rep_beta_f;
    SpacingArgs rep_spacing;
    rep->add_option("--mesh", rep_mesh, "Input mesh")->required()->check(CLI::ExistingFile);
    rep->add_option("--csv", rep_csv, "Per-element CSV output");
    rep->add_option("--beta-f", rep_beta_f, "Face weight of Q^D");
    rep->add_option("--seed", seed, "Random seed (unused; accepted for uniformity)");
    rep_spacing.add(rep);

    // render
    auto* ren = app.add_subcommand("render", "SVG of the primal-dual pair");
    std::string ren_mesh, ren_out;
    SvgOptions svg;
    bool no_primal = false, no_dual = false;
    ren->add_option("--mesh", ren_mesh, "Input mesh")->required()->check(CLI::ExistingFile);
    ren->add_option("-o,--out", ren_out, "Output SVG")->required();
    ren->add_option("--width", svg.width, "Width in pixels")->check(CLI::PositiveNumber);
    ren->add_flag("--no-primal", no_primal, "Omit primal edges");
    ren->add_flag("--no-dual", no_dual, "Omit dual edges");
    ren->add_option("--seed", seed, "Random seed (unused; accepted for uniformity)");

    // limit-spacing
    auto* lim = app.add_subcommand("limit-spacing", "Gradient-limit a spacing raster");
    std::string lim_in, lim_out;
    double lim_g = LimiterConfig{}.g;
    lim->add_option("--in", lim_in, "Input raster")->required()->check(CLI::ExistingFile);
    lim->add_option("--out", lim_out, "Output raster")->required();
    lim->add_option("--g", lim_g, "Maximum slope |grad h|")->check(CLI::PositiveNumber);
    lim->add_option("--seed", seed, "Random seed (unused; accepted for uniformity)");

    // convert
    auto* conv = app.add_subcommand("convert", "Convert between .mesh and .node/.ele/.edge");
    std::string conv_in, conv_out;
    conv->add_option("input", conv_in, "Input (.mesh or Triangle base/.node)")->required();
    conv->add_option("output", conv_out, "Output (.mesh or Triangle base/.node)")->required();
    conv->add_option("--seed", seed, "Random seed (unused; accepted for uniformity)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (init->parsed()) {
            Pslg pslg;
            SpacingField h;
            std::string out = init_out;
            InitOptions io;
            io.min_angle = init_angle;
            if (!init_example.empty()) {
                if (init_example == "box") {
                    pslg = box_domain();
                    h = SpacingField::constant(0.16);
                    io.min_angle = 30.0;
                    io.off_centre = false;
                } else {
                    pslg = l_domain();
                    h = graded_spacing(example_hmin);
                }
            } else if (!init_config.empty()) {
                const RunConfig cfg = load_run_config(init_config);
                if (cfg.geometry.empty()) {
                    throw ValidationError(init_config + ": 'geometry' is required for init");
                }
                pslg = load_pslg(cfg.geometry);
                h = make_spacing(cfg.spacing);
                if (out.empty()) {
                    out = cfg.out_mesh;
                }
            } else {
                if (init_geometry.empty()) {
                    throw ValidationError("init needs --geometry, --config or --example");
                }
                pslg = load_pslg(init_geometry);
                h = make_spacing(init_spacing.config());
            }
            if (out.empty()) {
                throw ValidationError("init needs an output path (-o)");
            }
            const TriMesh mesh = init_mesh(pslg, h, seed, io);
            save_mesh(out, mesh);
            std::printf("wrote %s: %d vertices, %d triangles\n", out.c_str(), mesh.vertex_count(),
                        mesh.triangle_count());
        } else if (opt->parsed()) {
            RunConfig cfg;
            if (!opt_config.empty()) {
                cfg = load_run_config(opt_config);
            }
            if (!opt_mesh.empty()) {
                cfg.mesh = opt_mesh;
            }
            if (opt_spacing.given()) {
                cfg.spacing = opt_spacing.config();
            } else if (opt_config.empty()) {
                throw ValidationError("optimise needs --config or a spacing (--h, --spacing, --depth)");
            }
            if (!opt_out.empty()) {
                cfg.out_mesh = opt_out;
            }
            if (!opt_trace.empty()) {
                cfg.out_trace = opt_trace;
            }
            if (!opt_report.empty()) {
                cfg.out_report = opt_report;
            }
            if (!opt_svg.empty()) {
                cfg.out_svg = opt_svg;
            }
            opt_sched.apply(cfg.schedule);
            cfg.validate();
            const SpacingField h = make_spacing(cfg.spacing);
            TriMesh mesh = cfg.mesh.empty() ? init_mesh(load_pslg(cfg.geometry), h, cfg.schedule.seed)
                                            : load_mesh(cfg.mesh);
            const ScheduleResult res = optimise(mesh, h, cfg.schedule);
            mesh.compact();
            save_mesh(cfg.out_mesh, mesh);
            if (!cfg.out_trace.empty()) {
                write_file(cfg.out_trace, [&](std::ostream& o) { write_trace_csv(o, res.trace); });
            }
            const QualityReport q = report(mesh, h, cfg.schedule.params);
            if (!cfg.out_report.empty()) {
                write_file(cfg.out_report, [&](std::ostream& o) { write_report_csv(o, q); });
            }
            if (!cfg.out_svg.empty()) {
                write_file(cfg.out_svg, [&](std::ostream& o) { write_svg(o, mesh); });
            }
            write_report_summary(std::cout, q);
        } else if (rep->parsed()) {
            const TriMesh mesh = load_mesh(rep_mesh);
            DualQualityParams params;
            if (rep_beta_f) {
                params.beta_f = *rep_beta_f;
                params.beta_e = 1.0 - *rep_beta_f;
            }
            params.validate();
            const SpacingField h = rep_spacing.given()
                ? make_spacing(rep_spacing.config())
                : SpacingField::constant(mean_edge_length(mesh));
            const QualityReport q = report(mesh, h, params);
            if (!rep_csv.empty()) {
                write_file(rep_csv, [&](std::ostream& o) { write_report_csv(o, q); });
            }
            write_report_summary(std::cout, q);
        } else if (ren->parsed()) {
            const TriMesh mesh = load_mesh(ren_mesh);
            svg.primal = !no_primal;
            svg.dual = !no_dual;
            write_file(ren_out, [&](std::ostream& o) { write_svg(o, mesh, svg); });
        } else if (lim->parsed()) {
            LimiterConfig cfg;
            cfg.g = lim_g;
            LimiterStats stats;
            const Raster out = gradient_limit(load_raster(lim_in), cfg, &stats);
            save_raster(lim_out, out);
            std::printf("limited in %d iterations, residual violation %.3g\n", stats.iterations,
                        stats.max_violation);
        } else if (conv->parsed()) {
            const TriMesh mesh = is_triangle_base(conv_in) ? load_triangle_files(triangle_base(conv_in))
                                                          : load_mesh(conv_in);
            if (is_triangle_base(conv_out)) {
                save_triangle_files(triangle_base(conv_out), mesh);
            } else {
                save_mesh(conv_out, mesh);
            }
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
