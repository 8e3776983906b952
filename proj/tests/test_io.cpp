#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <doctest.h>

#include "pdgrid/errors.hpp"
#include "pdgrid/experiments.hpp"
#include "pdgrid/io.hpp"
#include "pdgrid/schedule.hpp"
#include "support.hpp"

using namespace pdgrid;
using namespace pdgrid::testing;
using doctest::Approx;

namespace {

std::string to_text(const TriMesh& m)
{
    std::ostringstream out;
    write_mesh(out, m);
    return out.str();
}

// Weighted, optimised mesh with awkward coordinates.
TriMesh sample_mesh()
{
    TriMesh m = box_mesh();
    ScheduleConfig cfg;
    cfg.mode = Mode::weights_only;
    cfg.outer = 2;
    optimise(m, SpacingField::constant(0.16), cfg);
    return m;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "pdgrid-tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

int parse_line_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ParseError& e) {
        std::smatch m;
        const std::string what = e.what();
        if (std::regex_search(what, m, std::regex(":([0-9]+): "))) {
            return std::stoi(m[1]);
        }
        return -2;
    }
    return -1;
}

} // namespace

TEST_CASE("mesh round trip")
{
    const TriMesh m = sample_mesh();
    const std::string text = to_text(m);
    std::istringstream in(text);
    const TriMesh back = read_mesh(in);
    CHECK(to_text(back) == text);
    CHECK(back.vertices() == m.vertices());
    CHECK(back.triangles() == m.triangles());
    CHECK(back.constrained_edges().size() == m.constrained_edges().size());
    CHECK(text.rfind("pdgrid-mesh 1\n", 0) == 0);
}

TEST_CASE("mesh reader diagnostics")
{
    CHECK(parse_line_of([] {
              std::istringstream in("pdgrid-mesh 1\nvertices 1\n0 0 zero 0 0\n");
              read_mesh(in, "m");
          })
          == 3);
    CHECK(parse_line_of([] {
              std::istringstream in("pdgrid-mesh 2\n");
              read_mesh(in, "m");
          })
          == 1);
    CHECK(parse_line_of([] {
              std::istringstream in("pdgrid-mesh 1\n# note\nvertices 3\n0 0 0 0 1\n1 1 0 0 1\n2 0 1 "
                                    "0 1\ntriangles 1\n0 0 1 7\nconstrained 0\n");
              read_mesh(in, "m");
          })
          == 8);
    CHECK_THROWS_AS(load_mesh("/nonexistent/mesh"), ValidationError);
}

TEST_CASE("pslg round trip")
{
    std::ostringstream out;
    write_pslg(out, box_domain());
    std::istringstream in(out.str());
    const Pslg p = read_pslg(in);
    CHECK(p.points == box_domain().points);
    CHECK(p.segments == box_domain().segments);

    std::istringstream open("pdgrid-pslg 1\npoints 3\n0 0\n1 0\n0 1\nsegments 2\n0 1\n1 2\n");
    CHECK_THROWS_AS(read_pslg(open), GeometryError);
}

TEST_CASE("raster round trip and layout")
{
    Raster r(3, 2, {1.5, -2.0}, 0.25);
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 3; ++i) {
            r.at(i, j) = 0.1 * (i + 1) + j + 1.0 / 3.0;
        }
    }
    std::ostringstream out;
    write_raster(out, r);
    std::istringstream in(out.str());
    const Raster back = read_raster(in);
    CHECK(back.ncols == 3);
    CHECK(back.nrows == 2);
    CHECK(back.origin == r.origin);
    CHECK(back.cell == r.cell);
    CHECK(back.values == r.values);

    std::istringstream esri("ncols 2\nnrows 2\nxllcenter 0\nyllcenter 0\ncellsize 1\n"
                            "NODATA_value -9999\n3 4\n1 2\n");
    const Raster e = read_raster(esri);
    CHECK(e.at(0, 0) == 1.0);
    CHECK(e.at(1, 1) == 4.0);

    std::istringstream hole("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n"
                            "NODATA_value -9999\n3 -9999\n1 2\n");
    CHECK(parse_line_of([&] { read_raster(hole, "r"); }) == 7);
}

TEST_CASE("triangle files round trip")
{
    const TriMesh m = sample_mesh();
    const std::string base = scratch("sample").string();
    save_triangle_files(base, m);
    const TriMesh back = load_triangle_files(base);
    CHECK(to_text(back) == to_text(m));
}

TEST_CASE("svg has one cell per vertex")
{
    const TriMesh m = sample_mesh();
    std::ostringstream out;
    write_svg(out, m);
    const std::string svg = out.str();
    const std::regex cell("<polygon class=\"cell\"");
    const auto n = std::distance(std::sregex_iterator(svg.begin(), svg.end(), cell),
                                 std::sregex_iterator());
    CHECK(n == m.vertex_count());
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);

    CHECK(diverging_colour(0.0) == "#ffffff");
    CHECK(diverging_colour(-1.0) == "#2166ac");
    CHECK(diverging_colour(1.0) == "#e66101");
}

TEST_CASE("csv outputs")
{
    TriMesh m = box_mesh();
    ScheduleConfig cfg;
    cfg.outer = 2;
    cfg.mode = Mode::weights_only;
    const auto res = optimise(m, SpacingField::constant(0.16), cfg);
    std::ostringstream trace;
    write_trace_csv(trace, res.trace);
    std::istringstream lines(trace.str());
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 12);
        ++rows;
    }
    CHECK(rows == static_cast<int>(res.trace.size()) + 1);

    const QualityReport q = report(m, SpacingField::constant(0.16));
    std::ostringstream csv;
    write_report_csv(csv, q);
    std::istringstream rl(csv.str());
    rows = 0;
    while (std::getline(rl, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 10);
        ++rows;
    }
    CHECK(rows == 1 + q.triangles + q.edges + q.vertices);

    std::ostringstream sum;
    write_report_summary(sum, q);
    CHECK(sum.str().find("poorly staggered") != std::string::npos);
}

TEST_CASE("run config")
{
    const auto dir = scratch("cfg");
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "d.pslg") << "pdgrid-pslg 1\npoints 3\n0 0\n1 0\n0 1\nsegments 3\n0 1\n1 2\n2 0\n";
    }
    const std::string good = R"({
  "geometry": "d.pslg",
  "spacing": {"kind": "constant", "h": 0.2},
  "schedule": {"outer": 3, "inner": 2, "seed": 9, "mode": "weights-only"},
  "metrics": {"beta_f": 0.25},
  "output": {"mesh": "out.mesh", "trace": "t.csv"}
})";
    const RunConfig c = parse_run_config(good, "c.json", dir.string());
    CHECK(c.geometry == (dir / "d.pslg").string());
    CHECK(c.out_mesh == (dir / "out.mesh").string());
    CHECK(c.schedule.outer == 3);
    CHECK(c.schedule.inner == 2);
    CHECK(c.schedule.seed == 9);
    CHECK(c.schedule.mode == Mode::weights_only);
    CHECK(c.schedule.params.beta_e == Approx(0.75));
    CHECK_NOTHROW(c.validate());

    CHECK(parse_line_of([] { parse_run_config("{\n\"a\": 1,\n oops\n}", "bad.json"); }) == 3);

    RunConfig missing = c;
    missing.geometry = (dir / "absent.pslg").string();
    CHECK_THROWS_AS(missing.validate(), ValidationError);

    CHECK_THROWS_AS(parse_run_config(R"({"spacing": {"kind": "depth", "path": "x"}})", "d.json"),
                    ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"geometry": 3})", "t.json"), ValidationError);
}
