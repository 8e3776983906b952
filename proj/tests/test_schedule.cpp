#include <doctest.h>

#include "pdgrid/errors.hpp"
#include "pdgrid/experiments.hpp"
#include "pdgrid/schedule.hpp"
#include "support.hpp"

using namespace pdgrid;
using namespace pdgrid::testing;

TEST_CASE("modes and config")
{
    CHECK(parse_mode("coupled") == Mode::coupled);
    CHECK(parse_mode("primal-only") == Mode::primal_only);
    CHECK(parse_mode("primal_only") == Mode::primal_only);
    CHECK(parse_mode("weights-only") == Mode::weights_only);
    CHECK(to_string(Mode::weights_only) == "weights_only");
    CHECK_THROWS_AS(parse_mode("dual"), ValidationError);

    ScheduleConfig cfg;
    CHECK(cfg.outer == 16);
    CHECK(cfg.inner == 8);
    CHECK(cfg.line_search.max_bisections == 5);
    cfg.outer = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("optimal lattice stops early")
{
    TriMesh m = lattice(8, 8, 1.0);
    const auto before = m.vertices();
    const ScheduleResult r = optimise(m, SpacingField::constant(1.0));
    CHECK(r.trace.size() == 2);
    CHECK(r.trace.back().vertex_accepted == 0);
    CHECK(r.trace.back().weight_accepted == 0);
    CHECK(m.vertices() == before);
}

TEST_CASE("box analog, weights only")
{
    TriMesh m = box_mesh();
    const int v = m.vertex_count();
    const auto tris = m.triangle_count();
    ScheduleConfig cfg;
    cfg.mode = Mode::weights_only;
    const ScheduleResult r = optimise(m, SpacingField::constant(0.16), cfg);
    CHECK(r.trace.front().bad > 0);
    CHECK(r.trace.back().bad == 0);
    CHECK(m.vertex_count() == v);
    CHECK(m.triangle_count() == tris);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        CHECK(r.trace[k].min_qd >= r.trace[k - 1].min_qd);
        CHECK(r.trace[k].collapsed == 0);
        CHECK(r.trace[k].refined == 0);
        CHECK(r.trace[k].vertex_accepted == 0);
    }
}

TEST_CASE("primal only keeps weights at zero")
{
    TriMesh m = lattice(10, 10, 1.0, 0.25, 8);
    restore_regularity(m);
    ScheduleConfig cfg;
    cfg.mode = Mode::primal_only;
    cfg.outer = 4;
    const ScheduleResult r = optimise(m, SpacingField::constant(1.0), cfg);
    for (const auto& v : m.vertices()) {
        CHECK(v.weight == 0.0);
    }
    CHECK(delaunay_violations(m) == 0);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        CHECK(r.trace[k].min_qt >= r.trace[k - 1].min_qt);
        CHECK(r.trace[k].weight_accepted == 0);
    }
}

TEST_CASE("coupled dominates primal only on dual quality")
{
    const auto h = SpacingField::constant(0.1);
    TriMesh a = init_mesh(unit_square(), h);
    TriMesh b = a;
    ScheduleConfig cfg;
    cfg.outer = 6;
    cfg.mode = Mode::coupled;
    const auto ra = optimise(a, h, cfg);
    cfg.mode = Mode::primal_only;
    const auto rb = optimise(b, h, cfg);
    CHECK(ra.trace.back().min_qd > rb.trace.back().min_qd);
    CHECK(ra.trace.back().bad <= rb.trace.back().bad);
    CHECK(check_mesh(a).empty());
}

TEST_CASE("determinism")
{
    const auto h = SpacingField::constant(0.08);
    TriMesh a = init_mesh(unit_square(), h, 3);
    TriMesh b = init_mesh(unit_square(), h, 3);
    ScheduleConfig cfg;
    cfg.outer = 3;
    cfg.seed = 17;
    optimise(a, h, cfg);
    optimise(b, h, cfg);
    CHECK(a.triangles() == b.triangles());
    CHECK(a.vertices() == b.vertices());
}
