#include "pdgrid/topo_ops.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

#include "pdgrid/errors.hpp"

namespace pdgrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void push_outer_edges(const TriMesh& mesh, EdgeRef diag, std::vector<EdgeRef>& stack)
{
    const int t = diag.tri;
    const int u = mesh.triangle(t).nbr[diag.side];
    stack.push_back({t, next3(diag.side)});
    stack.push_back({t, prev3(diag.side)});
    const int k = mesh.triangle(u).nbr[0] == t ? 0 : mesh.triangle(u).nbr[1] == t ? 1 : 2;
    stack.push_back({u, next3(k)});
    stack.push_back({u, prev3(k)});
}

} // namespace

EdgeRef flip_edge(TriMesh& mesh, EdgeRef e)
{
    if (!mesh.triangle_alive(e.tri) || mesh.triangle(e.tri).nbr[e.side] < 0) {
        throw InvalidFlip("flip_edge: boundary edge");
    }
    if (mesh.is_constrained(e)) {
        throw InvalidFlip("flip_edge: constrained edge");
    }
    if (!flip_is_valid(mesh, e)) {
        throw InvalidFlip("flip_edge: flipped triangles would be inverted");
    }
    return mesh.flip(e);
}

int restore_regularity(TriMesh& mesh, double tolerance)
{
    std::vector<EdgeRef> stack = mesh.edges();
    const long limit = 10L * std::max<long>(static_cast<long>(stack.size()), 1);
    long flips = 0;
    while (!stack.empty()) {
        const EdgeRef e = stack.back();
        stack.pop_back();
        if (!mesh.triangle_alive(e.tri)) {
            continue;
        }
        if (classify_edge(mesh, e, tolerance) != EdgeRegularity::flippable_violation) {
            continue;
        }
        const EdgeRef diag = mesh.flip(e);
        if (++flips > limit) {
            throw NonTermination("restore_regularity: more than " + std::to_string(limit)
                                 + " flips");
        }
        push_outer_edges(mesh, diag, stack);
    }
    return static_cast<int>(flips);
}

int restore_regularity_local(TriMesh& mesh, std::span<const int> seeds, int max_flips,
                             std::vector<int>* touched, double tolerance,
                             std::vector<EdgeRef>* locked)
{
    std::vector<EdgeRef> stack;
    stack.reserve(seeds.size() * 3);
    for (int t : seeds) {
        for (int k = 0; k < 3; ++k) {
            stack.push_back({t, k});
        }
    }
    int flips = 0;
    while (!stack.empty()) {
        const EdgeRef e = stack.back();
        stack.pop_back();
        if (!mesh.triangle_alive(e.tri)) {
            continue;
        }
        const EdgeRegularity c = classify_edge(mesh, e, tolerance);
        if (c == EdgeRegularity::locked_violation && locked) {
            locked->push_back(e);
        }
        if (c != EdgeRegularity::flippable_violation) {
            continue;
        }
        if (++flips > max_flips) {
            return -1;
        }
        const EdgeRef diag = mesh.flip(e);
        if (touched) {
            touched->push_back(diag.tri);
            touched->push_back(mesh.triangle(diag.tri).nbr[diag.side]);
        }
        push_outer_edges(mesh, diag, stack);
    }
    return flips;
}

int count_locked_violations(const TriMesh& mesh, double tolerance)
{
    int n = 0;
    for (const EdgeRef e : mesh.edges()) {
        n += classify_edge(mesh, e, tolerance) == EdgeRegularity::locked_violation ? 1 : 0;
    }
    return n;
}

namespace {

// Boundary loop of a triangle set. Fails unless it is one simple loop.
bool extract_loop(const TriMesh& mesh, const std::vector<int>& cavity, CavitySim& sim)
{
    struct Half {
        int a, b, outer, inner;
    };
    std::vector<Half> half;
    auto in_cavity = [&](int t) {
        return std::find(cavity.begin(), cavity.end(), t) != cavity.end();
    };
    for (int t : cavity) {
        const auto& tri = mesh.triangle(t);
        for (int k = 0; k < 3; ++k) {
            if (tri.nbr[k] < 0 || !in_cavity(tri.nbr[k])) {
                half.push_back({tri.v[next3(k)], tri.v[prev3(k)], tri.nbr[k], t});
            }
        }
    }
    if (half.size() < 3) {
        return false;
    }
    std::unordered_map<int, int> from;
    for (int n = 0; n < static_cast<int>(half.size()); ++n) {
        if (!from.emplace(half[n].a, n).second) {
            return false;
        }
    }
    sim.loop.clear();
    sim.outer.clear();
    sim.inner.clear();
    int n = 0;
    for (std::size_t step = 0; step < half.size(); ++step) {
        sim.loop.push_back(half[n].a);
        sim.outer.push_back(half[n].outer);
        sim.inner.push_back(half[n].inner);
        auto it = from.find(half[n].b);
        if (it == from.end()) {
            return false;
        }
        n = it->second;
        if (n == 0 && step + 1 != half.size()) {
            return false;
        }
    }
    if (n != 0) {
        return false;
    }
    sim.removed.clear();
    for (int t : cavity) {
        for (int v : mesh.triangle(t).v) {
            if (std::find(sim.loop.begin(), sim.loop.end(), v) == sim.loop.end()
                && std::find(sim.removed.begin(), sim.removed.end(), v) == sim.removed.end()) {
                sim.removed.push_back(v);
            }
        }
    }
    return true;
}

double fan_quality(const TriMesh& mesh, const CavitySim& sim)
{
    double q = kInf;
    const std::size_t n = sim.loop.size();
    for (std::size_t k = 0; k < n; ++k) {
        q = std::min(q, tri_quality(sim.apex, mesh.pos(sim.loop[k]),
                                    mesh.pos(sim.loop[(k + 1) % n])));
    }
    return q;
}

double min_quality(const TriMesh& mesh, const std::vector<int>& tris)
{
    double q = kInf;
    for (int t : tris) {
        q = std::min(q, tri_quality(mesh, t));
    }
    return q;
}

struct Floors {
    double qt = -kInf;
    double qd = -kInf;
    bool strict = true; // require Q^T improvement over the touched triangles
    double improvement = kTopoImprovement;
    const SpacingField* h = nullptr;
    double collapse_below = 0.0;
    double refine_above = kInf;
    bool collapse = false;
};

struct TxnEval {
    double qt_before = kInf;
    double qd_before = kInf;
    double qt_after = kInf;
    double qd_after = kInf;
    bool locked = false;
};

TxnEval evaluate_transaction(const TriMesh& mesh, const DualQualityParams& params)
{
    TxnEval ev;
    std::vector<int> now;
    for (const auto& [slot, tri] : mesh.original_triangles()) {
        if (tri.alive()) {
            const WeightedVertex& a = mesh.vertex(tri.v[0]);
            const WeightedVertex& b = mesh.vertex(tri.v[1]);
            const WeightedVertex& c = mesh.vertex(tri.v[2]);
            ev.qt_before = std::min(ev.qt_before, tri_quality(a.pos, b.pos, c.pos));
            ev.qd_before = std::min(ev.qd_before, dual_quality(a, b, c, params));
        }
        if (mesh.triangle_alive(slot)) {
            now.push_back(slot);
        }
    }
    for (int t : mesh.appended_triangles()) {
        if (mesh.triangle_alive(t)) {
            now.push_back(t);
        }
    }
    for (int t : now) {
        const auto g = mesh.generators(t);
        ev.qt_after = std::min(ev.qt_after, tri_quality(g[0].pos, g[1].pos, g[2].pos));
        ev.qd_after = std::min(ev.qd_after, dual_quality(g[0], g[1], g[2], params));
        for (int k = 0; k < 3 && !ev.locked; ++k) {
            ev.locked = classify_edge(mesh, {t, k}) == EdgeRegularity::locked_violation;
        }
    }
    return ev;
}

bool spacing_band_ok(const TriMesh& mesh, int v, const Floors& fl)
{
    if (!fl.h) {
        return true;
    }
    for (int t : star(mesh, v)) {
        const auto& tri = mesh.triangle(t);
        const int k = tri.local_index(v);
        for (int other : {tri.v[next3(k)], tri.v[prev3(k)]}) {
            const Point2 a = mesh.pos(v);
            const Point2 b = mesh.pos(other);
            const double hr = distance(a, b) / (*fl.h)(midpoint(a, b));
            if (fl.collapse ? hr > fl.refine_above : hr < fl.collapse_below) {
                return false;
            }
        }
    }
    return true;
}

// Replaces the cavity by the fan, restores regularity locally and keeps the
// result only if it passes the floors.
bool apply_cavity(TriMesh& mesh, const CavitySim& sim, const DualQualityParams& params,
                  const Floors& fl)
{
    mesh.begin();
    for (int t : sim.before) {
        mesh.kill_triangle(t);
    }
    for (int v : sim.removed) {
        mesh.kill_vertex(v);
    }
    const int apex = mesh.add_vertex({sim.apex, sim.apex_weight, false});
    const int n = static_cast<int>(sim.loop.size());
    const int first = mesh.triangle_slots();
    std::vector<int> fan;
    for (int k = 0; k < n; ++k) {
        Triangle tri;
        tri.v = {apex, sim.loop[k], sim.loop[(k + 1) % n]};
        tri.nbr = {sim.outer[k], first + (k + 1) % n, first + (k + n - 1) % n};
        fan.push_back(mesh.add_triangle(tri));
    }
    for (int k = 0; k < n; ++k) {
        mesh.relink(sim.outer[k], sim.inner[k], fan[k]);
        mesh.set_incident(sim.loop[k], fan[k]);
    }
    mesh.set_incident(apex, fan[0]);

    std::vector<int> touched;
    if (restore_regularity_local(mesh, fan, 64 + 8 * n, &touched) < 0) {
        mesh.rollback();
        return false;
    }
    const TxnEval ev = evaluate_transaction(mesh, params);
    bool ok = !ev.locked && ev.qt_after > 0.0 && ev.qt_after >= fl.qt && ev.qd_after >= fl.qd;
    if (ok && fl.strict) {
        ok = ev.qt_after >= ev.qt_before + fl.improvement;
    }
    ok = ok && mesh.vertex_alive(apex) && spacing_band_ok(mesh, apex, fl);
    if (ok) {
        mesh.commit();
    } else {
        mesh.rollback();
    }
    return ok;
}

std::vector<int> adjacent_cavity(const TriMesh& mesh, EdgeRef e)
{
    std::vector<int> c{e.tri};
    const int n = mesh.triangle(e.tri).nbr[e.side];
    if (n >= 0) {
        c.push_back(n);
    }
    return c;
}

} // namespace

CavitySim simulate_collapse(const TriMesh& mesh, EdgeRef e)
{
    CavitySim sim;
    const auto [a, b] = mesh.edge_vertices(e);
    if (mesh.is_constrained(a, b) || mesh.vertex(a).fixed || mesh.vertex(b).fixed) {
        return sim;
    }
    sim.before = star(mesh, a);
    for (int t : star(mesh, b)) {
        if (std::find(sim.before.begin(), sim.before.end(), t) == sim.before.end()) {
            sim.before.push_back(t);
        }
    }
    if (!extract_loop(mesh, sim.before, sim) || sim.removed.size() != 2) {
        return sim;
    }
    Point2 sum;
    for (int t : sim.before) {
        const auto g = mesh.generators(t);
        const auto o = try_face_orthocentre(g[0], g[1], g[2]);
        if (!o) {
            return sim;
        }
        sum = sum + *o;
    }
    sim.apex = (1.0 / static_cast<double>(sim.before.size())) * sum;
    sim.apex_weight = 0.5 * (mesh.vertex(a).weight + mesh.vertex(b).weight);
    sim.min_before = min_quality(mesh, sim.before);
    sim.min_after = fan_quality(mesh, sim);
    sim.valid = sim.min_after > 0.0;
    return sim;
}

CavitySim simulate_refine(const TriMesh& mesh, EdgeRef e, const TopoConfig& cfg)
{
    CavitySim sim;
    std::vector<int> cavity = adjacent_cavity(mesh, e);
    int worst = cavity[0];
    if (cavity.size() == 2 && tri_quality(mesh, cavity[1]) < tri_quality(mesh, cavity[0])) {
        worst = cavity[1];
    }
    const auto g = mesh.generators(worst);
    const auto o = try_face_orthocentre(g[0], g[1], g[2]);
    if (!o) {
        return sim;
    }
    sim.apex = *o;
    sim.apex_weight = 0.0;

    auto score = [&](const std::vector<int>& c, CavitySim& out) {
        if (!extract_loop(mesh, c, out) || !out.removed.empty()) {
            return -kInf;
        }
        return fan_quality(mesh, out);
    };
    double best = score(cavity, sim);
    std::vector<int> frontier = cavity;
    for (int depth = 0; depth < cfg.max_cavity_depth && !frontier.empty(); ++depth) {
        std::vector<int> next;
        for (int t : frontier) {
            const auto& tri = mesh.triangle(t);
            for (int k = 0; k < 3; ++k) {
                const int nb = tri.nbr[k];
                if (nb < 0 || mesh.is_constrained(EdgeRef{t, k})
                    || std::find(cavity.begin(), cavity.end(), nb) != cavity.end()) {
                    continue;
                }
                cavity.push_back(nb);
                CavitySim trial = sim;
                const double q = score(cavity, trial);
                if (q > best) {
                    best = q;
                    next.push_back(nb);
                } else {
                    cavity.pop_back();
                }
            }
        }
        frontier = std::move(next);
    }
    if (!extract_loop(mesh, cavity, sim) || !sim.removed.empty()) {
        return sim;
    }
    sim.before = cavity;
    sim.min_before = min_quality(mesh, cavity);
    sim.min_after = fan_quality(mesh, sim);
    sim.valid = sim.min_after > 0.0;
    return sim;
}

namespace {

double cavity_min_qd(const TriMesh& mesh, const std::vector<int>& tris,
                     const DualQualityParams& params)
{
    double q = kInf;
    for (int t : tris) {
        q = std::min(q, dual_quality(mesh, t, params));
    }
    return q;
}

} // namespace

bool collapse_edge(TriMesh& mesh, EdgeRef e, const TopoConfig& cfg)
{
    const CavitySim sim = simulate_collapse(mesh, e);
    if (!sim.valid || sim.min_after < sim.min_before + cfg.improvement) {
        return false;
    }
    Floors fl;
    fl.improvement = cfg.improvement;
    fl.qd = cavity_min_qd(mesh, sim.before, cfg.params);
    return apply_cavity(mesh, sim, cfg.params, fl);
}

bool refine_edge(TriMesh& mesh, EdgeRef e, const TopoConfig& cfg)
{
    const CavitySim sim = simulate_refine(mesh, e, cfg);
    if (!sim.valid || sim.min_after < sim.min_before + cfg.improvement) {
        return false;
    }
    Floors fl;
    fl.improvement = cfg.improvement;
    fl.qd = cavity_min_qd(mesh, sim.before, cfg.params);
    return apply_cavity(mesh, sim, cfg.params, fl);
}

namespace {

double global_min_qt(const TriMesh& mesh)
{
    double q = kInf;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (mesh.triangle_alive(t)) {
            q = std::min(q, tri_quality(mesh, t));
        }
    }
    return q;
}

double global_min_qd(const TriMesh& mesh, const DualQualityParams& params)
{
    double q = kInf;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (mesh.triangle_alive(t)) {
            q = std::min(q, dual_quality(mesh, t, params));
        }
    }
    return q;
}

template <class Simulate>
TopoCounts edge_pass(TriMesh& mesh, const SpacingField& h, const TopoConfig& cfg, bool collapse,
                     Simulate simulate)
{
    TopoCounts counts;
    const double qt_floor = global_min_qt(mesh);
    const double qd_floor = global_min_qd(mesh, cfg.params);
    std::vector<std::pair<int, int>> pairs;
    for (const EdgeRef e : mesh.edges()) {
        pairs.push_back(mesh.edge_vertices(e));
    }
    for (const auto& [a, b] : pairs) {
        if (!mesh.vertex_alive(a) || !mesh.vertex_alive(b)) {
            continue;
        }
        const auto e = mesh.find_edge(a, b);
        if (!e) {
            continue;
        }
        const double hr = relative_length(mesh, h, *e);
        const bool trigger = cfg.spacing_triggers
            && (collapse ? hr < cfg.collapse_below : hr > cfg.refine_above);
        const CavitySim sim = simulate(*e);
        if (!sim.valid) {
            continue;
        }
        const bool improves = sim.min_after >= sim.min_before + cfg.improvement;
        if (!improves && !(trigger && sim.min_after >= qt_floor)) {
            continue;
        }
        ++counts.attempted;
        Floors fl;
        fl.qt = qt_floor;
        fl.qd = qd_floor;
        fl.strict = !trigger;
        fl.improvement = cfg.improvement;
        fl.h = &h;
        fl.collapse_below = cfg.collapse_below;
        fl.refine_above = cfg.refine_above;
        fl.collapse = collapse;
        if (apply_cavity(mesh, sim, cfg.params, fl)) {
            ++(collapse ? counts.collapsed : counts.refined);
        }
    }
    counts.flips = restore_regularity(mesh);
    mesh.compact();
    return counts;
}

} // namespace

TopoCounts prune_edges(TriMesh& mesh, const SpacingField& h, const TopoConfig& cfg)
{
    return edge_pass(mesh, h, cfg, true,
                     [&](EdgeRef e) { return simulate_collapse(mesh, e); });
}

TopoCounts refine_edges(TriMesh& mesh, const SpacingField& h, const TopoConfig& cfg)
{
    return edge_pass(mesh, h, cfg, false,
                     [&](EdgeRef e) { return simulate_refine(mesh, e, cfg); });
}

} // namespace pdgrid
