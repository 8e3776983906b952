#include "pdgrid/local_updates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "pdgrid/errors.hpp"
#include "pdgrid/tessellation.hpp"
#include "pdgrid/topo_ops.hpp"

namespace pdgrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQtScale = 4.0 * std::numbers::sqrt3 / 3.0;
constexpr double kMinQuality = 1e-10;
constexpr int kLocalFlipLimit = 64;

double mean_edge_length(Point2 a, Point2 b, Point2 c)
{
    return (distance(a, b) + distance(b, c) + distance(c, a)) / 3.0;
}

// Mean length of the edges incident to i.
double incident_length(const TriMesh& mesh, const std::vector<int>& fan, int i)
{
    double sum = 0.0;
    int n = 0;
    for (int t : fan) {
        const auto& tri = mesh.triangle(t);
        const int k = tri.local_index(i);
        sum += distance(mesh.pos(i), mesh.pos(tri.v[next3(k)]));
        sum += distance(mesh.pos(i), mesh.pos(tri.v[prev3(k)]));
        n += 2;
    }
    return n > 0 ? sum / n : 0.0;
}

std::array<WeightedVertex, 3> rotated(const TriMesh& mesh, int t, int i, int& k)
{
    const auto& tri = mesh.triangle(t);
    k = tri.local_index(i);
    return {mesh.vertex(tri.v[k]), mesh.vertex(tri.v[next3(k)]), mesh.vertex(tri.v[prev3(k)])};
}

double fd_weight_derivative(std::array<WeightedVertex, 3> g, int k, double step,
                            const DualQualityParams& params)
{
    const double w = g[k].weight;
    g[k].weight = w + step;
    const double qp = dual_quality(g[0], g[1], g[2], params);
    g[k].weight = w - step;
    const double qm = dual_quality(g[0], g[1], g[2], params);
    return (qp - qm) / (2.0 * step);
}

} // namespace

double dual_quality_weight_derivative(const WeightedVertex& a, const WeightedVertex& b,
                                      const WeightedVertex& c, int k,
                                      const DualQualityParams& params)
{
    const Point2 d1 = b.pos - a.pos;
    const Point2 d2 = c.pos - a.pos;
    const double det = cross(d1, d2);
    const double l12 = norm2(d1);
    const double l22 = norm2(d2);
    if (!(std::abs(det) >= kDegenerateDet * std::max(l12, l22)) || l12 == 0.0) {
        return 0.0;
    }
    const double r1 = 0.5 * (l12 - (b.weight - a.weight));
    const double r2 = 0.5 * (l22 - (c.weight - a.weight));
    const Point2 o{(r1 * d2.y - r2 * d1.y) / det, (d1.x * r2 - d2.x * r1) / det};
    const Point2 m = (1.0 / 3.0) * (d1 + d2);
    const double l32 = norm2(c.pos - b.pos);
    const double lbar = (std::sqrt(l12) + std::sqrt(l22) + std::sqrt(l32)) / 3.0;

    static constexpr double dr[3][2] = {{0.5, 0.5}, {-0.5, 0.0}, {0.0, -0.5}};
    const double s1 = dr[k][0];
    const double s2 = dr[k][1];
    const Point2 dodw{(s1 * d2.y - s2 * d1.y) / det, (d1.x * s2 - d2.x * s1) / det};
    const double dface = -2.0 * dot(o - m, dodw) / (lbar * lbar);

    // Edges (a,b), (b,c), (c,a): derivative of 1 - (t - 1/2)^2 in the weight of corner k.
    auto dedge = [](double wi, double wj, double len2, double sign) {
        const double t = 0.5 * (wi - wj + len2) / len2;
        return -2.0 * (t - 0.5) * sign / (2.0 * len2);
    };
    const WeightedVertex* v[3] = {&a, &b, &c};
    const double len2[3] = {l12, l32, l22};
    double dedges = 0.0;
    for (int e = 0; e < 3; ++e) {
        const int i = e;
        const int j = (e + 1) % 3;
        if (k == i) {
            dedges += dedge(v[i]->weight, v[j]->weight, len2[e], 1.0);
        } else if (k == j) {
            dedges += dedge(v[i]->weight, v[j]->weight, len2[e], -1.0);
        }
    }
    return params.beta_f * dface + params.beta_e * dedges / 3.0;
}

double dual_quality_weight_derivative_fd(const WeightedVertex& a, const WeightedVertex& b,
                                         const WeightedVertex& c, int k,
                                         const DualQualityParams& params)
{
    const double l = mean_edge_length(a.pos, b.pos, c.pos);
    return fd_weight_derivative({a, b, c}, k, 1e-6 * l * l, params);
}

Point2 tri_quality_gradient(Point2 a, Point2 b, Point2 c)
{
    const double area = 0.5 * cross(b - a, c - a);
    const double s = (norm2(b - a) + norm2(c - b) + norm2(a - c)) / 3.0;
    if (!(s > 0.0)) {
        return {};
    }
    const Point2 dA{0.5 * (b.y - c.y), 0.5 * (c.x - b.x)};
    const Point2 dS = (2.0 / 3.0) * (2.0 * a - b - c);
    return (kQtScale / (s * s)) * (s * dA - area * dS);
}

Point2 tri_quality_gradient_fd(Point2 a, Point2 b, Point2 c)
{
    const double step = 1e-6 * mean_edge_length(a, b, c);
    const Point2 ex{step, 0.0};
    const Point2 ey{0.0, step};
    return {(tri_quality(a + ex, b, c) - tri_quality(a - ex, b, c)) / (2.0 * step),
            (tri_quality(a + ey, b, c) - tri_quality(a - ey, b, c)) / (2.0 * step)};
}

WeightGradient weight_gradient(const TriMesh& mesh, int i, const DualQualityParams& params,
                               bool analytic)
{
    WeightGradient out;
    const std::vector<int> fan = star(mesh, i);
    double worst = kInf;
    for (int t : fan) {
        const double q = dual_quality(mesh, t, params);
        if (q < worst) {
            worst = q;
            out.worst_tri = t;
        }
    }
    if (out.worst_tri < 0) {
        return out;
    }
    int k = 0;
    const auto g = rotated(mesh, out.worst_tri, i, k);
    if (analytic) {
        out.dq_dw = dual_quality_weight_derivative(g[0], g[1], g[2], 0, params);
    } else {
        const double l = incident_length(mesh, fan, i);
        out.dq_dw = fd_weight_derivative(g, 0, 1e-6 * l * l, params);
    }
    return out;
}

Point2 owt_target(const TriMesh& mesh, const SpacingField& h, int i)
{
    const std::vector<int> fan = star(mesh, i);
    if (fan.empty()) {
        throw EmptyStar("owt_target: vertex " + std::to_string(i) + " has no triangles");
    }
    Point2 sum;
    double mass = 0.0;
    for (int t : fan) {
        const auto g = mesh.generators(t);
        const Point2 o = face_orthocentre(g[0], g[1], g[2]);
        const double hbar = (h(g[0].pos) + h(g[1].pos) + h(g[2].pos)) / 3.0;
        const double m = signed_area(g[0].pos, g[1].pos, g[2].pos) / (hbar * hbar);
        sum = sum + m * o;
        mass += m;
    }
    return (1.0 / mass) * sum;
}

// --- LocalOptimiser ----------------------------------------------------------

LocalOptimiser::LocalOptimiser(TriMesh& mesh, const SpacingField& h, DualQualityParams params,
                               LineSearchConfig cfg)
    : mesh_(mesh), h_(h), params_(params), cfg_(cfg)
{
    refresh();
}

void LocalOptimiser::refresh()
{
    cache_.rebuild(mesh_, params_);
    dirty_weight_.assign(mesh_.vertex_slots(), 1);
    dirty_vertex_.assign(mesh_.vertex_slots(), 1);
    floor_qt_ = min_qt();
    floor_qd_ = min_qd();
}

double LocalOptimiser::min_qt() const
{
    return cache_.min_qt(mesh_);
}

double LocalOptimiser::min_qd() const
{
    return cache_.min_qd(mesh_);
}

void LocalOptimiser::mark_dirty_after(const std::vector<int>& tris)
{
    std::vector<int> ring;
    for (int t : tris) {
        for (int v : mesh_.triangle(t).v) {
            dirty_weight_[v] = dirty_vertex_[v] = 1;
            star_into(mesh_, v, ring);
            for (int s : ring) {
                for (int u : mesh_.triangle(s).v) {
                    dirty_weight_[u] = dirty_vertex_[u] = 1;
                }
            }
        }
    }
}

bool LocalOptimiser::try_step(int i, Point2 pos, double weight, Metric metric,
                              UpdateRecord* record)
{
    const WeightedVertex old = mesh_.vertex(i);
    const bool moved = !(pos == old.pos);
    mesh_.begin();
    mesh_.set_vertex(i, {pos, weight, old.fixed});
    star_into(mesh_, i, fan_);
    if (moved) {
        for (int t : fan_) {
            if (!(tri_quality(mesh_, t) > kMinQuality)) {
                mesh_.rollback();
                return false;
            }
        }
    }
    touched_.clear();
    locked_.clear();
    if (restore_regularity_local(mesh_, fan_, kLocalFlipLimit, &touched_, kRegularityTolerance,
                                 &locked_)
        < 0) {
        mesh_.rollback();
        return false;
    }
    touched_.insert(touched_.end(), fan_.begin(), fan_.end());
    std::sort(touched_.begin(), touched_.end());
    touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());

    double qt_before = kInf, qd_before = kInf, qt_after = kInf, qd_after = kInf;
    std::vector<std::pair<double, double>> fresh;
    fresh.reserve(touched_.size());
    for (int t : touched_) {
        qt_before = std::min(qt_before, cache_.qt[t]);
        qd_before = std::min(qd_before, cache_.qd[t]);
        const auto g = mesh_.generators(t);
        const double qt = tri_quality(g[0].pos, g[1].pos, g[2].pos);
        const double qd = dual_quality(g[0], g[1], g[2], params_);
        fresh.emplace_back(qt, qd);
        qt_after = std::min(qt_after, qt);
        qd_after = std::min(qd_after, qd);
    }
    bool ok = qt_after > kMinQuality;
    if (ok) {
        if (metric == Metric::primal) {
            ok = qt_after > qt_before + cfg_.improvement && qd_after >= floor_qd_;
        } else {
            ok = qd_after > qd_before + cfg_.improvement && qt_after >= floor_qt_;
        }
    }
    for (std::size_t n = 0; ok && n < locked_.size(); ++n) {
        ok = !mesh_.triangle_alive(locked_[n].tri)
            || classify_edge(mesh_, locked_[n]) != EdgeRegularity::locked_violation;
    }
    if (!ok) {
        mesh_.rollback();
        return false;
    }
    mesh_.commit();
    for (std::size_t n = 0; n < touched_.size(); ++n) {
        cache_.qt[touched_[n]] = fresh[n].first;
        cache_.qd[touched_[n]] = fresh[n].second;
    }
    mark_dirty_after(touched_);
    if (record) {
        *record = metric == Metric::primal ? UpdateRecord{i, qt_before, qt_after}
                                           : UpdateRecord{i, qd_before, qd_after};
    }
    return true;
}

bool LocalOptimiser::update_weight(int i, UpdateRecord* record)
{
    std::vector<int> fan = star(mesh_, i);
    if (fan.empty()) {
        return false;
    }
    int worst = -1;
    double qmin = kInf;
    double qsum = 0.0;
    for (int t : fan) {
        qsum += cache_.qd[t];
        if (cache_.qd[t] < qmin) {
            qmin = cache_.qd[t];
            worst = t;
        }
    }
    const double qbar = qsum / static_cast<double>(fan.size());
    const double l = incident_length(mesh_, fan, i);
    const double l2 = l * l;
    int k = 0;
    const auto g = rotated(mesh_, worst, i, k);
    const double grad = cfg_.analytic
        ? dual_quality_weight_derivative(g[0], g[1], g[2], 0, params_)
        : fd_weight_derivative(g, 0, 1e-6 * l2, params_);
    if (!(std::abs(grad) * l2 > 1e-12)) {
        return false;
    }
    double dw = (qbar - qmin) / grad;
    if (dw == 0.0 || !std::isfinite(dw)) {
        return false;
    }
    dw = std::clamp(dw, -l2, l2);
    const WeightedVertex v = mesh_.vertex(i);
    double scale = 1.0;
    for (int m = 0; m <= cfg_.max_bisections; ++m, scale *= 0.5) {
        if (try_step(i, v.pos, v.weight + scale * dw, Metric::dual, record)) {
            return true;
        }
    }
    return false;
}

bool LocalOptimiser::update_vertex(int i, UpdateRecord* record)
{
    const WeightedVertex v = mesh_.vertex(i);
    if (v.fixed) {
        return false;
    }
    std::vector<int> fan = star(mesh_, i);
    if (fan.empty()) {
        return false;
    }
    bool have_target = true;
    Point2 target;
    try {
        target = owt_target(mesh_, h_, i);
    } catch (const Error&) {
        have_target = false;
    }
    double scale = 1.0;
    if (have_target && is_finite(target) && !(target == v.pos)) {
        for (int m = 0; m <= cfg_.max_bisections; ++m, scale *= 0.5) {
            const Point2 p = (1.0 - scale) * v.pos + scale * target;
            if (try_step(i, p, v.weight, Metric::primal, record)) {
                return true;
            }
        }
    }

    // Fall back to steepest ascent on the worst incident triangle.
    int worst = -1;
    double qmin = kInf;
    double qsum = 0.0;
    for (int t : fan) {
        qsum += cache_.qt[t];
        if (cache_.qt[t] < qmin) {
            qmin = cache_.qt[t];
            worst = t;
        }
    }
    const double qbar = qsum / static_cast<double>(fan.size());
    const double l = incident_length(mesh_, fan, i);
    int k = 0;
    const auto g = rotated(mesh_, worst, i, k);
    const Point2 grad = cfg_.analytic ? tri_quality_gradient(g[0].pos, g[1].pos, g[2].pos)
                                      : tri_quality_gradient_fd(g[0].pos, g[1].pos, g[2].pos);
    const double gn2 = norm2(grad);
    if (!(std::sqrt(gn2) * l > 1e-12) || qbar <= qmin) {
        return false;
    }
    Point2 dx = ((qbar - qmin) / gn2) * grad;
    const double len = norm(dx);
    if (len > 0.5 * l) {
        dx = (0.5 * l / len) * dx;
    }
    scale = 1.0;
    for (int m = 0; m <= cfg_.max_bisections; ++m, scale *= 0.5) {
        if (try_step(i, v.pos + scale * dx, v.weight, Metric::primal, record)) {
            return true;
        }
    }
    return false;
}

SweepOutcome LocalOptimiser::sweep(std::uint64_t seed, Metric metric)
{
    if (static_cast<int>(dirty_weight_.size()) != mesh_.vertex_slots()
        || cache_.qt.size() != static_cast<std::size_t>(mesh_.triangle_slots())) {
        refresh();
    }
    SweepOutcome out;
    floor_qt_ = min_qt();
    floor_qd_ = min_qd();
    out.worst_before = metric == Metric::primal ? floor_qt_ : floor_qd_;
    std::vector<int> order;
    for (int i = 0; i < mesh_.vertex_slots(); ++i) {
        if (mesh_.vertex_alive(i) && (metric == Metric::dual || !mesh_.vertex(i).fixed)) {
            order.push_back(i);
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto& dirty = metric == Metric::primal ? dirty_vertex_ : dirty_weight_;
    for (int i : order) {
        if (!dirty[i]) {
            continue;
        }
        dirty[i] = 0;
        ++out.attempted;
        UpdateRecord rec;
        const bool ok = metric == Metric::primal ? update_vertex(i, &rec) : update_weight(i, &rec);
        if (ok) {
            ++out.accepted;
            if (cfg_.record) {
                out.records.push_back(rec);
            }
        }
    }
    out.worst_after = metric == Metric::primal ? min_qt() : min_qd();
    return out;
}

SweepOutcome LocalOptimiser::weight_sweep(std::uint64_t seed)
{
    return sweep(seed, Metric::dual);
}

SweepOutcome LocalOptimiser::vertex_sweep(std::uint64_t seed)
{
    return sweep(seed, Metric::primal);
}

namespace {

const SpacingField& unit_spacing()
{
    static const SpacingField h = SpacingField::constant(1.0);
    return h;
}

} // namespace

SweepOutcome weight_sweep(TriMesh& mesh, std::uint64_t seed, const DualQualityParams& params,
                          const LineSearchConfig& cfg)
{
    LocalOptimiser opt(mesh, unit_spacing(), params, cfg);
    return opt.weight_sweep(seed);
}

SweepOutcome vertex_sweep(TriMesh& mesh, const SpacingField& h, std::uint64_t seed,
                          const DualQualityParams& params, const LineSearchConfig& cfg)
{
    LocalOptimiser opt(mesh, h, params, cfg);
    return opt.vertex_sweep(seed);
}

bool update_weight(TriMesh& mesh, int i, const DualQualityParams& params,
                   const LineSearchConfig& cfg)
{
    LocalOptimiser opt(mesh, unit_spacing(), params, cfg);
    return opt.update_weight(i);
}

bool update_vertex(TriMesh& mesh, const SpacingField& h, int i, const DualQualityParams& params,
                   const LineSearchConfig& cfg)
{
    LocalOptimiser opt(mesh, h, params, cfg);
    return opt.update_vertex(i);
}

} // namespace pdgrid
