#include "pdgrid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pdgrid/errors.hpp"

namespace pdgrid {

namespace {

constexpr double kQtScale = 4.0 * std::numbers::sqrt3 / 3.0;

double segment_distance(Point2 p, Point2 a, Point2 b)
{
    const Point2 d = b - a;
    const double len2 = norm2(d);
    double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * d);
}

Stat summarise(const std::vector<double>& v)
{
    Stat s;
    double sum = 0.0;
    int n = 0;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        if (std::isnan(x)) {
            continue;
        }
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
        sum += x;
        ++n;
    }
    if (n == 0) {
        return {};
    }
    s.mean = sum / n;
    return s;
}

double mean_abs_dev(const std::vector<double>& v, double mean)
{
    if (v.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double x : v) {
        sum += std::abs(mean - x);
    }
    return sum / static_cast<double>(v.size());
}

} // namespace

void DualQualityParams::validate() const
{
    if (!(beta_f >= 0.0) || !(beta_e >= 0.0) || std::abs(beta_f + beta_e - 1.0) > 1e-12) {
        throw ValidationError("beta_f and beta_e must be non-negative and sum to 1");
    }
}

double tri_quality(Point2 a, Point2 b, Point2 c)
{
    const Point2 ab = b - a;
    const Point2 bc = c - b;
    const Point2 ca = a - c;
    const double s = (norm2(ab) + norm2(bc) + norm2(ca)) / 3.0;
    if (!(s > 0.0)) {
        return 0.0;
    }
    return kQtScale * 0.5 * cross(ab, c - a) / s;
}

double tri_quality(const TriMesh& mesh, int t)
{
    const auto p = mesh.corners(t);
    return tri_quality(p[0], p[1], p[2]);
}

double dual_quality(const WeightedVertex& a, const WeightedVertex& b, const WeightedVertex& c,
                    const DualQualityParams& params)
{
    const Point2 dab = b.pos - a.pos;
    const Point2 dac = c.pos - a.pos;
    const double det = cross(dab, dac);
    const double lab2 = norm2(dab);
    const double lac2 = norm2(dac);
    if (!(std::abs(det) >= kDegenerateDet * std::max(lab2, lac2)) || lab2 == 0.0) {
        return 0.0;
    }
    // Face orthocentre relative to a.
    const double r1 = 0.5 * (lab2 - (b.weight - a.weight));
    const double r2 = 0.5 * (lac2 - (c.weight - a.weight));
    const Point2 o{(r1 * dac.y - r2 * dab.y) / det, (dab.x * r2 - dac.x * r1) / det};
    const Point2 m = (1.0 / 3.0) * (dab + dac);
    const double lbc2 = norm2(c.pos - b.pos);
    const double lbar = (std::sqrt(lab2) + std::sqrt(lac2) + std::sqrt(lbc2)) / 3.0;
    const double face = 1.0 - norm2(o - m) / (lbar * lbar);

    // Edge term: (1 - (delta_e / l_e)^2) with delta_e = |t - 1/2| * l_e.
    auto edge = [](double wi, double wj, double len2) {
        const double t = 0.5 * (wi - wj + len2) / len2;
        return 1.0 - (t - 0.5) * (t - 0.5);
    };
    const double edges = (edge(a.weight, b.weight, lab2) + edge(b.weight, c.weight, lbc2)
                          + edge(c.weight, a.weight, lac2)) / 3.0;
    return params.beta_f * face + params.beta_e * edges;
}

double dual_quality(const TriMesh& mesh, int t, const DualQualityParams& params)
{
    const auto g = mesh.generators(t);
    return dual_quality(g[0], g[1], g[2], params);
}

std::array<double, 3> triangle_angles(Point2 a, Point2 b, Point2 c)
{
    auto angle = [](Point2 p, Point2 q, Point2 r) {
        const Point2 u = q - p;
        const Point2 v = r - p;
        return std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / std::numbers::pi;
    };
    return {angle(a, b, c), angle(b, c, a), angle(c, a, b)};
}

DefectReport defects(const TriMesh& mesh, const PowerDual& dual)
{
    DefectReport out;
    const auto& P = mesh.vertices();
    out.delta_f.assign(mesh.triangle_slots(), std::numeric_limits<double>::quiet_NaN());
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (!mesh.triangle_alive(t)) {
            continue;
        }
        const auto c = mesh.corners(t);
        out.delta_f[t] = distance(dual.dual_vertices[t], centroid(c[0], c[1], c[2]));
    }
    const auto edges = mesh.edges();
    out.delta_e.reserve(edges.size());
    out.gamma_e.reserve(edges.size());
    for (std::size_t n = 0; n < edges.size(); ++n) {
        const auto [a, b] = mesh.edge_vertices(edges[n]);
        const auto o = edge_orthocentre(P[a], P[b]);
        out.delta_e.push_back(distance(o.point, midpoint(P[a].pos, P[b].pos)));
        const DualEdge& de = dual.edges[n];
        if (de.interior) {
            out.gamma_e.push_back(segment_distance(midpoint(de.from, de.to), P[a].pos, P[b].pos));
        } else {
            out.gamma_e.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    out.gamma_f.assign(mesh.vertex_slots(), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (mesh.vertex_alive(i)) {
            out.gamma_f[i] = distance(P[i].pos, dual.cells[i].centroid);
        }
    }
    return out;
}

double relative_power(const TriMesh& mesh, const PowerDual& dual, int i)
{
    const double area = dual.cells[i].area;
    if (!(area > 0.0)) {
        throw DegenerateCell("relative_power: dual cell " + std::to_string(i)
                             + " has non-positive area");
    }
    return mesh.vertex(i).weight / area;
}

double relative_length(const TriMesh& mesh, const SpacingField& h, EdgeRef e)
{
    const auto [a, b] = mesh.edge_vertices(e);
    const Point2 pa = mesh.pos(a);
    const Point2 pb = mesh.pos(b);
    return distance(pa, pb) / h(midpoint(pa, pb));
}

namespace {

QualityReport assemble(const TriMesh& mesh, const PowerDual* dual, const SpacingField& h,
                       const DualQualityParams& params)
{
    QualityReport r;
    std::vector<double> all_angles;
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        if (!mesh.triangle_alive(t)) {
            continue;
        }
        const auto c = mesh.corners(t);
        const auto ang = triangle_angles(c[0], c[1], c[2]);
        r.tri_id.push_back(t);
        r.q_tri.push_back(tri_quality(c[0], c[1], c[2]));
        r.q_dual.push_back(dual_quality(mesh, t, params));
        r.angle_min.push_back(std::min({ang[0], ang[1], ang[2]}));
        r.angle_max.push_back(std::max({ang[0], ang[1], ang[2]}));
        const bool bad = !is_well_centred(mesh, t);
        r.poorly_staggered.push_back(bad);
        r.bad += bad ? 1 : 0;
        all_angles.insert(all_angles.end(), ang.begin(), ang.end());
    }
    for (const EdgeRef e : mesh.edges()) {
        r.edge_vertices.push_back(mesh.edge_vertices(e));
        r.h_rel.push_back(relative_length(mesh, h, e));
    }
    for (int i = 0; i < mesh.vertex_slots(); ++i) {
        if (!mesh.vertex_alive(i)) {
            continue;
        }
        r.vertex_id.push_back(i);
        double wr = std::numeric_limits<double>::quiet_NaN();
        if (dual && dual->cells[i].area > 0.0) {
            wr = mesh.vertex(i).weight / dual->cells[i].area;
        }
        r.w_rel.push_back(wr);
    }
    r.vertices = static_cast<int>(r.vertex_id.size());
    r.triangles = static_cast<int>(r.tri_id.size());
    r.edges = static_cast<int>(r.h_rel.size());
    r.qt = summarise(r.q_tri);
    r.qd = summarise(r.q_dual);
    r.angle = summarise(all_angles);
    r.hr = summarise(r.h_rel);
    r.wr = summarise(r.w_rel);
    r.sigma_theta = mean_abs_dev(all_angles, r.angle.mean);
    r.sigma_h = mean_abs_dev(r.h_rel, r.hr.mean);
    return r;
}

} // namespace

QualityReport report(const TriMesh& mesh, const PowerDual& dual, const SpacingField& h,
                     const DualQualityParams& params)
{
    return assemble(mesh, &dual, h, params);
}

QualityReport report(const TriMesh& mesh, const SpacingField& h, const DualQualityParams& params)
{
    try {
        const PowerDual dual = build_dual(mesh);
        return assemble(mesh, &dual, h, params);
    } catch (const DegenerateFace&) {
        return assemble(mesh, nullptr, h, params);
    }
}

void QualityCache::rebuild(const TriMesh& mesh, const DualQualityParams& params)
{
    qt.assign(mesh.triangle_slots(), 0.0);
    qd.assign(mesh.triangle_slots(), 0.0);
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        update(mesh, t, params);
    }
}

void QualityCache::update(const TriMesh& mesh, int t, const DualQualityParams& params)
{
    if (static_cast<std::size_t>(t) >= qt.size()) {
        qt.resize(mesh.triangle_slots(), 0.0);
        qd.resize(mesh.triangle_slots(), 0.0);
    }
    if (!mesh.triangle_alive(t)) {
        qt[t] = qd[t] = std::numeric_limits<double>::infinity();
        return;
    }
    const auto g = mesh.generators(t);
    qt[t] = tri_quality(g[0].pos, g[1].pos, g[2].pos);
    qd[t] = dual_quality(g[0], g[1], g[2], params);
}

double QualityCache::min_qt(const TriMesh& mesh) const
{
    double m = std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        m = std::min(m, qt[t]);
    }
    return m;
}

double QualityCache::min_qd(const TriMesh& mesh) const
{
    double m = std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh.triangle_slots(); ++t) {
        m = std::min(m, qd[t]);
    }
    return m;
}

} // namespace pdgrid
