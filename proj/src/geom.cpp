#include "pdgrid/geom.hpp"

#include <algorithm>

#include "pdgrid/errors.hpp"

namespace pdgrid {

double power_distance(Point2 p, const WeightedVertex& v)
{
    return norm2(p - v.pos) - v.weight;
}

EdgeOrthocentre edge_orthocentre(const WeightedVertex& vi, const WeightedVertex& vj,
                                 double min_length2)
{
    const Point2 d = vj.pos - vi.pos;
    const double len2 = norm2(d);
    if (!(len2 >= min_length2)) {
        throw DegenerateEdge("edge_orthocentre: coincident endpoints");
    }
    const double t = 0.5 * (vi.weight - vj.weight + len2) / len2;
    return {vi.pos + t * d, t};
}

std::optional<Point2> try_face_orthocentre(const WeightedVertex& vi, const WeightedVertex& vj,
                                           const WeightedVertex& vk) noexcept
{
    const Point2 dij = vj.pos - vi.pos;
    const Point2 dik = vk.pos - vi.pos;
    const double det = cross(dij, dik);
    const double scale = std::max(norm2(dij), norm2(dik));
    if (!(std::abs(det) >= kDegenerateDet * scale) || scale == 0.0) {
        return std::nullopt;
    }
    // [dij; dik] * delta = 1/2 [|dij|^2 - dw_ij; |dik|^2 - dw_ik]
    const double r1 = 0.5 * (norm2(dij) - (vj.weight - vi.weight));
    const double r2 = 0.5 * (norm2(dik) - (vk.weight - vi.weight));
    const double dx = (r1 * dik.y - r2 * dij.y) / det;
    const double dy = (dij.x * r2 - dik.x * r1) / det;
    return Point2{vi.pos.x + dx, vi.pos.y + dy};
}

Point2 face_orthocentre(const WeightedVertex& vi, const WeightedVertex& vj,
                        const WeightedVertex& vk)
{
    if (auto o = try_face_orthocentre(vi, vj, vk)) {
        return *o;
    }
    throw DegenerateFace("face_orthocentre: collinear generators");
}

std::optional<OrthoBall> try_orthoball(const WeightedVertex& vi, const WeightedVertex& vj,
                                       const WeightedVertex& vk) noexcept
{
    auto o = try_face_orthocentre(vi, vj, vk);
    if (!o) {
        return std::nullopt;
    }
    return OrthoBall{*o, power_distance(*o, vi)};
}

OrthoBall orthoball(const WeightedVertex& vi, const WeightedVertex& vj, const WeightedVertex& vk)
{
    if (auto b = try_orthoball(vi, vj, vk)) {
        return *b;
    }
    throw DegenerateFace("orthoball: collinear generators");
}

double power_incircle(const WeightedVertex& a, const WeightedVertex& b, const WeightedVertex& c,
                      const WeightedVertex& d)
{
    const Point2 pa = a.pos - d.pos;
    const Point2 pb = b.pos - d.pos;
    const Point2 pc = c.pos - d.pos;
    const double za = norm2(pa) - a.weight + d.weight;
    const double zb = norm2(pb) - b.weight + d.weight;
    const double zc = norm2(pc) - c.weight + d.weight;
    return za * cross(pb, pc) + zb * cross(pc, pa) + zc * cross(pa, pb);
}

bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c)
{
    return signed_area(p, a, b) >= 0.0 && signed_area(p, b, c) >= 0.0
        && signed_area(p, c, a) >= 0.0;
}

} // namespace pdgrid
