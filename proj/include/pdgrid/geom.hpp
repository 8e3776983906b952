#pragma once

#include <cmath>
#include <optional>

namespace pdgrid {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
constexpr double norm2(Point2 a) { return dot(a, a); }
inline double norm(Point2 a) { return std::sqrt(norm2(a)); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
constexpr Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// A generator of the power diagram. `weight` carries squared-length units and
// may be negative; only weight differences affect the tessellation geometry.
// `fixed` pins the position (boundary vertices); the weight stays free.
struct WeightedVertex {
    Point2 pos;
    double weight = 0.0;
    bool fixed = false;

    friend bool operator==(const WeightedVertex&, const WeightedVertex&) = default;
};

struct OrthoBall {
    Point2 center;
    double radius2 = 0.0; // signed power radius
};

struct EdgeOrthocentre {
    Point2 point;
    double t = 0.5; // line parameter along xi -> xj; may fall outside [0,1]
};

// Default floor below which an edge is considered to have zero length.
inline constexpr double kDefaultMinLength2 = 1e-24;
// Relative determinant floor for the 2x2 orthocentre system.
inline constexpr double kDegenerateDet = 1e-12;

// ||p - v.pos||^2 - v.weight
double power_distance(Point2 p, const WeightedVertex& v);

// Point on the line through vi, vj with equal power distance to both.
// Throws DegenerateEdge when the endpoints coincide (to `min_length2`).
EdgeOrthocentre edge_orthocentre(const WeightedVertex& vi, const WeightedVertex& vj,
                                 double min_length2 = kDefaultMinLength2);

// Point of equal power distance to all three generators, solved in
// difference form relative to vi. Throws DegenerateFace for collinear input.
Point2 face_orthocentre(const WeightedVertex& vi, const WeightedVertex& vj,
                        const WeightedVertex& vk);

// Non-throwing variant for hot loops; empty for degenerate faces.
std::optional<Point2> try_face_orthocentre(const WeightedVertex& vi, const WeightedVertex& vj,
                                           const WeightedVertex& vk) noexcept;

OrthoBall orthoball(const WeightedVertex& vi, const WeightedVertex& vj, const WeightedVertex& vk);
std::optional<OrthoBall> try_orthoball(const WeightedVertex& vi, const WeightedVertex& vj,
                                       const WeightedVertex& vk) noexcept;

// Half the cross product; positive for counter-clockwise a, b, c.
constexpr double signed_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }

// Lifted 4x4 determinant: equals (r^2 - pi_d(o)) * cross(b - a, c - a) for the
// orthoball (o, r^2) of (a, b, c). Positive when d penetrates the orthoball of
// a counter-clockwise triangle.
double power_incircle(const WeightedVertex& a, const WeightedVertex& b, const WeightedVertex& c,
                      const WeightedVertex& d);

// Closed-triangle containment for a counter-clockwise triangle.
bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c);

constexpr Point2 centroid(Point2 a, Point2 b, Point2 c)
{
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

} // namespace pdgrid
