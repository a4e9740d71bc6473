#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace malab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Halfplane {x : n.dot(x) <= c}. Not necessarily normalized.
struct Halfplane {
    Vec2 n;
    double c;
};

// Convex hull of a 2-D point set, counter-clockwise, no repeated first
// vertex. Collinear inputs collapse to the extreme segment (2 points),
// coincident inputs to a single point.
std::vector<Vec2> hull2d(std::vector<Vec2> pts);

double polygon_area(const std::vector<Vec2>& poly);
Vec2 polygon_centroid(const std::vector<Vec2>& poly);

// One Sutherland-Hodgman step: clip a convex CCW polygon against
// n.dot(x) <= c. Result may be empty.
std::vector<Vec2> clip_polygon(const std::vector<Vec2>& poly, const Vec2& n,
                               double c);

// Intersect halfplanes by clipping a centered square of half-width `box`.
// Callers must pick `box` large enough to contain the true region.
std::vector<Vec2> halfplane_intersection(const std::vector<Halfplane>& hs,
                                         double box = 1e6);

bool polygon_contains(const std::vector<Vec2>& poly, const Vec2& p,
                      double tol);

// Edges of a CCW convex polygon as outward halfplanes.
std::vector<Halfplane> polygon_halfplanes(const std::vector<Vec2>& poly);

// 3-D convex hull. For full-dimensional input: triangular facets with
// outward unit normals and offsets (n.dot(x) <= off on the hull). Inputs of
// affine rank < 3 keep their extreme vertices but carry no facets; `rank`
// and `degenerate` record the collapse.
struct Hull3 {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> facets;
    std::vector<Vec3> normals;
    std::vector<double> offsets;
    double volume = 0.0;
    Vec3 centroid = Vec3::Zero();
    int rank = 3;
    bool degenerate = false;
};

Hull3 hull3d(const std::vector<Vec3>& pts);

// Membership test against the facet planes (full-rank hulls). Degenerate
// hulls fall back to distance from the affine span plus span membership.
bool hull_contains(const Hull3& h, const Vec3& p, double tol);

double width_along(const std::vector<Vec3>& pts, const Vec3& dir);
double width_along2(const std::vector<Vec2>& pts, const Vec2& dir);

// `count` unit vectors evenly spaced on the circle.
std::vector<Vec2> planar_directions(int count);

// Vertices of an icosahedron subdivided `level` times, radially projected
// to the unit sphere. Size 10*4^level + 2 (level 4 gives 2562).
std::vector<Vec3> sphere_directions(int level);

}  // namespace malab
