#pragma once

#include <cstddef>
#include <vector>

#include "malab/convex_core.hpp"
#include "malab/ellipsoid.hpp"
#include "malab/geometry.hpp"
#include "malab/grid.hpp"

namespace malab {

// Sublevel set of u below the tangent plane at a base node raised by h:
// { y : u(y) < u(x) + p.(y-x) + h }.
struct SectionDescriptor {
    std::size_t base_node = 0;
    Vec3 base_point = Vec3::Zero();
    Vec3 slope = Vec3::Zero();
    double height = 0;
    std::vector<std::size_t> member_nodes;
    std::vector<Vec3> hull;  // extreme points of the member positions
    double volume = 0;       // member count x cell volume
    double hull_volume = 0;  // hull measure, 0 when degenerate
    Ellipsoid john;
    bool compactly_contained = false;

    bool empty() const { return member_nodes.empty(); }
};

struct MaximalHeight {
    double hbar = 0;
    bool singular = false;  // no height gives a compactly contained section
    Vec3 slope = Vec3::Zero();
};

// Values of u on one lattice hyperplane {x_axis = offset}, re-hosted on an
// (n-1)-dimensional grid. hbar_parent records the parent maximal height at
// the layer node nearest the domain center.
struct RestrictionFunction {
    ConvexGridFunction function;
    int axis = 0;
    double offset = 0;
    double hbar_parent = 0;
};

struct VolumeGrowthReport {
    std::vector<double> heights;
    std::vector<double> ratios;  // |S_h| / h^{n/2}
    bool unbounded_flag = false; // monotone growth by more than 10x
};

struct BalancingReport {
    double inner_scale = 0;  // largest c with  c E  inside  S - x
    double outer_scale = 0;  // smallest C with  S - x  inside  C E
};

struct Ball {
    Vec3 center = Vec3::Zero();
    double radius = 0;
};

struct VitaliReport {
    std::vector<std::size_t> selected;
    bool disjoint = false;
    bool covered = false;
};

SectionDescriptor extract_section(const ConvexGridFunction& u, std::size_t node,
                                  const Vec3& p, double h);

MaximalHeight maximal_height(const ConvexGridFunction& u, std::size_t node);

// Maximum-volume inscribed ellipsoid of the convex hull of the points,
// centered at the hull center of mass. Degenerate point sets produce a
// reduced-rank ellipsoid. The outer_ratio field of the result records the
// smallest factor whose dilation of the ellipsoid contains the hull.
Ellipsoid john_ellipsoid(const std::vector<Vec3>& points, int dim);

RestrictionFunction restrict_to_hyperplane(const ConvexGridFunction& u, int axis,
                                           double offset);

// Doubled John semi-lengths of the section of the restriction, descending.
std::vector<double> axis_lengths(const RestrictionFunction& w, std::size_t node,
                                 double h);

// Minimum width of the section hull over a dense direction grid
// (720 planar directions in 2-D, a 2562-point sphere mesh in 3-D).
double breadth(const ConvexGridFunction& u, std::size_t node, double h);

// Tangent-plane test at y against the recorded parent maximal height:
// w(y) + p.(0 - y) + h >= hbar_parent.
bool property_F(const RestrictionFunction& w, std::size_t node, double h);

VolumeGrowthReport verify_volume_growth(const ConvexGridFunction& u,
                                        std::size_t node,
                                        const std::vector<double>& heights);

BalancingReport verify_balancing(const ConvexGridFunction& u, std::size_t node,
                                 double h);

// Largest delta in the grid with S_{delta h}(x) inside the half dilation of
// S_h(x) about x, tested node-exactly via the lattice point x + 2(y - x).
double verify_engulfing(const ConvexGridFunction& u, std::size_t node, double h,
                        const std::vector<double>& delta_grid);

// Greedy largest-first disjoint subfamily; 5x dilations of the selected
// balls must cover every input ball.
VitaliReport vitali_subcover(const std::vector<Ball>& balls);

// Greedy tallest-first subfamily with pairwise disjoint member sets; the
// selected sections re-extracted at height h/delta_star must jointly cover
// every input member node.
VitaliReport vitali_subcover(const ConvexGridFunction& u,
                             const std::vector<SectionDescriptor>& sections,
                             double delta_star);

}  // namespace malab
