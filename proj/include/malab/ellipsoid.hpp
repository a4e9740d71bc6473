#pragma once

#include <Eigen/Dense>
#include <vector>

#include "malab/geometry.hpp"

namespace malab {

// Halfspace {x : a.dot(x) <= b} in R^dim; only the first dim components of
// `a` are meaningful.
struct Halfspace {
    Vec3 a;
    double b;
};

struct Ellipsoid {
    int dim = 0;   // ambient dimension
    int rank = 0;  // dimension actually realized
    Vec3 center = Vec3::Zero();
    // E = {center + y : y^T shape^{-1} y <= 1}, restricted to the realized
    // span. Zero-padded outside the ambient dimension.
    Eigen::Matrix3d shape = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();  // unit columns
    Vec3 semi = Vec3::Zero();                            // descending lengths
    bool ok = false;
    double gap = 0.0;  // relative optimality gap at exit
    int iterations = 0;
    // Smallest factor whose dilation of E about its center contains the
    // source hull; filled by john_ellipsoid, 0 when unknown.
    double outer_ratio = 0.0;

    // Gauge of p relative to the realized span: <= 1 inside E. Points off
    // the span register as infinite.
    double gauge(const Vec3& p) const;
};

// Maximum-volume ellipsoid with a prescribed center inscribed in the
// polytope {x : a_i . x <= b_i}. The center must be strictly interior and
// the polytope bounded; otherwise ok=false. Solved through the D-optimal
// design dual with Frank-Wolfe add/drop steps, so every returned ellipsoid
// is feasible even before full convergence.
Ellipsoid mvie_fixed_center(const std::vector<Halfspace>& hs,
                            const Vec3& center, int dim);

}  // namespace malab
