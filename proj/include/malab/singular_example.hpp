#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "malab/cantor.hpp"
#include "malab/convex_core.hpp"
#include "malab/geometry.hpp"
#include "malab/grid.hpp"
#include "malab/solver.hpp"

namespace malab {

using Mat3 = Eigen::Matrix3d;

// Convex profile with just-faster-than-quadratic growth in x1, just-above
// linear growth in x2, and a lift that keeps the segment {x' = 0} x (-1,1)
// at height zero:
//   q(t)  = t / (-log t), q(0) = 0
//   g(x') = x1^2 (-log|x1|)^alpha + |x2| (-log|x2|)^-beta
//   w(x)  = g(x') + x3^2 q(g(x'))
// Evaluations apply the coordinate shrink (x1,x2,x3) -> (rho x1, rho x2,
// rho3 x3) and multiply by `scale`, so the raw profile is the default
// instance and a calibrated instance is convex with unit determinant floor
// on the whole cylinder {|x'| < 1} x (-1,1). The x1 profile is concave for
// -log|x1| between 3 - sqrt(3) and 3 + sqrt(3), i.e. |x1| roughly in
// (0.0088, 0.2814); raw-instance Hessians inside that window are indefinite
// by design of the profile, not by rounding.
struct SubsolutionW {
    double scale = 1;  // multiplicative constant
    double rho = 1;    // shrink on x1 and x2
    double rho3 = 1;   // shrink on x3
    double r0 = 0.3;   // guard: evaluation requires mapped |x1|, |x2| <= r0
    int alpha = 4;     // log exponent of the x1 term
    int beta = 1;      // log exponent of the x2 term; alpha = 2 + 2 beta
};

// Throws std::invalid_argument unless scale > 0, 0 < rho, rho3 <= 1,
// 0 < r0 < 1 and alpha == 2 + 2 beta with beta >= 1.
void validate(const SubsolutionW& w);

// q(t) = t / (-log t) on [0, 1), the growth ratio of the lift direction.
// q(0) = 0 by continuity; throws std::domain_error for t outside [0, 1).
double ratio_profile(double t);

// scale * g at the mapped point (rho x1, rho x2). Even in both arguments.
// Throws std::domain_error when a mapped coordinate exceeds r0.
double g_eval(const SubsolutionW& w, double x1, double x2);

// scale * (g + x3^2 q(g)) at the mapped point. Additional guard
// |rho3 x3| <= 1. w(0, 0, x3) = 0 for every admissible x3.
double w_eval(const SubsolutionW& w, const Vec3& x);

// Pure second derivatives in x1 and x2 diverge on the axes {x1 = 0} and
// {x2 = 0}; Hessians within kAxisMargin of an axis (in mapped coordinates)
// carry the degenerate flag, +infinity on the affected diagonal entries and
// one-sided limits elsewhere.
inline constexpr double kAxisMargin = 1e-6;

struct HessianSample {
    Mat3 matrix = Mat3::Zero();
    bool degenerate = false;
};

// Analytic Hessian of w_eval as a function of the caller coordinates (the
// shrink map and scale are folded in).
HessianSample w_hessian(const SubsolutionW& w, const Vec3& x);

// Central-difference fallback for w_hessian, steps step_scale *
// max(|x_i|, 0.01) per axis. Away from the axes (mapped coordinates at
// least 0.01) the default step agrees with the analytic Hessian to about
// 1e-5 in matrix-relative error.
Mat3 w_hessian_fd(const SubsolutionW& w, const Vec3& x,
                  double step_scale = 1e-3);

// Leading-order determinant of the Hessian for small |x'|:
//   4 * [ x1^2 L1^(2 alpha) / (|x2| L2^(beta+1) Lg)
//         + L1^alpha / (L2^(1+2 beta) Lg) ]
// with L1 = -log|x1|, L2 = -log|x2|, Lg = -log g, evaluated at the mapped
// point and multiplied by the determinant factor of the map. The measured
// constant is 4 for both terms; corrections decay like log(L1)/L1, so
// 20% agreement needs L1 of order 100 (|x1| below about 1e-40).
double det_leading_terms(const SubsolutionW& w, const Vec3& x);

// Box of the Hessian sampling: |x1| in [margin, x1_hi], |x2| in
// [margin, x2_hi], x3 in [-x3_hi, x3_hi]. w is even in every coordinate
// (congruence by a reflection), so samples take the positive quadrant in
// x1, x2 with x3 signed.
struct SampleRegion {
    double margin = 1e-6;
    double x1_hi = 0.1;
    double x2_hi = 0.1;
    double x3_hi = 0.5;
};

struct SubsolutionReport {
    bool ok = false;           // every sample PSD and min det > 0
    int samples = 0;
    double min_det = 0;        // over samples, for the input instance
    double min_eigenvalue = 0;
    Vec3 worst_point = Vec3::Zero();  // argmin of the smallest eigenvalue
    int indefinite_count = 0;
    Vec3 first_indefinite = Vec3::Zero();
    double scale_used = 1;     // w.scale after the det >= 1 adjustment
};

// Halton sweep (bases 2, 3, 5; index starts at 1) of the analytic Hessian
// over the region. When every sample is positive semidefinite, w.scale is
// multiplied by the factor that lifts the sampled determinant floor to 1
// and the report carries the updated scale; an indefinite sample leaves w
// untouched and reports the offending point.
SubsolutionReport verify_subsolution(SubsolutionW& w, int sample_count,
                                     const SampleRegion& region = {});

// Shrinks the profile into its convex zone and calibrates the constant:
// rho = 0.004 keeps mapped |x1| a factor two under the concavity window
// (e^-(3+sqrt 3) ~ 0.0088), rho3 = 0.25 keeps the lift subordinate in the
// mixed minors, and scale is set by verify_subsolution over the unit box
// superset of the cylinder cross-section. Throws std::logic_error if the
// sweep finds an indefinite sample (it does not for these constants).
SubsolutionW find_safe_scales(int sample_count = 20000);

// Dirichlet data C (v(x1) + |x2|) on the cylinder surface.
struct BoundaryData {
    std::shared_ptr<const SpikeFunction> spike;
    double constant = 1;
};

// The data formula at any point of the closed cylinder.
double boundary_value(const BoundaryData& bd, const Vec3& x);

// Contract-checked evaluation: x must lie on the cylinder surface
// (|x3| = 1 with |x'| <= 1, or |x'| = 1 with |x3| <= 1) within edge_tol;
// interior and exterior points are rejected (std::invalid_argument).
double boundary_phi(const BoundaryData& bd, const Vec3& x,
                    double edge_tol = 1e-9);

// Smallest power-of-two constant C (times a final safety factor 2) with
//   C * max(v(x1) - v(s) - p_s (x1 - s) + |x2|, 0) >= w(x - (s, 0, 0))
// at 10^4 Halton points of the cylinder surface and, when a grid is given,
// at all its boundary nodes, for every shift s (p_s is the midpoint of the
// subgradient of v at s). A sample with vanishing left side but positive
// right side has no admissible constant; the search throws
// std::runtime_error there, and past 2^60.
double calibrate_boundary_constant(const SubsolutionW& w,
                                   const SpikeFunction& v,
                                   const std::vector<double>& shifts,
                                   const Grid* grid = nullptr,
                                   int surface_samples = 10000);

// Survivor endpoint moved to the nearest lattice abscissa along axis 0.
// A stand-in is usable when v visibly bends within one cell on both sides
// of it; endpoints whose stand-in lands deep inside a removed interval
// fail that test and are dropped from the example checks.
struct SnappedAbscissa {
    Rational exact;        // the survivor endpoint
    double snapped = 0;    // nearest lattice abscissa
    int index = 0;         // lattice index along axis 0
    double offset = 0;     // |snapped - exact|
    bool usable = false;
};

// Snaps the endpoints of the survivors at v's truncation depth. One entry
// per distinct lattice abscissa, ascending, smallest offset kept.
std::vector<SnappedAbscissa> snap_endpoints(const SpikeFunction& v,
                                            const Grid& grid);

// Nodes (i, j, k) of the axis-2 lattice line through (i, j), restricted to
// the domain, ascending in k.
std::vector<std::size_t> axis3_line(const Grid& g, int i, int j);

// Degeneracy flag threshold for the maximal-height probe along candidate
// singular lines: a node counts as flagged when its maximal height is at
// most this fraction of the function height scale (or the probe reports
// singular outright). Measured on solved examples: line nodes come out
// near 3e-10 of the height scale while strictly convex controls stay
// above 1e-2 even on the first interior shell, so this cut sits four
// orders above one and five below the other.
inline constexpr double kLineFlagFraction = 1e-7;

// Count of interior nodes of the line through (i, j) whose maximal height
// is flagged degenerate; line_total receives the number of interior line
// nodes when non-null.
int count_degenerate_line_nodes(const ConvexGridFunction& u, int i, int j,
                                int* line_total = nullptr);

struct LineCheck {
    double abscissa = 0;          // the shift s
    int line_nodes = 0;           // domain nodes on the line
    int interior_nodes = 0;
    double max_affine_deviation = 0;  // from the chord between the lids
    bool affine = false;              // deviation <= 5 * spacing
    double max_hbar = 0;          // largest maximal height on the line
    int flagged = 0;              // degenerate maximal-height nodes
    bool all_flagged = false;
};

struct ComparisonCheck {
    double tol = 0;        // 5 * spacing
    double worst_gap = 0;  // max over shifts and nodes of w_s - u_s
    double shift = 0;      // shift attaining the worst gap
    Vec3 position = Vec3::Zero();
    bool ok = false;
};

struct ExampleChecks {
    bool solver_converged = false;
    ComparisonCheck comparison;
    std::vector<LineCheck> lines;
    bool all_affine = false;
    bool all_flagged = false;
};

struct ExampleAssembly {
    ConvexGridFunction u;
    SolverReport report;
    SubsolutionW w;                      // calibrated instance compared against
    BoundaryData boundary;
    std::vector<SnappedAbscissa> points;  // snapped survivor endpoints
    ExampleChecks checks;
};

// End-to-end run on the unit cylinder: builds the removal structure to
// `depth`, solves det = 1 with data C (v(x1) + |x2|), and checks that
//   (a) u stays above the shifted subsolution after subtracting the
//       tangent normalization at each usable snapped endpoint s, within
//       5 * spacing,
//   (b) u is affine along the lattice line {(s, 0, t)} within 5 * spacing,
//   (c) the maximal-height probe flags every interior node of those lines.
// boundary_constant <= 0 selects the calibrated constant. Requires a 3-D
// cylinder grid with unit radius and half-height, isotropic spacing, and
// odd axis-1 count (the line {x2 = 0} must be on the lattice). Solver
// non-convergence is reported in the checks, which are still computed.
ExampleAssembly assemble_example(std::shared_ptr<const Grid> grid, int depth,
                                 double boundary_constant = 0);

// Base-b radical inverse (van der Corput in base b): digit reversal of i
// into (0, 1). Deterministic low-discrepancy driver for every sampling
// routine in this module.
double radical_inverse(std::uint64_t i, int base);

}  // namespace malab
