#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "malab/convex_core.hpp"

namespace malab {

enum class Verdict { consistent, inconsistent, inconclusive };

struct SeriesPoint {
    double parameter = 0;
    double value = 0;
};

// Least-squares exponent in a log-linear model, together with the RMS
// residual of the fit in the log domain.
struct ExponentFit {
    double exponent = 0;
    double residual = 0;
};

// One measured series with provenance. `inputs` is a frozen human-readable
// snapshot of the run configuration (grid, data, thresholds).
struct EstimateReport {
    std::string name;
    std::string inputs;
    std::vector<SeriesPoint> series;  // parameters strictly increasing
    std::optional<ExponentFit> fitted_exponent;  // only with >= 4 points
    Verdict verdict = Verdict::inconclusive;
};

// Throws std::invalid_argument unless series parameters are strictly
// increasing and any fitted exponent is backed by at least 4 points.
void validate(const EstimateReport& report);

// Laplacian samples of a solution restricted to an integration node set.
// `values` holds the central second-difference Laplacian at interior nodes
// and NaN elsewhere; integrals run over `support` only (always a subset of
// the interior nodes) with midpoint quadrature, cell volume = product of
// spacings.
struct DeltaField {
    std::shared_ptr<const Grid> grid;
    std::vector<double> values;
    std::vector<std::size_t> support;
};

// Support: interior nodes within the centered ball of radius 1/2 (the
// inner-ball normalization used throughout).
DeltaField delta_field(const ConvexGridFunction& u);

// Support: interior nodes with |x - center| <= radius, distance taken in
// the grid's dimension.
DeltaField delta_field_ball(const ConvexGridFunction& u, const Vec3& center,
                            double radius);

// Support: interior nodes of a 3-D grid within lateral distance `radius`
// of the vertical line through (x1, x2), with |x3 - center_3| <= z_max.
// `collar_cells` > 0 removes nodes within that many cells of the line
// itself, separating discretization spikes from genuine mass; run with 0
// and 1 and report both.
DeltaField delta_field_tube(const ConvexGridFunction& u, double x1, double x2,
                            double radius, int collar_cells = 0,
                            double z_max = std::numeric_limits<double>::infinity());

// Integral of the field over { value > t } intersected with the support.
// Nonincreasing and right-continuous in t. t must be nonnegative: t = 0
// makes this the plain integral of the positive part, which the p = 0
// Orlicz integral reproduces exactly.
double level_integral(const DeltaField& f, double t);

// Dyadic level series (t = 2^j, j = 0, 1, ...), truncated at the last
// level whose superlevel set still holds at least `min_nodes` support
// nodes; below that, quadrature noise dominates. May be empty.
std::vector<SeriesPoint> level_series(const DeltaField& f, int min_nodes = 50);

// Two decay laws fitted to one series of positive values over positive
// parameters t: value ~ C |log t|^(-exponent) and value ~ C t^(-exponent).
// Points with nonpositive values are dropped and counted; the log-power
// fit additionally drops t = 1 (its abscissa log|log t| is undefined).
// Throws std::invalid_argument when fewer than 4 usable points remain for
// either fit, when parameters are not strictly increasing, or when a
// parameter is nonpositive.
struct DecayFit {
    ExponentFit log_power;
    ExponentFit t_power;
    int dropped_log = 0;
    int dropped_power = 0;
};
DecayFit decay_fit(const std::vector<SeriesPoint>& series);

// Integral of value * (log(1 + value))^p over the support; nonpositive
// values contribute zero. p >= 0. At p = 0 this equals
// level_integral(f, 0) exactly (same summation order).
double orlicz_integral(const DeltaField& f, double p);

// Sum of r^a |log r|^b over the radii. Every radius must lie in (0, 1).
double covering_sum(const std::vector<double>& radii, double dimension_exponent,
                    double log_exponent);

// Discrete Jensen comparison for phi(x) = (1 + x) (log(1 + x))^M on a
// field supported by a ball of radius r: lhs integrates phi(r^n f) over
// the support, rhs = c r^n phi(r^n avg f) with c = support volume / r^n.
// Convexity of phi (M >= 1, f >= 0) forces lhs >= rhs; the implementation
// asserts that and throws std::logic_error past rounding slack.
struct JensenCheck {
    double lhs = 0;
    double rhs = 0;
    double constant = 0;  // support volume / r^n
    int nodes = 0;
};
JensenCheck jensen_check(const DeltaField& f, double radius, double M);

// Dyadic-radius scan of the mass concentration around one node: for each
// r = r_max / 2^k down to 3 spacings,
//   ratio(r)  = integral of (1 + Lap u)(log(1 + Lap u))^M over B_r(node)
//               divided by r^(n-1) |log r|^(M-1),
//   boundary_growth(r) = sup over the outermost node shell of u - u(node),
//               divided by r / |log r|.
// Series come back with r increasing. Requires M >= 1, 3 spacings <=
// r_max < 1, and the ball plus one cell inside the domain (so that every
// ball node is interior); violations throw std::invalid_argument.
struct BallLowerBound {
    std::vector<SeriesPoint> ratio;
    std::vector<SeriesPoint> boundary_growth;
};
BallLowerBound singular_ball_lower_bound(const ConvexGridFunction& u,
                                         std::size_t node, double r_max,
                                         double M);

// Mass-growth probe at one node: reports the maximal section height hbar
// there, and when the requested height h exceeds it, scans dyadic radii
// from exp(-sqrt(|log h|)) down to 3 spacings, recording the measure mass
// of u + |x|^2/2 over B_r(node) next to the benchmark curves
// r^(n-1) |log r|^eta for eta in kProbeLogExponents. h <= hbar leaves the
// series empty (nothing near-singular to probe).
inline constexpr std::array<double, 3> kProbeLogExponents = {0.1, 0.5, 1.0};
struct PropProbe {
    double hbar = 0;
    std::vector<SeriesPoint> mass;
    std::array<std::vector<SeriesPoint>, 3> benchmarks;
};
PropProbe prop_probe(const ConvexGridFunction& u, std::size_t node, double h,
                     int slope_resolution = 128);

}  // namespace malab
