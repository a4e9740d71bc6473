#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "malab/grid.hpp"

namespace malab {

// Context constants carried with a function: assumed pinch bounds on the
// determinant of the Hessian and a sup-norm scale used to bracket section
// heights. Zero means "not provided".
struct FunctionMetadata {
    double lambda = 0;
    double Lambda = 0;
    double K = 0;
};

// Scalar samples on the in-domain nodes of a grid; out-of-domain nodes hold
// NaN. Immutable after construction. The convexity certificate is only set
// by lower_convex_envelope or an explicit is_discretely_convex pass.
class ConvexGridFunction {
public:
    ConvexGridFunction(std::shared_ptr<const Grid> grid,
                       std::vector<double> values,
                       FunctionMetadata meta = {}, bool certified = false);

    const Grid& grid() const { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t idx) const { return values_[idx]; }
    double sup_norm() const { return sup_norm_; }
    const FunctionMetadata& meta() const { return meta_; }
    bool convexity_certificate() const { return certified_; }

    ConvexGridFunction with_certificate(bool flag) const;
    ConvexGridFunction with_meta(FunctionMetadata m) const;

    // Height-bracket scale: metadata K when provided, else the sup norm.
    double height_scale() const;

private:
    std::shared_ptr<const Grid> grid_;
    std::vector<double> values_;
    FunctionMetadata meta_;
    bool certified_ = false;
    double sup_norm_ = 0;
};

// Distinct stencil lines used for discrete convexity: the dim axes plus
// every two-axis diagonal e_i +- e_j (i < j), dim^2 lines in total.
std::vector<std::array<int, 3>> stencil_directions(int dim);

// u(x+D) - 2u(x) + u(x-D) for lattice offset dir; nullopt when a neighbor
// leaves the lattice or the domain.
std::optional<double> second_difference(const Grid& g,
                                        const std::vector<double>& values,
                                        std::size_t idx,
                                        const std::array<int, 3>& dir);

struct ConvexityWitness {
    bool convex = true;
    std::size_t node = 0;               // first violating node in scan order
    std::array<int, 3> direction = {0, 0, 0};
    double second_diff = 0;             // the violating value
    double tol = 0;                     // tolerance actually applied
    double min_second_diff = 0;         // most negative value seen anywhere
};

// tol_convex < 0 selects the default 1e-9 * max(1, sup|u|).
ConvexityWitness is_discretely_convex(const ConvexGridFunction& u,
                                      double tol_convex = -1);

// Pointwise-largest function below the raw samples whose second differences
// along every stencil line are nonnegative. Exact fixed point: re-running
// returns bit-identical values. Throws std::invalid_argument (message
// carries the node index) on non-finite in-domain input.
ConvexGridFunction lower_convex_envelope(const std::vector<double>& raw_values,
                                         std::shared_ptr<const Grid> grid,
                                         FunctionMetadata meta = {});

// Extreme points of the polytope {p : p.(y-x) <= u(y) - u(x) for all
// in-domain y}, together with the one-sided axis difference quotients at
// the node (NaN where the axis neighbor is missing).
struct SubgradientSet {
    std::vector<Vec3> vertices;
    std::array<double, 3> axis_lo = {0, 0, 0};
    std::array<double, 3> axis_hi = {0, 0, 0};
    bool complete = true;   // enumeration succeeded at the base tolerance
    bool partial = false;   // some axis unbounded (boundary node); boxed by
                            // the global slope scale
    double slack = 0;       // support slack that produced the vertices
};

SubgradientSet subgradient_extremes(const ConvexGridFunction& u,
                                    std::size_t node);

// Deterministic subgradient selection: smallest-norm extreme point,
// lexicographic tie-break. Smooth nodes short-circuit to the verified
// central-difference gradient.
Vec3 default_subgradient(const ConvexGridFunction& u, std::size_t node);

struct MongeAmpereField {
    std::shared_ptr<const Grid> grid;
    std::vector<double> mass;       // per node; nonzero only at interior nodes
    double total = 0;               // == sum of mass, exactly
    std::array<double, 3> slope_lo = {0, 0, 0};
    std::array<double, 3> slope_hi = {0, 0, 0};
    int slope_resolution = 0;       // cells per slope axis
    std::size_t cells_interior = 0; // cells assigned to interior nodes
    std::size_t cells_boundary = 0; // argmax on the boundary: dropped
};

// Node masses of the Monge-Ampère measure via a discrete Legendre transform
// on a uniform slope grid. The slope box is derived from the observed
// difference quotients (plus padding), so it always covers the attained
// slopes; each slope cell contributes its volume to the node attaining the
// conjugate maximum, ties resolved to the first node in scan order. Cells
// whose maximizer sits on the domain boundary are dropped: the measure is
// taken on the open domain.
MongeAmpereField ma_measure(const ConvexGridFunction& u, int slope_resolution);

// u + (1/2)|x - center|^2 with the grid's domain center as base point.
ConvexGridFunction add_half_square(const ConvexGridFunction& u);

// Sum over axes of central second difference quotients; NaN at nodes
// missing a neighbor (non-interior).
std::vector<double> discrete_laplacian(const ConvexGridFunction& u);

}  // namespace malab
