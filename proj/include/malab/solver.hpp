#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "malab/convex_core.hpp"
#include "malab/grid.hpp"

namespace malab {

// Dirichlet data for det D^2 u = f: a positive right-hand side read at
// interior nodes, boundary values read at boundary nodes, and the lattice
// radius of the direction frames used by the monotone operator.
struct DirichletProblem {
    std::shared_ptr<const Grid> grid;
    std::vector<double> rhs;       // per node, used at interior nodes
    std::vector<double> boundary;  // per node, used at boundary nodes
    int stencil_radius = 2;
    double rhs_floor = 0;          // recorded positive lower bound of rhs
};

// Samples f and phi on the grid and records min f over interior nodes as
// the floor. Throws std::invalid_argument when f is not strictly positive
// and finite on interior nodes or phi is not finite on boundary nodes.
DirichletProblem make_problem(std::shared_ptr<const Grid> grid,
                              const std::function<double(const Vec3&)>& f,
                              const std::function<double(const Vec3&)>& phi,
                              int stencil_radius = 2);

struct SolverReport {
    int iterations = 0;
    // Residuals of accepted iterates, starting at the initial guess;
    // strictly decreasing by construction of the line search.
    std::vector<double> residual_history;
    // Step fraction accepted per iteration; 0 marks a nodewise relaxation
    // sweep taken because no Newton fraction reduced the residual.
    std::vector<double> damping_history;
    bool converged = false;
    bool convexified = false;  // post-solve convexification was required
};

// Monotone wide-stencil Monge-Ampere operator: at each interior node the
// minimum over orthogonal lattice direction frames of the product of
// positive parts of directional second difference quotients. Non-interior
// nodes hold NaN. Frames beyond the axis frame are used only on grids with
// isotropic spacing (lattice-orthogonal pairs are not orthogonal in
// physical coordinates otherwise); frames whose offsets leave the domain
// are skipped node by node.
std::vector<double> discrete_ma_operator(const ConvexGridFunction& u,
                                         int stencil_radius);

struct SolveResult {
    ConvexGridFunction solution;
    SolverReport report;
};

// Damped Newton iteration on the monotone discretization, initialized from
// the linear problem  Laplace u = n f^(1/n)  with the same boundary data.
// The residual is the max norm of (operator - f) over interior nodes; a
// step is accepted only if it reduces the residual, with nodewise scalar
// relaxation sweeps as a fallback when no damping fraction does. Negative
// tol_residual selects 1e-8 for dim <= 2 and 1e-6 for dim 3. On
// non-convergence the partial result is returned with converged = false.
SolveResult solve_dirichlet(const DirichletProblem& p,
                            double tol_residual = -1, int max_iter = 200);

}  // namespace malab
