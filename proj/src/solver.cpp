#include "malab/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "malab/parallel.hpp"

namespace malab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// An orthogonal frame of lattice directions together with the reciprocal
// squared physical lengths of its offsets.
struct Frame {
    std::array<std::array<int, 3>, 3> dirs{};
    std::array<double, 3> inv_len2 = {0, 0, 0};
};

bool isotropic(const Grid& g) {
    return g.spacing_max() - g.spacing_min() <= 1e-12 * g.spacing_max();
}

std::vector<Frame> build_frames(const Grid& g, int radius) {
    if (radius < 1)
        throw std::invalid_argument("discrete_ma_operator: stencil_radius must be >= 1");
    const int d = g.dim();
    std::vector<std::array<std::array<int, 3>, 3>> raw;
    if (d == 1) {
        raw.push_back({{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}});
    } else if (d == 2) {
        raw.push_back({{{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}});
        if (isotropic(g)) {
            raw.push_back({{{1, 1, 0}, {1, -1, 0}, {0, 0, 0}}});
            if (radius >= 2) {
                raw.push_back({{{2, 1, 0}, {-1, 2, 0}, {0, 0, 0}}});
                raw.push_back({{{1, 2, 0}, {-2, 1, 0}, {0, 0, 0}}});
            }
        }
    } else {
        raw.push_back({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
        if (isotropic(g)) {
            raw.push_back({{{1, 1, 0}, {1, -1, 0}, {0, 0, 1}}});
            raw.push_back({{{1, 0, 1}, {1, 0, -1}, {0, 1, 0}}});
            raw.push_back({{{0, 1, 1}, {0, 1, -1}, {1, 0, 0}}});
            if (radius >= 2) {
                raw.push_back({{{2, 1, 0}, {-1, 2, 0}, {0, 0, 1}}});
                raw.push_back({{{1, 2, 0}, {-2, 1, 0}, {0, 0, 1}}});
                raw.push_back({{{2, 0, 1}, {-1, 0, 2}, {0, 1, 0}}});
                raw.push_back({{{1, 0, 2}, {-2, 0, 1}, {0, 1, 0}}});
                raw.push_back({{{0, 2, 1}, {0, -1, 2}, {1, 0, 0}}});
                raw.push_back({{{0, 1, 2}, {0, -2, 1}, {1, 0, 0}}});
                raw.push_back({{{1, 1, 1}, {1, -1, 0}, {1, 1, -2}}});
                raw.push_back({{{1, 1, -1}, {1, -1, 0}, {1, 1, 2}}});
                raw.push_back({{{1, -1, 1}, {1, 1, 0}, {-1, 1, 2}}});
                raw.push_back({{{1, -1, -1}, {1, 1, 0}, {1, -1, 2}}});
            }
        }
    }
    std::vector<Frame> frames;
    frames.reserve(raw.size());
    for (const auto& dirs : raw) {
        Frame f;
        f.dirs = dirs;
        for (int k = 0; k < d; ++k) {
            double len2 = 0;
            for (int a = 0; a < 3; ++a) {
                const double w = dirs[k][a] * g.spec().spacing[a];
                len2 += w * w;
            }
            f.inv_len2[k] = 1.0 / len2;
        }
        frames.push_back(f);
    }
    return frames;
}

// Both endpoints of the offset pair, or false when either leaves the domain.
bool offset_pair(const Grid& g, const std::array<int, 3>& c,
                 const std::array<int, 3>& dir, std::size_t& plus,
                 std::size_t& minus) {
    std::array<int, 3> p = c, m = c;
    for (int a = 0; a < 3; ++a) {
        p[a] += dir[a];
        m[a] -= dir[a];
        if (p[a] < 0 || p[a] >= g.spec().counts[a]) return false;
        if (m[a] < 0 || m[a] >= g.spec().counts[a]) return false;
    }
    plus = g.index(p[0], p[1], p[2]);
    minus = g.index(m[0], m[1], m[2]);
    return g.in_domain(plus) && g.in_domain(minus);
}

// Operator value at one node: min over usable frames of the product of
// clamped second difference quotients. Optionally reports the minimizing
// frame and its raw (unclamped) quotients for Jacobian assembly.
double node_operator(const Grid& g, const std::vector<double>& v,
                     std::size_t idx, const std::vector<Frame>& frames,
                     const Frame** active = nullptr,
                     std::array<double, 3>* raw_diffs = nullptr) {
    const int d = g.dim();
    const auto c = g.coords(idx);
    const double uc = v[idx];
    double best = std::numeric_limits<double>::infinity();
    for (const Frame& f : frames) {
        std::array<double, 3> diffs = {0, 0, 0};
        double prod = 1;
        bool usable = true;
        for (int k = 0; k < d && usable; ++k) {
            std::size_t plus = 0, minus = 0;
            if (!offset_pair(g, c, f.dirs[k], plus, minus)) {
                usable = false;
                break;
            }
            diffs[k] = ((v[plus] + v[minus]) - 2.0 * uc) * f.inv_len2[k];
            prod *= std::max(diffs[k], 0.0);
        }
        if (usable && prod < best) {
            best = prod;
            if (active) *active = &f;
            if (raw_diffs) *raw_diffs = diffs;
        }
    }
    return best;
}

// Interior residual field op - f and its max norm.
double residual_field(const Grid& g, const std::vector<double>& v,
                      const std::vector<double>& rhs,
                      const std::vector<Frame>& frames,
                      std::vector<double>& op_out) {
    const auto& interior = g.interior_nodes();
    parallel_for(interior.size(), [&](std::size_t t) {
        const std::size_t idx = interior[t];
        op_out[idx] = node_operator(g, v, idx, frames);
    });
    double r = 0;
    for (std::size_t idx : interior)
        r = std::max(r, std::abs(op_out[idx] - rhs[idx]));
    return r;
}

// Initial guess: solve the linear problem Laplace u = n f^(1/n) with the
// problem's boundary values, the standard robust seed for this equation.
std::vector<double> poisson_guess(const Grid& g, const std::vector<double>& rhs,
                                  const std::vector<double>& boundary) {
    const int d = g.dim();
    const auto& interior = g.interior_nodes();
    std::vector<long long> eq(g.size(), -1);
    for (std::size_t r = 0; r < interior.size(); ++r)
        eq[interior[r]] = static_cast<long long>(r);

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    trips.reserve(interior.size() * (1 + 2 * d));
    Eigen::VectorXd b(interior.size());
    for (std::size_t r = 0; r < interior.size(); ++r) {
        const std::size_t idx = interior[r];
        double diag = 0;
        double rhs_r = -d * std::pow(rhs[idx], 1.0 / d);
        for (int a = 0; a < d; ++a) {
            const double w = 1.0 / (g.spec().spacing[a] * g.spec().spacing[a]);
            for (int s = -1; s <= 1; s += 2) {
                const long long nb = g.neighbor(idx, a, s);
                diag += w;
                if (nb >= 0 && eq[static_cast<std::size_t>(nb)] >= 0)
                    trips.emplace_back(static_cast<int>(r),
                                       static_cast<int>(eq[nb]), -w);
                else
                    rhs_r += w * boundary[static_cast<std::size_t>(nb)];
            }
        }
        trips.emplace_back(static_cast<int>(r), static_cast<int>(r), diag);
        b[static_cast<Eigen::Index>(r)] = rhs_r;
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(interior.size()),
                                  static_cast<int>(interior.size()));
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
    if (chol.info() != Eigen::Success)
        throw std::runtime_error("solve_dirichlet: seed factorization failed");
    const Eigen::VectorXd x = chol.solve(b);

    std::vector<double> v(g.size(), kNaN);
    for (std::size_t idx : g.boundary_nodes()) v[idx] = boundary[idx];
    for (std::size_t r = 0; r < interior.size(); ++r)
        v[interior[r]] = x[static_cast<Eigen::Index>(r)];
    return v;
}

// One Gauss-Seidel sweep: at each interior node solve op(value) = f for the
// node's own value by bisection; the operator is strictly decreasing in it.
void relaxation_sweep(const Grid& g, std::vector<double>& v,
                      const std::vector<double>& rhs,
                      const std::vector<Frame>& frames) {
    const int d = g.dim();
    for (std::size_t idx : g.interior_nodes()) {
        const auto c = g.coords(idx);
        // Ceiling: at the smallest pair average of a fully usable frame that
        // frame's product vanishes, so the operator is 0 <= f there. Pair
        // averages of frames the operator skips must not enter, or the
        // bracket can miss the root entirely.
        double hi = std::numeric_limits<double>::infinity();
        for (const Frame& f : frames) {
            std::array<double, 3> avg = {0, 0, 0};
            bool usable = true;
            for (int k = 0; k < d && usable; ++k) {
                std::size_t plus = 0, minus = 0;
                usable = offset_pair(g, c, f.dirs[k], plus, minus);
                if (usable) avg[k] = 0.5 * (v[plus] + v[minus]);
            }
            if (usable)
                for (int k = 0; k < d; ++k) hi = std::min(hi, avg[k]);
        }
        if (!std::isfinite(hi)) continue;
        const double f_target = rhs[idx];
        auto op_at = [&](double t) {
            v[idx] = t;
            return node_operator(g, v, idx, frames);
        };
        double step = std::max(g.spacing_min() * g.spacing_min() *
                                   std::pow(f_target, 1.0 / d),
                               1e-8 * (1.0 + std::abs(hi)));
        double lo = hi - step;
        for (int it = 0; it < 200 && op_at(lo) < f_target; ++it) {
            step *= 2;
            lo = hi - step;
        }
        for (int it = 0; it < 90; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (op_at(mid) >= f_target)
                lo = mid;
            else
                hi = mid;
        }
        v[idx] = 0.5 * (lo + hi);
    }
}

Eigen::VectorXd newton_step(const Grid& g, const std::vector<double>& v,
                            const std::vector<double>& rhs,
                            const std::vector<Frame>& frames,
                            const std::vector<double>& op,
                            const std::vector<long long>& eq) {
    const int d = g.dim();
    const auto& interior = g.interior_nodes();
    const int n = static_cast<int>(interior.size());
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    trips.reserve(interior.size() * (1 + 2 * d));
    Eigen::VectorXd rhs_vec(n);
    for (int r = 0; r < n; ++r) {
        const std::size_t idx = interior[static_cast<std::size_t>(r)];
        const Frame* active = nullptr;
        std::array<double, 3> diffs = {0, 0, 0};
        node_operator(g, v, idx, frames, &active, &diffs);
        rhs_vec[r] = rhs[idx] - op[idx];
        // Clamp-regularized product rule: flat factors get a small positive
        // floor so the row never vanishes and the matrix stays an M-matrix.
        const double eps_c =
            std::max(1e-12, 1e-7 * std::pow(rhs[idx], 1.0 / d));
        const auto c = g.coords(idx);
        double diag = 0;
        for (int k = 0; k < d; ++k) {
            double partial = active->inv_len2[k];
            for (int j = 0; j < d; ++j)
                if (j != k) partial *= std::max(diffs[j], eps_c);
            std::size_t plus = 0, minus = 0;
            offset_pair(g, c, active->dirs[k], plus, minus);
            diag -= 2.0 * partial;
            if (eq[plus] >= 0)
                trips.emplace_back(r, static_cast<int>(eq[plus]), partial);
            if (eq[minus] >= 0)
                trips.emplace_back(r, static_cast<int>(eq[minus]), partial);
        }
        trips.emplace_back(r, r, diag);
    }
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd delta;
    bool ok = false;
    if (d <= 2) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
        if (lu.info() == Eigen::Success) {
            delta = lu.solve(rhs_vec);
            ok = lu.info() == Eigen::Success;
        }
    } else {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                        Eigen::IncompleteLUT<double>>
            it(J);
        it.setTolerance(1e-10);
        it.setMaxIterations(600);
        delta = it.solve(rhs_vec);
        ok = it.info() == Eigen::Success;
    }
    if (!ok || !delta.allFinite()) {
        // Jacobi direction: the diagonal is strictly negative, so this is
        // always defined and still a descent direction for the residual.
        delta.resize(n);
        for (int r = 0; r < n; ++r) delta[r] = rhs_vec[r] / J.coeff(r, r);
    }
    return delta;
}

}  // namespace

DirichletProblem make_problem(std::shared_ptr<const Grid> grid,
                              const std::function<double(const Vec3&)>& f,
                              const std::function<double(const Vec3&)>& phi,
                              int stencil_radius) {
    if (!grid) throw std::invalid_argument("make_problem: null grid");
    DirichletProblem p;
    p.grid = grid;
    p.stencil_radius = stencil_radius;
    p.rhs.assign(grid->size(), kNaN);
    p.boundary.assign(grid->size(), kNaN);
    p.rhs_floor = std::numeric_limits<double>::infinity();
    for (std::size_t idx : grid->interior_nodes()) {
        const double v = f(grid->position(idx));
        if (!(v > 0) || !std::isfinite(v))
            throw std::invalid_argument(
                "make_problem: rhs must be strictly positive and finite");
        p.rhs[idx] = v;
        p.rhs_floor = std::min(p.rhs_floor, v);
    }
    for (std::size_t idx : grid->boundary_nodes()) {
        const double v = phi(grid->position(idx));
        if (!std::isfinite(v))
            throw std::invalid_argument("make_problem: boundary data must be finite");
        p.boundary[idx] = v;
    }
    if (grid->interior_nodes().empty()) p.rhs_floor = 0;
    return p;
}

std::vector<double> discrete_ma_operator(const ConvexGridFunction& u,
                                         int stencil_radius) {
    const Grid& g = u.grid();
    const auto frames = build_frames(g, stencil_radius);
    std::vector<double> out(g.size(), kNaN);
    const auto& interior = g.interior_nodes();
    parallel_for(interior.size(), [&](std::size_t t) {
        const std::size_t idx = interior[t];
        out[idx] = node_operator(g, u.values(), idx, frames);
    });
    return out;
}

SolveResult solve_dirichlet(const DirichletProblem& p, double tol_residual,
                            int max_iter) {
    if (!p.grid) throw std::invalid_argument("solve_dirichlet: null grid");
    const Grid& g = *p.grid;
    const int d = g.dim();
    if (p.rhs.size() != g.size() || p.boundary.size() != g.size())
        throw std::invalid_argument("solve_dirichlet: field size mismatch");
    if (tol_residual < 0) tol_residual = d >= 3 ? 1e-6 : 1e-8;

    const auto frames = build_frames(g, p.stencil_radius);
    const auto& interior = g.interior_nodes();
    std::vector<long long> eq(g.size(), -1);
    for (std::size_t r = 0; r < interior.size(); ++r)
        eq[interior[r]] = static_cast<long long>(r);

    std::vector<double> v = poisson_guess(g, p.rhs, p.boundary);
    {
        // The linear seed is not convex near corners, which leaves clamped
        // zero products the Newton direction cannot unclamp. Its envelope
        // is, and keeping the original boundary values keeps the problem.
        auto env = lower_convex_envelope(v, p.grid);
        std::vector<double> ev = env.values();
        for (std::size_t idx : g.boundary_nodes()) ev[idx] = p.boundary[idx];
        v = std::move(ev);
    }
    std::vector<double> op(g.size(), kNaN);
    double r_cur = residual_field(g, v, p.rhs, frames, op);

    SolverReport report;
    report.residual_history.push_back(r_cur);

    while (r_cur > tol_residual && report.iterations < max_iter) {
        const Eigen::VectorXd delta = newton_step(g, v, p.rhs, frames, op, eq);

        std::vector<double> trial = v;
        std::vector<double> op_trial(g.size(), kNaN);
        double alpha = 1.0;
        bool accepted = false;
        double r_try = r_cur;
        for (int halving = 0; halving < 30; ++halving) {
            for (std::size_t r = 0; r < interior.size(); ++r)
                trial[interior[r]] =
                    v[interior[r]] + alpha * delta[static_cast<Eigen::Index>(r)];
            r_try = residual_field(g, trial, p.rhs, frames, op_trial);
            // Demand a real decrease: micro-improvements at tiny fractions
            // are better handled by the relaxation fallback.
            if (std::isfinite(r_try) &&
                (r_try < r_cur * (1.0 - 1e-4) || r_try <= tol_residual)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (accepted) {
            v.swap(trial);
            op.swap(op_trial);
            r_cur = r_try;
            report.damping_history.push_back(alpha);
        } else {
            // No Newton fraction helped: nodewise relaxation converges
            // globally for this monotone scheme, but its max residual can
            // rise transiently before it falls, so sweep patiently and keep
            // only a genuinely better state.
            std::vector<double> sweep = v;
            bool improved = false;
            for (int s = 0; s < 200 && !improved; ++s) {
                relaxation_sweep(g, sweep, p.rhs, frames);
                const double r_sweep =
                    residual_field(g, sweep, p.rhs, frames, op_trial);
                if (r_sweep < r_cur) {
                    v.swap(sweep);
                    op.swap(op_trial);
                    r_cur = r_sweep;
                    report.damping_history.push_back(0.0);
                    improved = true;
                }
            }
            if (!improved) break;  // genuine stall, report honestly
        }
        report.residual_history.push_back(r_cur);
        ++report.iterations;
    }
    report.converged = r_cur <= tol_residual;

    FunctionMetadata meta;
    meta.lambda = p.rhs_floor;
    for (std::size_t idx : interior)
        meta.Lambda = std::max(meta.Lambda, p.rhs[idx]);

    ConvexGridFunction u(p.grid, std::move(v), meta, false);
    const auto witness = is_discretely_convex(u);
    if (witness.convex) {
        u = u.with_certificate(true);
    } else {
        u = lower_convex_envelope(u.values(), p.grid, meta);
        report.convexified = true;
    }
    return {std::move(u), std::move(report)};
}

}  // namespace malab
