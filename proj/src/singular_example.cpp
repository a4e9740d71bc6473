#include "malab/singular_example.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "malab/sections.hpp"

namespace malab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ell(double t) { return -std::log(t); }

// x1 profile t^2 (-log t)^alpha on t = |x1| and its two derivatives.
struct Profile1 {
    double value = 0, d1 = 0, d2 = kInf;
};
Profile1 profile1(double x, int alpha) {
    Profile1 p;
    if (x == 0) {
        p.value = 0;
        p.d1 = 0;
        return p;  // second derivative diverges at the axis
    }
    const double l = ell(std::fabs(x));
    const double la2 = std::pow(l, alpha - 2);
    p.value = x * x * la2 * l * l;
    p.d1 = x * la2 * l * (2 * l - alpha);
    p.d2 = la2 * (2 * l * l - 3 * alpha * l + alpha * (alpha - 1));
    return p;
}

// x2 profile t (-log t)^-beta on t = |x2| and its two derivatives.
struct Profile2 {
    double value = 0, d1 = 0, d2 = kInf;
};
Profile2 profile2(double x, int beta) {
    Profile2 p;
    if (x == 0) {
        p.value = 0;
        p.d1 = 0;  // one-sided slopes vanish: t (-log t)^-beta is C^1 at 0
        return p;
    }
    const double s = x >= 0 ? 1.0 : -1.0;
    const double t = std::fabs(x);
    const double l = ell(t);
    const double lb = std::pow(l, -beta);
    p.value = t * lb;
    p.d1 = s * lb * (1 + beta / l);
    p.d2 = lb * beta * (l + beta + 1) / (t * l * l);
    return p;
}

// Lift ratio q(t) = t / (-log t) with derivatives; q'' > 0 on (0, 1).
double q0(double t) { return t == 0 ? 0 : t / ell(t); }
double q1(double t) {
    if (t == 0) return 0;
    const double l = ell(t);
    return (l + 1) / (l * l);
}
double q2(double t) {
    const double l = ell(t);
    return (l + 2) / (t * l * l * l);
}

void check_mapped(const SubsolutionW& w, double m1, double m2) {
    if (std::fabs(m1) > w.r0 || std::fabs(m2) > w.r0)
        throw std::domain_error(
            "subsolution: mapped |x1|, |x2| must stay within r0");
}

double g_raw(double m1, double m2, int alpha, int beta) {
    return profile1(m1, alpha).value + profile2(m2, beta).value;
}

}  // namespace

void validate(const SubsolutionW& w) {
    const bool ok = w.scale > 0 && w.rho > 0 && w.rho <= 1 && w.rho3 > 0 &&
                    w.rho3 <= 1 && w.r0 > 0 && w.r0 < 1 && w.beta >= 1 &&
                    w.alpha == 2 + 2 * w.beta;
    if (!ok)
        throw std::invalid_argument(
            "subsolution: need positive scale, shrink factors in (0,1], "
            "r0 in (0,1) and alpha = 2 + 2 beta");
}

double ratio_profile(double t) {
    if (t < 0 || t >= 1)
        throw std::domain_error("ratio_profile: argument outside [0, 1)");
    return q0(t);
}

double g_eval(const SubsolutionW& w, double x1, double x2) {
    validate(w);
    const double m1 = w.rho * x1, m2 = w.rho * x2;
    check_mapped(w, m1, m2);
    return w.scale * g_raw(m1, m2, w.alpha, w.beta);
}

double w_eval(const SubsolutionW& w, const Vec3& x) {
    validate(w);
    const double m1 = w.rho * x[0], m2 = w.rho * x[1], m3 = w.rho3 * x[2];
    check_mapped(w, m1, m2);
    if (std::fabs(m3) > 1)
        throw std::domain_error("subsolution: mapped |x3| must stay within 1");
    const double g = g_raw(m1, m2, w.alpha, w.beta);
    return w.scale * (g + m3 * m3 * q0(g));
}

HessianSample w_hessian(const SubsolutionW& w, const Vec3& x) {
    validate(w);
    const double m1 = w.rho * x[0], m2 = w.rho * x[1], m3 = w.rho3 * x[2];
    check_mapped(w, m1, m2);
    if (std::fabs(m3) > 1)
        throw std::domain_error("subsolution: mapped |x3| must stay within 1");

    HessianSample out;
    out.degenerate = std::fabs(m1) <= kAxisMargin || std::fabs(m2) <= kAxisMargin;

    const Profile1 pa = profile1(m1, w.alpha);
    const Profile2 pb = profile2(m2, w.beta);
    const double g = pa.value + pb.value;
    const double lift = 1 + m3 * m3 * q1(g);
    const double cross = g == 0 ? kInf : m3 * m3 * q2(g);

    Mat3 H;
    // Diagonal x1/x2 entries diverge on the axes; the profile structs carry
    // +infinity there and the mixed entries keep their one-sided limits
    // (the first derivatives vanish on the axes).
    H(0, 0) = pa.d2 * lift + (pa.d1 == 0 ? 0.0 : cross * pa.d1 * pa.d1);
    H(1, 1) = pb.d2 * lift + (pb.d1 == 0 ? 0.0 : cross * pb.d1 * pb.d1);
    H(0, 1) = H(1, 0) =
        pa.d1 == 0 || pb.d1 == 0 ? 0.0 : cross * pa.d1 * pb.d1;
    H(0, 2) = H(2, 0) = 2 * m3 * q1(g) * pa.d1;
    H(1, 2) = H(2, 1) = 2 * m3 * q1(g) * pb.d1;
    H(2, 2) = 2 * q0(g);

    Eigen::DiagonalMatrix<double, 3> D(w.rho, w.rho, w.rho3);
    out.matrix = w.scale * (D * H * D);
    return out;
}

Mat3 w_hessian_fd(const SubsolutionW& w, const Vec3& x, double step_scale) {
    validate(w);
    if (!(step_scale > 0))
        throw std::invalid_argument("w_hessian_fd: step_scale must be positive");
    auto f = [&](const Vec3& p) { return w_eval(w, p); };
    Mat3 H;
    for (int a = 0; a < 3; ++a) {
        const double ha = step_scale * std::max(std::fabs(x[a]), 0.01);
        Vec3 ea = Vec3::Zero();
        ea[a] = ha;
        H(a, a) = (f(x + ea) - 2 * f(x) + f(x - ea)) / (ha * ha);
        for (int b = a + 1; b < 3; ++b) {
            const double hb = step_scale * std::max(std::fabs(x[b]), 0.01);
            Vec3 eb = Vec3::Zero();
            eb[b] = hb;
            H(a, b) = H(b, a) = (f(x + ea + eb) - f(x + ea - eb) -
                                 f(x - ea + eb) + f(x - ea - eb)) /
                                (4 * ha * hb);
        }
    }
    return H;
}

double det_leading_terms(const SubsolutionW& w, const Vec3& x) {
    validate(w);
    const double m1 = std::fabs(w.rho * x[0]), m2 = std::fabs(w.rho * x[1]);
    check_mapped(w, m1, m2);
    if (m1 == 0 || m2 == 0)
        throw std::domain_error("det_leading_terms: axes excluded");
    const double l1 = ell(m1), l2 = ell(m2);
    const double lg = ell(g_raw(m1, m2, w.alpha, w.beta));
    const double t1 = m1 * m1 * std::pow(l1, 2 * w.alpha) /
                      (m2 * std::pow(l2, w.beta + 1) * lg);
    const double t2 =
        std::pow(l1, w.alpha) / (std::pow(l2, 1 + 2 * w.beta) * lg);
    const double map = std::pow(w.scale, 3) * std::pow(w.rho, 4) * w.rho3 *
                       w.rho3;
    return map * 4 * (t1 + t2);
}

double radical_inverse(std::uint64_t i, int base) {
    if (base < 2) throw std::invalid_argument("radical_inverse: base >= 2");
    double f = 1, out = 0;
    while (i) {
        f /= base;
        out += f * static_cast<double>(i % base);
        i /= base;
    }
    return out;
}

SubsolutionReport verify_subsolution(SubsolutionW& w, int sample_count,
                                     const SampleRegion& region) {
    validate(w);
    if (sample_count < 1)
        throw std::invalid_argument("verify_subsolution: need samples");
    if (!(region.margin > 0) || region.x1_hi <= region.margin ||
        region.x2_hi <= region.margin || !(region.x3_hi > 0))
        throw std::invalid_argument("verify_subsolution: malformed region");

    SubsolutionReport rep;
    rep.samples = sample_count;
    rep.min_det = kInf;
    rep.min_eigenvalue = kInf;
    for (int i = 1; i <= sample_count; ++i) {
        const Vec3 x(
            region.margin + (region.x1_hi - region.margin) * radical_inverse(i, 2),
            region.margin + (region.x2_hi - region.margin) * radical_inverse(i, 3),
            -region.x3_hi + 2 * region.x3_hi * radical_inverse(i, 5));
        const Mat3 H = w_hessian(w, x).matrix;
        const double det = H.determinant();
        const double emin =
            Eigen::SelfAdjointEigenSolver<Mat3>(H).eigenvalues()[0];
        rep.min_det = std::min(rep.min_det, det);
        if (emin < rep.min_eigenvalue) {
            rep.min_eigenvalue = emin;
            rep.worst_point = x;
        }
        if (emin < 0 && rep.indefinite_count++ == 0) rep.first_indefinite = x;
    }
    rep.ok = rep.indefinite_count == 0 && rep.min_det > 0;
    if (rep.ok && rep.min_det < 1)
        w.scale *= std::cbrt(1.0 / rep.min_det);
    rep.scale_used = w.scale;
    return rep;
}

SubsolutionW find_safe_scales(int sample_count) {
    SubsolutionW w;
    w.rho = 0.004;
    w.rho3 = 0.25;
    SampleRegion box;
    box.x1_hi = box.x2_hi = box.x3_hi = 1.0;
    const SubsolutionReport rep = verify_subsolution(w, sample_count, box);
    if (!rep.ok)
        throw std::logic_error(
            "find_safe_scales: indefinite sample inside the calibrated zone");
    return w;
}

double boundary_value(const BoundaryData& bd, const Vec3& x) {
    if (!bd.spike) throw std::invalid_argument("boundary data without spike");
    return bd.constant * (bd.spike->value(x[0]) + std::fabs(x[1]));
}

double boundary_phi(const BoundaryData& bd, const Vec3& x, double edge_tol) {
    const double radial = std::hypot(x[0], x[1]);
    const bool on_lid = std::fabs(std::fabs(x[2]) - 1) <= edge_tol &&
                        radial <= 1 + edge_tol;
    const bool on_side =
        std::fabs(radial - 1) <= edge_tol && std::fabs(x[2]) <= 1 + edge_tol;
    if (!on_lid && !on_side)
        throw std::invalid_argument("boundary_phi: point not on the surface");
    return boundary_value(bd, x);
}

double calibrate_boundary_constant(const SubsolutionW& w,
                                   const SpikeFunction& v,
                                   const std::vector<double>& shifts,
                                   const Grid* grid, int surface_samples) {
    validate(w);
    if (shifts.empty())
        throw std::invalid_argument("calibrate_boundary_constant: no shifts");

    struct Shift {
        double s, value, slope;
    };
    std::vector<Shift> ss;
    for (double s : shifts) {
        const SlopeInterval sg = v.subgradient(s);
        ss.push_back({s, v.value(s), 0.5 * (sg.lo + sg.hi)});
    }

    double needed = 0;
    int infeasible = 0;
    auto visit = [&](const Vec3& x) {
        for (const Shift& sh : ss) {
            const double lhs = v.value(x[0]) - sh.value -
                               sh.slope * (x[0] - sh.s) + std::fabs(x[1]);
            const double rhs = w_eval(w, Vec3(x[0] - sh.s, x[1], x[2]));
            if (lhs <= 1e-14) {
                if (rhs > 1e-12) ++infeasible;
                continue;
            }
            needed = std::max(needed, rhs / lhs);
        }
    };
    if (grid)
        for (std::size_t idx : grid->boundary_nodes()) visit(grid->position(idx));
    for (int i = 1; i <= surface_samples; ++i) {
        const double t = radical_inverse(i, 2);
        const double th = 2 * M_PI * radical_inverse(i, 3);
        const double z = -1 + 2 * radical_inverse(i, 5);
        if (i % 2)
            visit(Vec3(std::cos(th), std::sin(th), z));
        else
            visit(Vec3(std::sqrt(t) * std::cos(th), std::sqrt(t) * std::sin(th),
                       i % 4 ? 1.0 : -1.0));
    }
    if (infeasible > 0)
        throw std::runtime_error(
            "calibrate_boundary_constant: data vanishes where the subsolution "
            "does not; no constant works");
    double c = 1;
    while (c < needed) {
        c *= 2;
        if (c > 9.3e18)  // 2^63: the data constant has run away
            throw std::runtime_error(
                "calibrate_boundary_constant: constant search diverged");
    }
    return 2 * c;
}

std::vector<SnappedAbscissa> snap_endpoints(const SpikeFunction& v,
                                            const Grid& grid) {
    const GridSpec& spec = grid.spec();
    const double h = spec.spacing[0];
    const CantorLevel& level = v.cantor().level(v.depth());

    std::vector<SnappedAbscissa> out;
    auto add = [&](const Rational& e) {
        const double x = static_cast<double>(e);
        const int idx = static_cast<int>(std::lround((x - spec.origin[0]) / h));
        if (idx < 0 || idx >= spec.counts[0]) return;
        SnappedAbscissa s;
        s.exact = e;
        s.index = idx;
        s.snapped = spec.origin[0] + idx * h;
        s.offset = std::fabs(s.snapped - x);
        for (SnappedAbscissa& prev : out)
            if (prev.index == idx) {
                if (s.offset < prev.offset) prev = s;
                return;
            }
        out.push_back(s);
    };
    for (const auto& [lo, hi] : level.survivors) {
        add(lo);
        add(hi);
    }
    std::sort(out.begin(), out.end(),
              [](const SnappedAbscissa& a, const SnappedAbscissa& b) {
                  return a.index < b.index;
              });
    for (SnappedAbscissa& s : out) {
        const SlopeInterval sg = v.subgradient(s.snapped);
        const double mid = 0.5 * (sg.lo + sg.hi);
        const double vs = v.value(s.snapped);
        const double bend_left = v.value(s.snapped - h) - vs + mid * h;
        const double bend_right = v.value(s.snapped + h) - vs - mid * h;
        s.usable = std::min(bend_left, bend_right) >
                   1e-9 * std::max(1.0, std::fabs(mid)) * h;
    }
    return out;
}

std::vector<std::size_t> axis3_line(const Grid& g, int i, int j) {
    if (g.dim() != 3) throw std::invalid_argument("axis3_line: need dim 3");
    const auto& c = g.spec().counts;
    if (i < 0 || i >= c[0] || j < 0 || j >= c[1])
        throw std::invalid_argument("axis3_line: lattice index out of range");
    std::vector<std::size_t> out;
    for (int k = 0; k < c[2]; ++k) {
        const std::size_t idx = g.index(i, j, k);
        if (g.in_domain(idx)) out.push_back(idx);
    }
    return out;
}

namespace {

struct LineProbe {
    int interior = 0;
    int flagged = 0;
    double max_hbar = 0;
};

LineProbe probe_line(const ConvexGridFunction& u,
                     const std::vector<std::size_t>& line) {
    LineProbe p;
    const double floor = kLineFlagFraction * std::max(1.0, u.height_scale());
    for (std::size_t idx : line) {
        if (!u.grid().is_interior(idx)) continue;
        ++p.interior;
        const MaximalHeight mh = maximal_height(u, idx);
        p.max_hbar = std::max(p.max_hbar, mh.hbar);
        if (mh.singular || mh.hbar <= floor) ++p.flagged;
    }
    return p;
}

}  // namespace

int count_degenerate_line_nodes(const ConvexGridFunction& u, int i, int j,
                                int* line_total) {
    const LineProbe p = probe_line(u, axis3_line(u.grid(), i, j));
    if (line_total) *line_total = p.interior;
    return p.flagged;
}

ExampleAssembly assemble_example(std::shared_ptr<const Grid> grid, int depth,
                                 double boundary_constant) {
    if (!grid) throw std::invalid_argument("assemble_example: missing grid");
    const GridSpec& spec = grid->spec();
    const bool cylinder_ok =
        spec.dim == 3 && spec.shape == DomainShape::Cylinder &&
        std::fabs(spec.shape_params[0] - 1) <= 1e-12 &&
        std::fabs(spec.shape_params[1] - 1) <= 1e-12 &&
        grid->spacing_max() - grid->spacing_min() <= 1e-12 &&
        spec.counts[1] % 2 == 1;
    if (!cylinder_ok)
        throw std::invalid_argument(
            "assemble_example: need the unit cylinder on an isotropic lattice "
            "with odd axis-1 count");

    auto cantor = std::make_shared<CantorStructure>(build_cantor(depth));
    auto spike = std::make_shared<SpikeFunction>(cantor, depth);
    SubsolutionW w = find_safe_scales();

    std::vector<SnappedAbscissa> snapped = snap_endpoints(*spike, *grid);
    std::vector<double> shifts;
    for (const SnappedAbscissa& s : snapped)
        if (s.usable) shifts.push_back(s.snapped);
    if (shifts.empty())
        throw std::runtime_error(
            "assemble_example: no usable snapped endpoint on this lattice");

    BoundaryData bd{spike,
                    boundary_constant > 0
                        ? boundary_constant
                        : calibrate_boundary_constant(w, *spike, shifts,
                                                      grid.get())};

    DirichletProblem problem = make_problem(
        grid, [](const Vec3&) { return 1.0; },
        [&](const Vec3& x) { return boundary_value(bd, x); });
    SolveResult solved = solve_dirichlet(problem);
    const ConvexGridFunction& u = solved.solution;

    ExampleChecks checks;
    checks.solver_converged = solved.report.converged;

    const double h = grid->spacing_max();
    checks.comparison.tol = 5 * h;
    checks.comparison.worst_gap = -kInf;
    for (const SnappedAbscissa& s : snapped) {
        if (!s.usable) continue;
        const SlopeInterval sg = spike->subgradient(s.snapped);
        const double mid = 0.5 * (sg.lo + sg.hi);
        const double vs = spike->value(s.snapped);
        for (std::size_t idx : grid->domain_nodes()) {
            const Vec3 x = grid->position(idx);
            const double normalized =
                u.value(idx) - bd.constant * (vs + mid * (x[0] - s.snapped));
            const double ws = w_eval(w, Vec3(x[0] - s.snapped, x[1], x[2]));
            const double gap = ws - normalized;
            if (gap > checks.comparison.worst_gap) {
                checks.comparison.worst_gap = gap;
                checks.comparison.shift = s.snapped;
                checks.comparison.position = x;
            }
        }
    }
    checks.comparison.ok = checks.comparison.worst_gap <= checks.comparison.tol;

    const int j0 = (spec.counts[1] - 1) / 2;
    checks.all_affine = true;
    checks.all_flagged = true;
    for (const SnappedAbscissa& s : snapped) {
        if (!s.usable) continue;
        LineCheck lc;
        lc.abscissa = s.snapped;
        const std::vector<std::size_t> line = axis3_line(*grid, s.index, j0);
        lc.line_nodes = static_cast<int>(line.size());
        if (line.size() >= 2) {
            const std::size_t a = line.front(), b = line.back();
            const double ta = grid->position(a)[2], tb = grid->position(b)[2];
            const double ua = u.value(a), ub = u.value(b);
            for (std::size_t idx : line) {
                const double t = grid->position(idx)[2];
                const double chord = ua + (ub - ua) * (t - ta) / (tb - ta);
                lc.max_affine_deviation = std::max(
                    lc.max_affine_deviation, std::fabs(u.value(idx) - chord));
            }
        }
        lc.affine = lc.max_affine_deviation <= 5 * h;
        const LineProbe p = probe_line(u, line);
        lc.interior_nodes = p.interior;
        lc.flagged = p.flagged;
        lc.max_hbar = p.max_hbar;
        lc.all_flagged = p.interior > 0 && p.flagged == p.interior;
        checks.all_affine = checks.all_affine && lc.affine;
        checks.all_flagged = checks.all_flagged && lc.all_flagged;
        checks.lines.push_back(lc);
    }

    return ExampleAssembly{std::move(solved.solution), std::move(solved.report),
                           w, std::move(bd), std::move(snapped),
                           std::move(checks)};
}

}  // namespace malab
