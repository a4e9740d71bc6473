#include "malab/sections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace malab {

namespace {

double cell_volume(const Grid& g) {
    double v = 1;
    for (int a = 0; a < g.dim(); ++a) v *= g.spec().spacing[a];
    return v;
}

// Support-plane tolerance for the base slope: generous enough to accept the
// slack-certified output of default_subgradient, tight enough to reject a
// slope that is not a subgradient at all.
double slope_tolerance(const ConvexGridFunction& u) {
    return 1e-6 * std::max(1.0, u.sup_norm());
}

bool node_is_member(const ConvexGridFunction& u, std::size_t node, const Vec3& x,
                    double ux, const Vec3& p, double h, std::size_t idx) {
    if (idx == node) return true;  // u(x) < u(x) + h always
    const Grid& g = u.grid();
    Vec3 d = g.position(idx) - x;
    if (g.dim() < 3) d.z() = 0;
    return u.value(idx) < ux + p.dot(d) + h;
}

// A member within one cell of the domain surface counts as touching: the
// continuum section through it would poke outside. The base node itself is
// exempt from the buffer (a first-shell interior node must still be allowed
// to carry small sections), but an actual boundary base still touches.
bool touches_boundary(const Grid& g, std::size_t idx, std::size_t base) {
    if (g.is_boundary(idx)) return true;
    return idx != base && g.boundary_distance(idx) <= g.spacing_max();
}

void check_slope(const ConvexGridFunction& u, std::size_t node, const Vec3& p,
                 double h) {
    const Grid& g = u.grid();
    const Vec3 x = g.position(node);
    const double ux = u.value(node);
    // a support slack far below the section height only perturbs the member
    // set by a sliver, so scale the acceptance with h
    const double tol = std::max(slope_tolerance(u), 5e-3 * h);
    for (std::size_t idx : g.domain_nodes()) {
        if (idx == node) continue;
        Vec3 d = g.position(idx) - x;
        if (g.dim() < 3) d.z() = 0;
        if (u.value(idx) - ux - p.dot(d) < -tol)
            throw std::invalid_argument(
                "extract_section: slope is not a subgradient at the base node");
    }
}

// Membership-and-containment scan without hull or ellipsoid work; used by
// the maximal-height bisection where only the flag matters.
bool section_compactly_contained(const ConvexGridFunction& u, std::size_t node,
                                 const Vec3& p, double h) {
    const Grid& g = u.grid();
    const Vec3 x = g.position(node);
    const double ux = u.value(node);
    for (std::size_t idx : g.domain_nodes()) {
        if (!node_is_member(u, node, x, ux, p, h, idx)) continue;
        if (touches_boundary(g, idx, node)) return false;
    }
    return true;
}

Ellipsoid segment_ellipsoid(const Vec3& a, const Vec3& b, int dim) {
    Ellipsoid e;
    e.dim = dim;
    e.center = 0.5 * (a + b);
    const Vec3 d = b - a;
    const double L = d.norm();
    e.rank = L > 0 ? 1 : 0;
    if (L > 0) {
        const Vec3 t = d / L;
        e.axes.col(0) = t;
        // complete an orthonormal frame
        Vec3 u = std::abs(t.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
        const Vec3 n1 = t.cross(u).normalized();
        e.axes.col(1) = n1;
        e.axes.col(2) = t.cross(n1);
        e.semi = Vec3(0.5 * L, 0, 0);
        e.shape = (0.25 * L * L) * t * t.transpose();
    }
    e.ok = true;
    e.outer_ratio = 1.0;
    return e;
}

std::pair<std::size_t, std::size_t> farthest_pair(const std::vector<Vec3>& pts) {
    std::size_t bi = 0, bj = 0;
    double best = -1;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i; j < pts.size(); ++j) {
            const double d = (pts[i] - pts[j]).squaredNorm();
            if (d > best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    return {bi, bj};
}

Ellipsoid john_planar(const std::vector<Vec2>& poly, const Eigen::Matrix<double, 3, 2>& basis,
                      const Vec3& origin3, int ambient_dim) {
    // poly is a CCW convex polygon in the (basis, origin3) chart
    const Vec2 c2 = polygon_centroid(poly);
    std::vector<Halfspace> hs;
    for (const auto& hp : polygon_halfplanes(poly))
        hs.push_back({Vec3(hp.n.x(), hp.n.y(), 0), hp.c});
    Ellipsoid flat = mvie_fixed_center(hs, Vec3(c2.x(), c2.y(), 0), 2);

    Ellipsoid e;
    e.dim = ambient_dim;
    e.rank = flat.ok ? 2 : 0;
    e.ok = flat.ok;
    e.gap = flat.gap;
    e.iterations = flat.iterations;
    e.center = origin3 + basis * Eigen::Vector2d(c2.x(), c2.y());
    if (!flat.ok) return e;
    for (int k = 0; k < 2; ++k) {
        const Eigen::Vector2d a2 = flat.axes.col(k).head<2>();
        e.axes.col(k) = basis * a2;
        e.semi[k] = flat.semi[k];
    }
    e.axes.col(2) = e.axes.col(0).cross(e.axes.col(1));
    e.semi[2] = 0;
    e.shape.setZero();
    for (int k = 0; k < 2; ++k)
        e.shape += (e.semi[k] * e.semi[k]) * e.axes.col(k) * e.axes.col(k).transpose();
    double worst = 0;
    for (const auto& q : poly)
        worst = std::max(worst, flat.gauge(Vec3(q.x(), q.y(), 0)));
    e.outer_ratio = worst;
    return e;
}

}  // namespace

Ellipsoid john_ellipsoid(const std::vector<Vec3>& points, int dim) {
    if (points.empty()) throw std::invalid_argument("john_ellipsoid: no points");
    Ellipsoid e;
    e.dim = dim;

    if (dim == 2) {
        std::vector<Vec2> flat;
        flat.reserve(points.size());
        for (const auto& p : points) flat.emplace_back(p.x(), p.y());
        const auto hull = hull2d(flat);
        if (hull.size() <= 2) {
            const auto [i, j] = farthest_pair(points);
            return segment_ellipsoid(points[i], points[j], dim);
        }
        Eigen::Matrix<double, 3, 2> basis;
        basis.setZero();
        basis(0, 0) = 1;
        basis(1, 1) = 1;
        e = john_planar(hull, basis, Vec3::Zero(), 2);
        return e;
    }

    const Hull3 h = hull3d(points);
    if (h.rank <= 1) {
        const auto [i, j] = farthest_pair(points);
        return segment_ellipsoid(points[i], points[j], dim);
    }
    if (h.rank == 2) {
        // project onto the hull plane and solve in two dimensions
        const Vec3 n = h.normals.front();
        Vec3 u = std::abs(n.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
        const Vec3 t1 = n.cross(u).normalized();
        const Vec3 t2 = n.cross(t1);
        const Vec3 o = h.vertices.front();
        std::vector<Vec2> flat;
        for (const auto& p : h.vertices)
            flat.emplace_back(t1.dot(p - o), t2.dot(p - o));
        const auto hull = hull2d(flat);
        if (hull.size() <= 2) {
            const auto [i, j] = farthest_pair(points);
            return segment_ellipsoid(points[i], points[j], dim);
        }
        Eigen::Matrix<double, 3, 2> basis;
        basis.col(0) = t1;
        basis.col(1) = t2;
        return john_planar(hull, basis, o, 3);
    }

    std::vector<Halfspace> hs;
    hs.reserve(h.normals.size());
    for (std::size_t f = 0; f < h.normals.size(); ++f)
        hs.push_back({h.normals[f], h.offsets[f]});
    e = mvie_fixed_center(hs, h.centroid, 3);
    if (e.ok) {
        double worst = 0;
        for (const auto& v : h.vertices) worst = std::max(worst, e.gauge(v));
        e.outer_ratio = worst;
    }
    return e;
}

SectionDescriptor extract_section(const ConvexGridFunction& u, std::size_t node,
                                  const Vec3& p, double h) {
    const Grid& g = u.grid();
    if (!g.in_domain(node))
        throw std::invalid_argument("extract_section: base node not in domain");
    if (!(h > 0)) throw std::invalid_argument("extract_section: height must be positive");
    check_slope(u, node, p, h);

    SectionDescriptor s;
    s.base_node = node;
    s.base_point = g.position(node);
    s.slope = p;
    s.height = h;

    const Vec3 x = s.base_point;
    const double ux = u.value(node);
    bool compact = true;
    for (std::size_t idx : g.domain_nodes()) {
        if (!node_is_member(u, node, x, ux, p, h, idx)) continue;
        s.member_nodes.push_back(idx);
        if (compact && touches_boundary(g, idx, node)) compact = false;
    }
    s.compactly_contained = compact;
    s.volume = static_cast<double>(s.member_nodes.size()) * cell_volume(g);

    std::vector<Vec3> pts;
    pts.reserve(s.member_nodes.size());
    for (std::size_t idx : s.member_nodes) {
        Vec3 q = g.position(idx);
        if (g.dim() < 3) q.z() = 0;
        pts.push_back(q);
    }
    if (g.dim() == 1) {
        const auto [i, j] = farthest_pair(pts);
        s.hull = i == j ? std::vector<Vec3>{pts[i]}
                        : std::vector<Vec3>{pts[i], pts[j]};
        s.hull_volume = (pts[j] - pts[i]).norm();
        s.john = segment_ellipsoid(pts[i], pts[j], 1);
        return s;
    }
    if (g.dim() == 2) {
        std::vector<Vec2> flat;
        for (const auto& q : pts) flat.emplace_back(q.x(), q.y());
        const auto hull = hull2d(flat);
        for (const auto& q : hull) s.hull.emplace_back(q.x(), q.y(), 0);
        s.hull_volume = hull.size() >= 3 ? polygon_area(hull) : 0.0;
    } else {
        const Hull3 hl = hull3d(pts);
        s.hull = hl.vertices;
        s.hull_volume = hl.rank == 3 ? hl.volume : 0.0;
    }
    if (!s.hull.empty()) s.john = john_ellipsoid(s.hull, g.dim());
    return s;
}

MaximalHeight maximal_height(const ConvexGridFunction& u, std::size_t node) {
    const Grid& g = u.grid();
    if (!g.in_domain(node))
        throw std::invalid_argument("maximal_height: node not in domain");
    MaximalHeight out;
    out.slope = default_subgradient(u, node);

    const double K = u.height_scale();
    const double floor = 1e-12 * std::max(1.0, K);
    double lo = 0, hi = 2.0 * K;
    if (hi <= floor) {
        // flat function: every section is the whole domain
        out.singular = !section_compactly_contained(u, node, out.slope, floor);
        out.hbar = 0;
        return out;
    }
    if (section_compactly_contained(u, node, out.slope, hi)) {
        out.hbar = hi;
        return out;
    }
    while (hi - lo > 1e-6 * hi + floor) {
        const double mid = 0.5 * (lo + hi);
        if (section_compactly_contained(u, node, out.slope, mid))
            lo = mid;
        else
            hi = mid;
    }
    out.hbar = lo;
    if (lo <= floor) {
        out.hbar = 0;
        out.singular = true;
    }
    return out;
}

RestrictionFunction restrict_to_hyperplane(const ConvexGridFunction& u, int axis,
                                           double offset) {
    const Grid& g = u.grid();
    const int d = g.dim();
    if (d < 2)
        throw std::invalid_argument("restrict_to_hyperplane: need dimension >= 2");
    if (axis < 0 || axis >= d)
        throw std::invalid_argument("restrict_to_hyperplane: axis out of range");

    // snap to the nearest lattice layer
    const double t = (offset - g.spec().origin[axis]) / g.spec().spacing[axis];
    const int layer = std::clamp(static_cast<int>(std::lround(t)), 0,
                                 g.spec().counts[axis] - 1);
    const double snapped =
        g.spec().origin[axis] + layer * g.spec().spacing[axis];

    GridSpec sub;
    sub.dim = d - 1;
    int keep[2] = {0, 0};
    {
        int k = 0;
        for (int a = 0; a < d; ++a)
            if (a != axis) keep[k++] = a;
    }
    for (int a = 0; a < d - 1; ++a) {
        sub.counts[a] = g.spec().counts[keep[a]];
        sub.origin[a] = g.spec().origin[keep[a]];
        sub.spacing[a] = g.spec().spacing[keep[a]];
    }
    switch (g.spec().shape) {
        case DomainShape::Box:
            sub.shape = DomainShape::Box;
            for (int a = 0; a < d - 1; ++a)
                sub.shape_params[a] = g.spec().shape_params[keep[a]];
            break;
        case DomainShape::Ball: {
            const double R = g.spec().shape_params[0];
            const double c = g.center()[axis];
            const double r2 = R * R - (snapped - c) * (snapped - c);
            if (r2 <= 0)
                throw std::invalid_argument(
                    "restrict_to_hyperplane: layer misses the ball");
            sub.shape = DomainShape::Ball;
            sub.shape_params[0] = std::sqrt(r2);
            break;
        }
        case DomainShape::Cylinder: {
            // axis of the cylinder is the last coordinate
            if (axis != d - 1)
                throw std::invalid_argument(
                    "restrict_to_hyperplane: cylinder cut must be along the axis");
            sub.shape = DomainShape::Ball;
            sub.shape_params[0] = g.spec().shape_params[0];
            break;
        }
    }
    auto sub_grid = std::make_shared<Grid>(sub);

    std::vector<double> vals(sub_grid->size(),
                             std::numeric_limits<double>::quiet_NaN());
    for (std::size_t si = 0; si < sub_grid->size(); ++si) {
        if (!sub_grid->in_domain(si)) continue;
        const auto sc = sub_grid->coords(si);
        int full[3] = {0, 0, 0};
        full[keep[0]] = sc[0];
        if (d == 3) full[keep[1]] = sc[1];
        full[axis] = layer;
        const std::size_t pi = g.index(full[0], full[1], full[2]);
        if (!g.in_domain(pi))
            throw std::runtime_error(
                "restrict_to_hyperplane: sub-grid node outside the parent domain");
        vals[si] = u.value(pi);
    }

    RestrictionFunction r{
        ConvexGridFunction(std::move(sub_grid), std::move(vals), u.meta(), false),
        axis, snapped, 0.0};

    // parent maximal height at the layer node nearest the domain center
    const Vec3 c = g.center();
    int full[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
        const double s = (c[a] - g.spec().origin[a]) / g.spec().spacing[a];
        full[a] = std::clamp(static_cast<int>(std::lround(s)), 0,
                             g.spec().counts[a] - 1);
    }
    full[axis] = layer;
    const std::size_t base = g.index(full[0], full[1], full[2]);
    if (g.in_domain(base)) r.hbar_parent = maximal_height(u, base).hbar;
    return r;
}

std::vector<double> axis_lengths(const RestrictionFunction& w, std::size_t node,
                                 double h) {
    const Vec3 p = default_subgradient(w.function, node);
    const SectionDescriptor s = extract_section(w.function, node, p, h);
    if (s.empty() || s.hull.empty())
        throw std::runtime_error("axis_lengths: empty section");
    const int d = w.function.grid().dim();
    std::vector<double> out;
    for (int k = 0; k < d; ++k) out.push_back(2.0 * s.john.semi[k]);
    return out;
}

double breadth(const ConvexGridFunction& u, std::size_t node, double h) {
    const Vec3 p = default_subgradient(u, node);
    const SectionDescriptor s = extract_section(u, node, p, h);
    if (s.hull.empty()) throw std::runtime_error("breadth: empty section");
    const int d = u.grid().dim();
    double best = std::numeric_limits<double>::infinity();
    if (d == 2) {
        std::vector<Vec2> flat;
        for (const auto& q : s.hull) flat.emplace_back(q.x(), q.y());
        for (const auto& dir : planar_directions(720))
            best = std::min(best, width_along2(flat, dir));
    } else {
        for (const auto& dir : sphere_directions(4))
            best = std::min(best, width_along(s.hull, dir));
    }
    return best;
}

bool property_F(const RestrictionFunction& w, std::size_t node, double h) {
    const Vec3 y = w.function.grid().position(node);
    const Vec3 p = default_subgradient(w.function, node);
    Vec3 my = -y;
    if (w.function.grid().dim() < 3) my.z() = 0;
    return w.function.value(node) + p.dot(my) + h >= w.hbar_parent;
}

VolumeGrowthReport verify_volume_growth(const ConvexGridFunction& u,
                                        std::size_t node,
                                        const std::vector<double>& heights) {
    const Vec3 p = default_subgradient(u, node);
    const double half_dim = 0.5 * u.grid().dim();
    VolumeGrowthReport rep;
    for (double h : heights) {
        const SectionDescriptor s = extract_section(u, node, p, h);
        rep.heights.push_back(h);
        rep.ratios.push_back(s.volume / std::pow(h, half_dim));
    }
    // flag monotone blow-up: every step increases (5% slack) and the overall
    // growth exceeds one order of magnitude
    if (rep.ratios.size() >= 2) {
        bool increasing = true;
        for (std::size_t i = 1; i < rep.ratios.size(); ++i)
            if (rep.ratios[i] < 0.95 * rep.ratios[i - 1]) increasing = false;
        rep.unbounded_flag =
            increasing && rep.ratios.back() > 10.0 * rep.ratios.front();
    }
    return rep;
}

BalancingReport verify_balancing(const ConvexGridFunction& u, std::size_t node,
                                 double h) {
    const Vec3 p = default_subgradient(u, node);
    const SectionDescriptor s = extract_section(u, node, p, h);
    if (!s.compactly_contained)
        throw std::invalid_argument(
            "verify_balancing: section not compactly contained");
    if (!s.john.ok || s.john.rank < u.grid().dim())
        throw std::runtime_error("verify_balancing: degenerate section");
    const Vec3 x = s.base_point;
    const int d = u.grid().dim();

    // inner scale: shrink E (centered at 0) until it fits in S - x
    double c = std::numeric_limits<double>::infinity();
    if (d == 2) {
        std::vector<Vec2> flat;
        for (const auto& q : s.hull) flat.emplace_back(q.x(), q.y());
        for (const auto& hp : polygon_halfplanes(flat)) {
            const Vec3 a(hp.n.x(), hp.n.y(), 0);
            const double b = hp.c - a.dot(x);
            const double r = std::sqrt(a.dot(s.john.shape * a));
            if (r > 0) c = std::min(c, b / r);
        }
    } else {
        const Hull3 hl = hull3d(s.hull);
        for (std::size_t f = 0; f < hl.normals.size(); ++f) {
            const Vec3 a = hl.normals[f];
            const double b = hl.offsets[f] - a.dot(x);
            const double r = std::sqrt(a.dot(s.john.shape * a));
            if (r > 0) c = std::min(c, b / r);
        }
    }

    // outer scale: grow E until it swallows every hull vertex
    Ellipsoid centered = s.john;
    centered.center = x;
    double C = 0;
    for (const auto& v : s.hull) C = std::max(C, centered.gauge(v));

    return {c, C};
}

double verify_engulfing(const ConvexGridFunction& u, std::size_t node, double h,
                        const std::vector<double>& delta_grid) {
    const Grid& g = u.grid();
    const Vec3 p = default_subgradient(u, node);
    const SectionDescriptor big = extract_section(u, node, p, h);
    if (!big.compactly_contained)
        throw std::invalid_argument(
            "verify_engulfing: section not compactly contained");
    std::unordered_set<std::size_t> members(big.member_nodes.begin(),
                                            big.member_nodes.end());
    const auto bc = g.coords(node);

    auto half_contains = [&](const SectionDescriptor& small) {
        for (std::size_t idx : small.member_nodes) {
            const auto yc = g.coords(idx);
            int rc[3] = {0, 0, 0};
            bool on_grid = true;
            for (int a = 0; a < 3; ++a) {
                rc[a] = 2 * yc[a] - bc[a];  // x + 2(y - x), exact on the lattice
                if (rc[a] < 0 || rc[a] >= g.spec().counts[a]) on_grid = false;
            }
            if (!on_grid) return false;
            const std::size_t r = g.index(rc[0], rc[1], rc[2]);
            if (!members.count(r)) return false;
        }
        return true;
    };

    std::vector<double> deltas = delta_grid;
    std::sort(deltas.begin(), deltas.end());
    double best = 0;
    for (double d : deltas) {
        if (!(d > 0) || d >= 1) continue;
        const SectionDescriptor small = extract_section(u, node, p, d * h);
        if (half_contains(small)) best = d;
    }
    return best;
}

VitaliReport vitali_subcover(const std::vector<Ball>& balls) {
    VitaliReport rep;
    std::vector<std::size_t> order(balls.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return balls[a].radius > balls[b].radius;
    });
    for (std::size_t i : order) {
        bool disjoint = true;
        for (std::size_t j : rep.selected)
            if ((balls[i].center - balls[j].center).norm() <
                balls[i].radius + balls[j].radius) {
                disjoint = false;
                break;
            }
        if (disjoint) rep.selected.push_back(i);
    }
    rep.disjoint = true;
    // every ball meets a selected ball at least as large, so the 5x dilation
    // of that selected ball covers it
    rep.covered = true;
    for (std::size_t i = 0; i < balls.size(); ++i) {
        bool ok = false;
        for (std::size_t j : rep.selected) {
            const double d = (balls[i].center - balls[j].center).norm();
            if (d + balls[i].radius <= 5.0 * balls[j].radius) {
                ok = true;
                break;
            }
        }
        if (!ok) rep.covered = false;
    }
    return rep;
}

VitaliReport vitali_subcover(const ConvexGridFunction& u,
                             const std::vector<SectionDescriptor>& sections,
                             double delta_star) {
    if (!(delta_star > 0) || delta_star >= 1)
        throw std::invalid_argument("vitali_subcover: delta_star must lie in (0,1)");
    VitaliReport rep;
    std::vector<std::size_t> order(sections.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sections[a].height > sections[b].height;
    });

    std::unordered_set<std::size_t> taken;
    for (std::size_t i : order) {
        bool disjoint = true;
        for (std::size_t idx : sections[i].member_nodes)
            if (taken.count(idx)) {
                disjoint = false;
                break;
            }
        if (!disjoint) continue;
        rep.selected.push_back(i);
        for (std::size_t idx : sections[i].member_nodes) taken.insert(idx);
    }
    rep.disjoint = true;

    std::unordered_set<std::size_t> covered;
    for (std::size_t j : rep.selected) {
        const SectionDescriptor dil =
            extract_section(u, sections[j].base_node, sections[j].slope,
                            sections[j].height / delta_star);
        for (std::size_t idx : dil.member_nodes) covered.insert(idx);
    }
    rep.covered = true;
    for (const auto& s : sections)
        for (std::size_t idx : s.member_nodes)
            if (!covered.count(idx)) {
                rep.covered = false;
                return rep;
            }
    return rep;
}

}  // namespace malab
