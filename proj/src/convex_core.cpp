#include "malab/convex_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "malab/parallel.hpp"

namespace malab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative slack for support-function tests; round-off in u dominates.
constexpr double kSupportRel = 1e-10;

}  // namespace

ConvexGridFunction::ConvexGridFunction(std::shared_ptr<const Grid> grid,
                                       std::vector<double> values,
                                       FunctionMetadata meta, bool certified)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      meta_(meta),
      certified_(certified) {
    if (!grid_) throw std::invalid_argument("grid function: null grid");
    if (values_.size() != grid_->size())
        throw std::invalid_argument("grid function: value count mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (grid_->in_domain(i)) {
            if (!std::isfinite(values_[i]))
                throw std::invalid_argument(
                    "grid function: non-finite value at node " + std::to_string(i));
            sup_norm_ = std::max(sup_norm_, std::abs(values_[i]));
        } else {
            values_[i] = kNan;
        }
    }
}

ConvexGridFunction ConvexGridFunction::with_certificate(bool flag) const {
    ConvexGridFunction c = *this;
    c.certified_ = flag;
    return c;
}

ConvexGridFunction ConvexGridFunction::with_meta(FunctionMetadata m) const {
    ConvexGridFunction c = *this;
    c.meta_ = m;
    return c;
}

double ConvexGridFunction::height_scale() const {
    return meta_.K > 0 ? meta_.K : sup_norm_;
}

std::vector<std::array<int, 3>> stencil_directions(int dim) {
    std::vector<std::array<int, 3>> dirs;
    for (int a = 0; a < dim; ++a) {
        std::array<int, 3> d = {0, 0, 0};
        d[a] = 1;
        dirs.push_back(d);
    }
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b)
            for (int s = -1; s <= 1; s += 2) {
                std::array<int, 3> d = {0, 0, 0};
                d[a] = 1;
                d[b] = s;
                dirs.push_back(d);
            }
    return dirs;
}

std::optional<double> second_difference(const Grid& g,
                                        const std::vector<double>& values,
                                        std::size_t idx,
                                        const std::array<int, 3>& dir) {
    auto c = g.coords(idx);
    std::array<int, 3> cp = c, cm = c;
    for (int a = 0; a < 3; ++a) {
        cp[a] += dir[a];
        cm[a] -= dir[a];
        if (cp[a] < 0 || cp[a] >= g.spec().counts[a] || cm[a] < 0 ||
            cm[a] >= g.spec().counts[a])
            return std::nullopt;
    }
    const std::size_t ip = g.index(cp[0], cp[1], cp[2]);
    const std::size_t im = g.index(cm[0], cm[1], cm[2]);
    if (!g.in_domain(ip) || !g.in_domain(im)) return std::nullopt;
    // same association as the envelope update (sum first), so an active
    // midpoint constraint yields a nonnegative value even at tolerance zero
    return (values[ip] + values[im]) - 2.0 * values[idx];
}

ConvexityWitness is_discretely_convex(const ConvexGridFunction& u,
                                      double tol_convex) {
    const Grid& g = u.grid();
    ConvexityWitness w;
    w.tol = tol_convex >= 0 ? tol_convex : 1e-9 * std::max(1.0, u.sup_norm());
    w.min_second_diff = kInf;
    const auto dirs = stencil_directions(g.dim());
    for (std::size_t idx : g.domain_nodes()) {
        for (const auto& d : dirs) {
            const auto sd = second_difference(g, u.values(), idx, d);
            if (!sd) continue;
            if (*sd < w.min_second_diff) w.min_second_diff = *sd;
            if (*sd < -w.tol && w.convex) {
                w.convex = false;
                w.node = idx;
                w.direction = d;
                w.second_diff = *sd;
            }
        }
    }
    if (w.min_second_diff == kInf) w.min_second_diff = 0;
    return w;
}

ConvexGridFunction lower_convex_envelope(const std::vector<double>& raw_values,
                                         std::shared_ptr<const Grid> grid,
                                         FunctionMetadata meta) {
    if (!grid) throw std::invalid_argument("lower_convex_envelope: null grid");
    if (raw_values.size() != grid->size())
        throw std::invalid_argument("lower_convex_envelope: value count mismatch");
    const Grid& g = *grid;
    for (std::size_t idx : g.domain_nodes())
        if (!std::isfinite(raw_values[idx]))
            throw std::invalid_argument(
                "lower_convex_envelope: non-finite value at node " +
                std::to_string(idx));

    std::vector<double> v(g.size(), kNan);
    for (std::size_t idx : g.domain_nodes()) v[idx] = raw_values[idx];

    const auto dirs = stencil_directions(g.dim());
    const auto& nodes = g.domain_nodes();

    // Gauss-Seidel sweeps of u <- min(g, directional midpoint averages),
    // alternating scan order. Values decrease monotonically and the update
    // is idempotent at the fixed point, so a zero-change sweep is an exact
    // stopping rule.
    std::vector<std::ptrdiff_t> offs;
    for (const auto& d : dirs) {
        const auto& c = g.spec().counts;
        offs.push_back((static_cast<std::ptrdiff_t>(d[0]) * c[1] + d[1]) * c[2] +
                       d[2]);
    }
    auto update = [&](std::size_t idx) -> bool {
        double best = raw_values[idx];
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            const auto sd = second_difference(g, v, idx, dirs[k]);
            if (!sd) continue;
            const std::ptrdiff_t o = offs[k];
            const double avg =
                0.5 * (v[idx + static_cast<std::size_t>(o)] +
                       v[idx - static_cast<std::size_t>(o)]);
            best = std::min(best, avg);
        }
        if (best < v[idx]) {
            v[idx] = best;
            return true;
        }
        return false;
    };

    const long max_sweeps = 1000000;
    bool changed = true;
    long sweep = 0;
    while (changed) {
        if (++sweep > max_sweeps)
            throw std::runtime_error("lower_convex_envelope: sweep budget exhausted");
        changed = false;
        for (auto it = nodes.begin(); it != nodes.end(); ++it)
            changed |= update(*it);
        for (auto it = nodes.rbegin(); it != nodes.rend(); ++it)
            changed |= update(*it);
    }
    return ConvexGridFunction(std::move(grid), std::move(v), meta, true);
}

namespace {

struct SlopeScan {
    std::array<double, 3> lo = {kInf, kInf, kInf};
    std::array<double, 3> hi = {-kInf, -kInf, -kInf};
    double scale = 0;
};

SlopeScan scan_quotients(const Grid& g, const std::vector<double>& v) {
    SlopeScan s;
    for (std::size_t idx : g.domain_nodes()) {
        for (int a = 0; a < g.dim(); ++a) {
            const long long nb = g.neighbor(idx, a, +1);
            if (nb < 0 || !g.in_domain(static_cast<std::size_t>(nb))) continue;
            const double q =
                (v[static_cast<std::size_t>(nb)] - v[idx]) / g.spec().spacing[a];
            s.lo[a] = std::min(s.lo[a], q);
            s.hi[a] = std::max(s.hi[a], q);
            s.scale = std::max(s.scale, std::abs(q));
        }
    }
    for (int a = 0; a < g.dim(); ++a) {
        if (s.lo[a] == kInf) { s.lo[a] = -1; s.hi[a] = 1; }
    }
    return s;
}

std::array<double, 2> node_quotients(const Grid& g, const std::vector<double>& v,
                                     std::size_t idx, int axis) {
    double lo = kNan, hi = kNan;
    const long long nm = g.neighbor(idx, axis, -1);
    const long long np = g.neighbor(idx, axis, +1);
    const double h = g.spec().spacing[axis];
    if (nm >= 0 && g.in_domain(static_cast<std::size_t>(nm)))
        lo = (v[idx] - v[static_cast<std::size_t>(nm)]) / h;
    if (np >= 0 && g.in_domain(static_cast<std::size_t>(np)))
        hi = (v[static_cast<std::size_t>(np)] - v[idx]) / h;
    return {lo, hi};
}

// One halfspace cut of a vertex set; `changed` reports whether anything was
// cut. Crossing segments between strictly-inside and strictly-outside
// vertices generate candidate points; non-extreme extras are removed by the
// hull cleanup afterwards.
std::vector<Vec3> clip_vertices(const std::vector<Vec3>& V, const Vec3& n,
                                double c, bool& changed) {
    std::vector<double> s(V.size());
    double mag = std::abs(c);
    for (std::size_t i = 0; i < V.size(); ++i) {
        s[i] = n.dot(V[i]) - c;
        mag = std::max(mag, std::abs(s[i]));
    }
    const double tol = 1e-12 * (1.0 + mag);
    changed = false;
    for (double si : s)
        if (si > tol) { changed = true; break; }
    if (!changed) return V;
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < V.size(); ++i)
        if (s[i] <= tol) out.push_back(V[i]);
    for (std::size_t i = 0; i < V.size(); ++i) {
        if (s[i] >= -tol) continue;
        for (std::size_t j = 0; j < V.size(); ++j) {
            if (s[j] <= tol) continue;
            const double t = s[i] / (s[i] - s[j]);
            out.push_back(V[i] + t * (V[j] - V[i]));
        }
    }
    return out;
}

std::vector<Vec3> extreme_points(const std::vector<Vec3>& V, int d) {
    if (V.size() <= 2) return V;
    if (d == 2) {
        std::vector<Vec2> flat;
        flat.reserve(V.size());
        for (const auto& p : V) flat.emplace_back(p.x(), p.y());
        const auto h = hull2d(flat);
        std::vector<Vec3> out;
        out.reserve(h.size());
        for (const auto& p : h) out.emplace_back(p.x(), p.y(), 0.0);
        return out;
    }
    const Hull3 h = hull3d(V);
    return h.vertices;
}

// Drop points that lie within tol of the hull of the remaining ones.
// Incremental clipping leaves duplicates and on-edge crossing points behind;
// only genuine extreme points survive this pass.
std::vector<Vec3> prune_non_extreme(std::vector<Vec3> V, int d, double tol) {
    bool changed = true;
    while (changed && V.size() > 1) {
        changed = false;
        for (std::size_t i = 0; i < V.size(); ++i) {
            std::vector<Vec3> rest;
            rest.reserve(V.size() - 1);
            for (std::size_t j = 0; j < V.size(); ++j)
                if (j != i) rest.push_back(V[j]);

            bool inside = false;
            if (rest.size() == 1) {
                inside = (V[i] - rest[0]).norm() <= tol;
            } else if (d == 2) {
                std::vector<Vec2> flat;
                for (const auto& p : rest) flat.emplace_back(p.x(), p.y());
                const auto h = hull2d(flat);
                if (h.size() >= 3) {
                    inside = polygon_contains(h, Vec2(V[i].x(), V[i].y()), tol);
                } else {
                    // degenerate rest: distance to the segment
                    const Vec2 a = h.front(), b = h.back();
                    const Vec2 p(V[i].x(), V[i].y());
                    const Vec2 e = b - a;
                    const double L2 = e.squaredNorm();
                    const double t =
                        L2 > 0 ? std::clamp(e.dot(p - a) / L2, 0.0, 1.0) : 0.0;
                    inside = (p - (a + t * e)).norm() <= tol;
                }
            } else {
                inside = hull_contains(hull3d(rest), V[i], tol);
            }
            if (inside) {
                V.erase(V.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    return V;
}

}  // namespace

SubgradientSet subgradient_extremes(const ConvexGridFunction& u,
                                    std::size_t node) {
    const Grid& g = u.grid();
    const int d = g.dim();
    if (!g.in_domain(node))
        throw std::invalid_argument("subgradient_extremes: node not in domain");
    SubgradientSet out;
    for (int a = 0; a < d; ++a) {
        const auto q = node_quotients(g, u.values(), node, a);
        out.axis_lo[a] = q[0];
        out.axis_hi[a] = q[1];
        if (std::isnan(q[0]) || std::isnan(q[1])) out.partial = true;
    }

    const SlopeScan scan = scan_quotients(g, u.values());
    const double bound = 2.0 * scan.scale + 1.0;
    const double tol_support =
        std::max(kSupportRel * g.spacing_max() * std::max(scan.scale, 1.0),
                 1e-14 * std::max(1.0, u.sup_norm()));
    const Vec3 x = g.position(node);
    const double ux = u.value(node);

    if (d == 1) {
        double lo = -bound, hi = bound;
        for (std::size_t idx : g.domain_nodes()) {
            if (idx == node) continue;
            const double dx = g.position(idx).x() - x.x();
            const double q = (u.value(idx) - ux) / dx;
            if (dx > 0) hi = std::min(hi, q);
            else lo = std::max(lo, q);
        }
        if (lo <= hi + tol_support) {
            out.vertices = {Vec3(lo, 0, 0), Vec3(hi, 0, 0)};
            if ((out.vertices[0] - out.vertices[1]).norm() < 1e-15 * (1 + std::abs(lo)))
                out.vertices.pop_back();
        } else {
            out.complete = false;
        }
        out.slack = 0;
        return out;
    }

    // Constraints p . (y - x) <= u(y) - u(x), tightest first. The axis
    // neighbors seed the initial box.
    struct Cut { Vec3 n; double c; };
    std::vector<Cut> cuts;
    cuts.reserve(g.domain_nodes().size());
    for (std::size_t idx : g.domain_nodes()) {
        if (idx == node) continue;
        Vec3 n = g.position(idx) - x;
        if (d < 3) n.z() = 0;
        cuts.push_back({n, u.value(idx) - ux});
    }
    std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) {
        return a.c / a.n.norm() < b.c / b.n.norm();
    });

    double slack = 0;
    for (int attempt = 0; attempt < 24; ++attempt) {
        // Start from the quotient box (slack-relaxed), fall back to the
        // global slope bound where a neighbor is missing.
        std::array<double, 3> blo = {0, 0, 0}, bhi = {0, 0, 0};
        bool feasible_box = true;
        for (int a = 0; a < d; ++a) {
            const double h = g.spec().spacing[a];
            blo[a] = std::isnan(out.axis_lo[a]) ? -bound : out.axis_lo[a] - slack / h;
            bhi[a] = std::isnan(out.axis_hi[a]) ? bound : out.axis_hi[a] + slack / h;
            if (blo[a] > bhi[a]) feasible_box = false;
        }
        std::vector<Vec3> V;
        if (feasible_box) {
            if (d == 2) {
                V = {Vec3(blo[0], blo[1], 0), Vec3(bhi[0], blo[1], 0),
                     Vec3(bhi[0], bhi[1], 0), Vec3(blo[0], bhi[1], 0)};
            } else {
                for (int m = 0; m < 8; ++m)
                    V.emplace_back(m & 1 ? bhi[0] : blo[0], m & 2 ? bhi[1] : blo[1],
                                   m & 4 ? bhi[2] : blo[2]);
            }
            for (const auto& cut : cuts) {
                bool changed = false;
                V = clip_vertices(V, cut.n, cut.c + slack, changed);
                if (V.empty()) break;
                if (changed) V = extreme_points(V, d);
            }
        }
        if (!V.empty()) {
            const double tol_prune =
                std::max(4.0 * slack, 1e-9 * (1.0 + scan.scale));
            V = prune_non_extreme(std::move(V), d, tol_prune);
            std::sort(V.begin(), V.end(), [](const Vec3& a, const Vec3& b) {
                return std::lexicographical_compare(a.data(), a.data() + 3,
                                                    b.data(), b.data() + 3);
            });
            out.vertices = std::move(V);
            out.complete = slack <= tol_support;
            out.slack = slack;
            return out;
        }
        slack = slack == 0 ? tol_support : slack * 10.0;
        if (slack > 10.0 * (scan.scale + 1.0) * g.spacing_max() *
                        std::max(g.spec().counts[0], std::max(g.spec().counts[1],
                                                              g.spec().counts[2])))
            break;
    }
    out.complete = false;
    out.slack = slack;
    return out;
}

Vec3 default_subgradient(const ConvexGridFunction& u, std::size_t node) {
    const Grid& g = u.grid();
    const int d = g.dim();
    std::array<double, 3> lo = {0, 0, 0}, hi = {0, 0, 0};
    bool missing = false;
    double slope_scale = 1e-12;
    for (int a = 0; a < d; ++a) {
        const auto q = node_quotients(g, u.values(), node, a);
        lo[a] = q[0];
        hi[a] = q[1];
        if (std::isnan(q[0]) || std::isnan(q[1])) missing = true;
        else slope_scale = std::max({slope_scale, std::abs(q[0]), std::abs(q[1])});
    }

    // A genuine kink shows a quotient gap far above the same-axis gaps at
    // the two flanking neighbors (smooth curvature gives comparable gaps at
    // all three nodes), and there the contract asks for the smallest-norm
    // extreme point even when the midpoint happens to be supported, as at a
    // symmetric crease.
    bool kink = false;
    for (int a = 0; a < d && !missing && !kink; ++a) {
        double flank_gap = 0;
        for (int s : {-1, 1}) {
            std::array<int, 3> c = g.coords(node);
            c[a] += s;
            if (c[a] < 0 || c[a] >= g.spec().counts[a]) continue;
            const std::size_t nb = g.index(c[0], c[1], c[2]);
            if (!g.in_domain(nb)) continue;
            const auto q = node_quotients(g, u.values(), nb, a);
            if (!std::isnan(q[0]) && !std::isnan(q[1]))
                flank_gap = std::max(flank_gap, q[1] - q[0]);
        }
        const double floor = 1e-7 * std::max(1.0, slope_scale);
        if (hi[a] - lo[a] > 8.0 * std::max(flank_gap, floor)) kink = true;
    }

    if (!missing && !kink) {
        // Midpoint slope, kept only if it genuinely supports the function.
        // The tolerance sits far above rounding noise and far below any real
        // slack, so smooth quadratics keep their exact central differences
        // while envelope facets fall through to the vertex path.
        Vec3 p = Vec3::Zero();
        for (int a = 0; a < d; ++a) p[a] = 0.5 * (lo[a] + hi[a]);
        const double reach =
            slope_scale * g.spacing_max() *
            std::max({g.spec().counts[0], g.spec().counts[1], g.spec().counts[2]});
        const double tol_v = 1e-10 * std::max({1.0, u.sup_norm(), reach});
        const Vec3 x = g.position(node);
        const double ux = u.value(node);
        bool supported = true;
        for (std::size_t idx : g.domain_nodes()) {
            Vec3 dx = g.position(idx) - x;
            if (d < 3) dx.z() = 0;
            if (u.value(idx) - ux - p.dot(dx) < -tol_v) {
                supported = false;
                break;
            }
        }
        if (supported) return p;
    }

    const SubgradientSet s = subgradient_extremes(u, node);
    if (!s.vertices.empty()) {
        const Vec3* best = &s.vertices.front();
        for (const auto& v : s.vertices) {
            const double dn = v.squaredNorm() - best->squaredNorm();
            const double tie = 1e-12 * (1.0 + best->squaredNorm());
            if (dn < -tie) {
                best = &v;
            } else if (std::abs(dn) <= tie) {
                if (std::lexicographical_compare(v.data(), v.data() + 3,
                                                 best->data(), best->data() + 3))
                    best = &v;
            }
        }
        return *best;
    }
    // Enumeration failed (badly non-convex data): clamp the central slope
    // into the quotient box as a best effort.
    Vec3 p = Vec3::Zero();
    for (int a = 0; a < d; ++a) {
        double c = 0;
        if (!std::isnan(lo[a]) && !std::isnan(hi[a])) c = 0.5 * (lo[a] + hi[a]);
        else if (!std::isnan(lo[a])) c = lo[a];
        else if (!std::isnan(hi[a])) c = hi[a];
        p[a] = c;
    }
    return p;
}

MongeAmpereField ma_measure(const ConvexGridFunction& u, int slope_resolution) {
    if (slope_resolution < 1)
        throw std::invalid_argument("ma_measure: slope_resolution must be positive");
    const Grid& g = u.grid();
    const int d = g.dim();
    const int R = slope_resolution;

    MongeAmpereField f;
    f.grid = u.grid_ptr();
    f.mass.assign(g.size(), 0.0);
    f.slope_resolution = R;

    const SlopeScan scan = scan_quotients(g, u.values());
    double cell_vol = 1;
    std::array<double, 3> cw = {1, 1, 1};
    std::size_t total_cells = 1;
    for (int a = 0; a < d; ++a) {
        const double w = scan.hi[a] - scan.lo[a];
        const double pad = w * (1.0 / R + 1e-3) + 1e-9 * (1.0 + scan.scale);
        f.slope_lo[a] = scan.lo[a] - pad;
        f.slope_hi[a] = scan.hi[a] + pad;
        cw[a] = (f.slope_hi[a] - f.slope_lo[a]) / R;
        cell_vol *= cw[a];
        total_cells *= static_cast<std::size_t>(R);
    }
    if (total_cells > (std::size_t{1} << 27))
        throw std::invalid_argument("ma_measure: slope grid too large");

    // Flat node tables for the inner argmax loop.
    const auto& nodes = g.domain_nodes();
    const std::size_t N = nodes.size();
    std::vector<double> xs(N), ys(N), zs(N), vals(N);
    for (std::size_t i = 0; i < N; ++i) {
        const Vec3 p = g.position(nodes[i]);
        xs[i] = p.x();
        ys[i] = p.y();
        zs[i] = p.z();
        vals[i] = u.value(nodes[i]);
    }

    std::vector<int> owner(total_cells, -1);
    parallel_for(total_cells, [&](std::size_t c) {
        std::array<double, 3> p = {0, 0, 0};
        std::size_t rem = c;
        for (int a = d - 1; a >= 0; --a) {
            p[a] = f.slope_lo[a] + (static_cast<double>(rem % R) + 0.5) * cw[a];
            rem /= static_cast<std::size_t>(R);
        }
        double best = -kInf;
        int best_i = -1;
        if (d == 2) {
            for (std::size_t i = 0; i < N; ++i) {
                const double s = p[0] * xs[i] + p[1] * ys[i] - vals[i];
                if (s > best) { best = s; best_i = static_cast<int>(i); }
            }
        } else if (d == 3) {
            for (std::size_t i = 0; i < N; ++i) {
                const double s = p[0] * xs[i] + p[1] * ys[i] + p[2] * zs[i] - vals[i];
                if (s > best) { best = s; best_i = static_cast<int>(i); }
            }
        } else {
            for (std::size_t i = 0; i < N; ++i) {
                const double s = p[0] * xs[i] - vals[i];
                if (s > best) { best = s; best_i = static_cast<int>(i); }
            }
        }
        owner[c] = best_i;
    });

    std::vector<std::size_t> counts(g.size(), 0);
    for (std::size_t c = 0; c < total_cells; ++c) {
        const std::size_t node = nodes[static_cast<std::size_t>(owner[c])];
        if (g.is_interior(node)) {
            ++counts[node];
            ++f.cells_interior;
        } else {
            ++f.cells_boundary;
        }
    }
    for (std::size_t idx = 0; idx < g.size(); ++idx)
        if (counts[idx]) f.mass[idx] = static_cast<double>(counts[idx]) * cell_vol;
    f.total = static_cast<double>(f.cells_interior) * cell_vol;
    return f;
}

ConvexGridFunction add_half_square(const ConvexGridFunction& u) {
    const Grid& g = u.grid();
    const Vec3 c = g.center();
    std::vector<double> v(g.size(), kNan);
    for (std::size_t idx : g.domain_nodes()) {
        Vec3 dp = g.position(idx) - c;
        if (g.dim() < 3) dp.z() = 0;
        if (g.dim() < 2) dp.y() = 0;
        v[idx] = u.value(idx) + 0.5 * dp.squaredNorm();
    }
    FunctionMetadata meta = u.meta();
    meta.K = 0;  // sup norm changed; fall back to the recomputed value
    return ConvexGridFunction(u.grid_ptr(), std::move(v), meta,
                              u.convexity_certificate());
}

std::vector<double> discrete_laplacian(const ConvexGridFunction& u) {
    const Grid& g = u.grid();
    std::vector<double> out(g.size(), kNan);
    for (std::size_t idx : g.domain_nodes()) {
        double sum = 0;
        bool ok = true;
        for (int a = 0; a < g.dim() && ok; ++a) {
            const long long nm = g.neighbor(idx, a, -1);
            const long long np = g.neighbor(idx, a, +1);
            if (nm < 0 || np < 0 || !g.in_domain(static_cast<std::size_t>(nm)) ||
                !g.in_domain(static_cast<std::size_t>(np))) {
                ok = false;
                break;
            }
            const double h = g.spec().spacing[a];
            sum += (u.value(static_cast<std::size_t>(np)) - 2.0 * u.value(idx) +
                    u.value(static_cast<std::size_t>(nm))) /
                   (h * h);
        }
        if (ok) out[idx] = sum;
    }
    return out;
}

}  // namespace malab
