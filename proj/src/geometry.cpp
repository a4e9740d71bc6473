#include "malab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace malab {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

std::vector<Vec2> hull2d(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) {
                              return a.x() == b.x() && a.y() == b.y();
                          }),
              pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;

    std::vector<Vec2> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross2(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && cross2(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

double polygon_area(const std::vector<Vec2>& poly) {
    double s = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) s += cross2(poly[i], poly[(i + 1) % n]);
    return 0.5 * s;
}

Vec2 polygon_centroid(const std::vector<Vec2>& poly) {
    const std::size_t n = poly.size();
    if (n == 0) return Vec2::Zero();
    const double a = polygon_area(poly);
    if (std::abs(a) < 1e-300) {
        Vec2 m = Vec2::Zero();
        for (const auto& p : poly) m += p;
        return m / static_cast<double>(n);
    }
    Vec2 c = Vec2::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        c += (p + q) * cross2(p, q);
    }
    return c / (6.0 * a);
}

std::vector<Vec2> clip_polygon(const std::vector<Vec2>& poly, const Vec2& n,
                               double c) {
    std::vector<Vec2> out;
    const std::size_t m = poly.size();
    if (m == 0) return out;
    out.reserve(m + 1);
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % m];
        const double da = n.dot(a) - c;
        const double db = n.dot(b) - c;
        if (da <= 0) out.push_back(a);
        if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
            const double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

std::vector<Vec2> halfplane_intersection(const std::vector<Halfplane>& hs,
                                         double box) {
    std::vector<Vec2> poly = {{-box, -box}, {box, -box}, {box, box}, {-box, box}};
    for (const auto& h : hs) {
        poly = clip_polygon(poly, h.n, h.c);
        if (poly.empty()) return poly;
    }
    return poly;
}

bool polygon_contains(const std::vector<Vec2>& poly, const Vec2& p, double tol) {
    const std::size_t n = poly.size();
    if (n == 0) return false;
    if (n == 1) return (p - poly[0]).norm() <= tol;
    if (n == 2) {
        const Vec2 d = poly[1] - poly[0];
        const double len = d.norm();
        if (len < 1e-300) return (p - poly[0]).norm() <= tol;
        const double t = std::clamp(d.dot(p - poly[0]) / (len * len), 0.0, 1.0);
        return (p - (poly[0] + t * d)).norm() <= tol;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        const Vec2 e = b - a;
        const double len = e.norm();
        if (len < 1e-300) continue;
        if (cross2(e, p - a) < -tol * len) return false;
    }
    return true;
}

std::vector<Halfplane> polygon_halfplanes(const std::vector<Vec2>& poly) {
    std::vector<Halfplane> hs;
    const std::size_t n = poly.size();
    hs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        Vec2 e = b - a;
        const double len = e.norm();
        if (len < 1e-300) continue;
        const Vec2 nrm(e.y() / len, -e.x() / len);
        hs.push_back({nrm, nrm.dot(a)});
    }
    return hs;
}

double width_along(const std::vector<Vec3>& pts, const Vec3& dir) {
    const Vec3 u = dir.normalized();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : pts) {
        const double d = u.dot(p);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return pts.empty() ? 0.0 : hi - lo;
}

double width_along2(const std::vector<Vec2>& pts, const Vec2& dir) {
    const Vec2 u = dir.normalized();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : pts) {
        const double d = u.dot(p);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return pts.empty() ? 0.0 : hi - lo;
}

std::vector<Vec2> planar_directions(int count) {
    std::vector<Vec2> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double th = 2.0 * M_PI * k / count;
        dirs.emplace_back(std::cos(th), std::sin(th));
    }
    return dirs;
}

std::vector<Vec3> sphere_directions(int level) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            const int idx = static_cast<int>(v.size());
            v.push_back((v[a] + v[b]).normalized());
            mid.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> nf;
        nf.reserve(4 * f.size());
        for (const auto& t : f) {
            const int ab = midpoint(t[0], t[1]);
            const int bc = midpoint(t[1], t[2]);
            const int ca = midpoint(t[2], t[0]);
            nf.push_back({t[0], ab, ca});
            nf.push_back({t[1], bc, ab});
            nf.push_back({t[2], ca, bc});
            nf.push_back({ab, bc, ca});
        }
        f = std::move(nf);
    }
    return v;
}

// ---------------------------------------------------------------------------
// 3-D quickhull

namespace {

struct QFace {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // neighbor across directed edge v[i] -> v[i+1]
    Vec3 n;
    double off;
    std::vector<int> pts;
    int far = -1;
    double fardist = 0;
    bool alive = true;
};

Vec3 face_normal(const std::vector<Vec3>& p, const std::array<int, 3>& t) {
    return (p[t[1]] - p[t[0]]).cross(p[t[2]] - p[t[0]]);
}

double pt_face_dist(const QFace& f, const Vec3& x) { return f.n.dot(x) - f.off; }

Hull3 degenerate_hull(const std::vector<Vec3>& pts, int rank, const Vec3& p0,
                      const Vec3& u, const Vec3& w) {
    Hull3 h;
    h.rank = rank;
    h.degenerate = true;
    if (rank == 0) {
        h.vertices = {p0};
        h.centroid = p0;
        return h;
    }
    if (rank == 1) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        Vec3 plo = p0, phi = p0;
        for (const auto& p : pts) {
            const double t = u.dot(p - p0);
            if (t < lo) { lo = t; plo = p; }
            if (t > hi) { hi = t; phi = p; }
        }
        h.vertices = {plo, phi};
        h.centroid = 0.5 * (plo + phi);
        return h;
    }
    // rank 2: planar hull in the (u, w) frame, lifted back.
    std::vector<Vec2> proj;
    proj.reserve(pts.size());
    for (const auto& p : pts) proj.emplace_back(u.dot(p - p0), w.dot(p - p0));
    const std::vector<Vec2> poly = hull2d(proj);
    h.vertices.reserve(poly.size());
    for (const auto& q : poly) h.vertices.push_back(p0 + q.x() * u + q.y() * w);
    const Vec2 c2 = polygon_centroid(poly);
    h.centroid = p0 + c2.x() * u + c2.y() * w;
    h.normals = {u.cross(w).normalized()};
    h.offsets = {h.normals[0].dot(p0)};
    return h;
}

}  // namespace

Hull3 hull3d(const std::vector<Vec3>& pts) {
    Hull3 out;
    if (pts.empty()) {
        out.rank = 0;
        out.degenerate = true;
        return out;
    }
    double scale = 0;
    for (const auto& p : pts) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
    const double eps = 1e-9 * (1.0 + scale);

    // Initial simplex by successive farthest-point picks; each failure drops
    // the affine rank by one.
    int i0 = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto &a = pts[i], &b = pts[i0];
        if (std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3))
            i0 = static_cast<int>(i);
    }
    int i1 = -1;
    double best = eps;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = (pts[i] - pts[i0]).norm();
        if (d > best) { best = d; i1 = static_cast<int>(i); }
    }
    if (i1 < 0) return degenerate_hull(pts, 0, pts[i0], Vec3::UnitX(), Vec3::UnitY());
    const Vec3 u = (pts[i1] - pts[i0]).normalized();

    int i2 = -1;
    best = eps;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 d = pts[i] - pts[i0];
        const double h = (d - u.dot(d) * u).norm();
        if (h > best) { best = h; i2 = static_cast<int>(i); }
    }
    if (i2 < 0) return degenerate_hull(pts, 1, pts[i0], u, Vec3::Zero());
    Vec3 w = pts[i2] - pts[i0];
    w = (w - u.dot(w) * u).normalized();
    const Vec3 nrm = u.cross(w);

    int i3 = -1;
    best = eps;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double h = std::abs(nrm.dot(pts[i] - pts[i0]));
        if (h > best) { best = h; i3 = static_cast<int>(i); }
    }
    if (i3 < 0) return degenerate_hull(pts, 2, pts[i0], u, w);

    std::vector<QFace> faces;
    const Vec3 inner = 0.25 * (pts[i0] + pts[i1] + pts[i2] + pts[i3]);
    auto make_face = [&](int a, int b, int c) {
        QFace f;
        f.v = {a, b, c};
        Vec3 n = face_normal(pts, f.v);
        if (n.dot(inner - pts[a]) > 0) {
            std::swap(f.v[1], f.v[2]);
            n = -n;
        }
        f.n = n.normalized();
        f.off = f.n.dot(pts[f.v[0]]);
        f.nb = {-1, -1, -1};
        faces.push_back(std::move(f));
    };
    make_face(i0, i1, i2);
    make_face(i0, i1, i3);
    make_face(i0, i2, i3);
    make_face(i1, i2, i3);
    auto link_all = [&](const std::vector<int>& ids) {
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (int ea = 0; ea < 3; ++ea) {
                QFace& fa = faces[ids[a]];
                const int va = fa.v[ea], vb = fa.v[(ea + 1) % 3];
                if (fa.nb[ea] >= 0) continue;
                for (std::size_t b = 0; b < ids.size(); ++b) {
                    if (a == b) continue;
                    QFace& fb = faces[ids[b]];
                    for (int eb = 0; eb < 3; ++eb)
                        if (fb.v[eb] == vb && fb.v[(eb + 1) % 3] == va) {
                            fa.nb[ea] = ids[b];
                            fb.nb[eb] = ids[a];
                        }
                }
            }
    };
    link_all({0, 1, 2, 3});

    auto assign = [&](int pi, const std::vector<int>& cand) {
        for (int fi : cand) {
            QFace& f = faces[fi];
            if (!f.alive) continue;
            const double d = pt_face_dist(f, pts[pi]);
            if (d > eps) {
                f.pts.push_back(pi);
                if (d > f.fardist) { f.fardist = d; f.far = pi; }
                return;
            }
        }
    };
    {
        std::vector<int> all = {0, 1, 2, 3};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const int pi = static_cast<int>(i);
            if (pi == i0 || pi == i1 || pi == i2 || pi == i3) continue;
            assign(pi, all);
        }
    }

    std::vector<int> stack;
    for (int i = 0; i < 4; ++i)
        if (!faces[i].pts.empty()) stack.push_back(i);

    std::vector<int> visible, horizon_face;
    std::vector<char> mark(faces.size(), 0);
    std::size_t guard = 32 * pts.size() + 1024;
    while (!stack.empty()) {
        if (guard-- == 0) break;  // refuse to cycle on degenerate input
        const int fi = stack.back();
        stack.pop_back();
        if (!faces[fi].alive || faces[fi].pts.empty()) continue;
        const int apex = faces[fi].far;
        const Vec3 ap = pts[apex];

        // Visible region: BFS across adjacency from the seed face.
        visible.clear();
        mark.assign(faces.size(), 0);
        visible.push_back(fi);
        mark[fi] = 1;
        for (std::size_t q = 0; q < visible.size(); ++q) {
            for (int e = 0; e < 3; ++e) {
                const int g = faces[visible[q]].nb[e];
                if (g < 0 || mark[g] || !faces[g].alive) continue;
                if (pt_face_dist(faces[g], ap) > eps) {
                    mark[g] = 1;
                    visible.push_back(g);
                }
            }
        }

        // Horizon: directed edges of visible faces whose neighbor is kept.
        struct HEdge { int a, b, outer, outer_edge; };
        std::vector<HEdge> horizon;
        for (int vf : visible)
            for (int e = 0; e < 3; ++e) {
                const int g = faces[vf].nb[e];
                if (g >= 0 && !mark[g]) {
                    const int a = faces[vf].v[e], b = faces[vf].v[(e + 1) % 3];
                    int ge = -1;
                    for (int k = 0; k < 3; ++k)
                        if (faces[g].v[k] == b && faces[g].v[(k + 1) % 3] == a) ge = k;
                    horizon.push_back({a, b, g, ge});
                }
            }

        std::vector<int> orphans;
        for (int vf : visible) {
            for (int p : faces[vf].pts)
                if (p != apex) orphans.push_back(p);
            faces[vf].alive = false;
            faces[vf].pts.clear();
        }

        std::unordered_map<int, int> by_start;
        std::vector<int> fresh;
        fresh.reserve(horizon.size());
        for (const auto& he : horizon) {
            QFace f;
            f.v = {he.a, he.b, apex};
            Vec3 n = face_normal(pts, f.v);
            if (n.dot(inner - pts[he.a]) > 0) {
                std::swap(f.v[1], f.v[2]);
                n = -n;
            }
            f.n = n.normalized();
            f.off = f.n.dot(pts[f.v[0]]);
            f.nb = {-1, -1, -1};
            const int id = static_cast<int>(faces.size());
            faces.push_back(std::move(f));
            mark.push_back(0);
            fresh.push_back(id);
            by_start[he.a] = id;
        }
        for (std::size_t k = 0; k < horizon.size(); ++k) {
            const auto& he = horizon[k];
            const int id = fresh[k];
            QFace& f = faces[id];
            // Edge 0 is (a, b) against the kept outer face; the other two run
            // through the apex and meet the adjacent cone faces.
            int e_ab = -1, e_b_apex = -1, e_apex_a = -1;
            for (int e = 0; e < 3; ++e) {
                const int x = f.v[e], y = f.v[(e + 1) % 3];
                if (x == he.a && y == he.b) e_ab = e;
                if (x == he.b && y == apex) e_b_apex = e;
                if (x == apex && y == he.a) e_apex_a = e;
            }
            if (e_ab < 0) {
                // Orientation flipped during construction; directed edges
                // reversed. Recompute against the reversed roles.
                for (int e = 0; e < 3; ++e) {
                    const int x = f.v[e], y = f.v[(e + 1) % 3];
                    if (x == he.b && y == he.a) e_ab = e;
                    if (x == apex && y == he.b) e_b_apex = e;
                    if (x == he.a && y == apex) e_apex_a = e;
                }
            }
            f.nb[e_ab] = he.outer;
            faces[he.outer].nb[he.outer_edge] = id;
            f.nb[e_b_apex] = by_start.at(he.b);
            // by_start keyed by horizon-edge start vertex; the face whose edge
            // ends at `a` is the one starting at the horizon predecessor.
            int pred = -1;
            for (const auto& o : horizon)
                if (o.b == he.a) pred = by_start.at(o.a);
            f.nb[e_apex_a] = pred;
        }
        for (int p : orphans) assign(p, fresh);
        for (int id : fresh)
            if (!faces[id].pts.empty()) stack.push_back(id);
    }

    // Compact alive faces and vertices.
    std::unordered_map<int, int> vmap;
    for (const auto& f : faces) {
        if (!f.alive) continue;
        std::array<int, 3> t;
        for (int e = 0; e < 3; ++e) {
            auto it = vmap.find(f.v[e]);
            if (it == vmap.end()) {
                it = vmap.emplace(f.v[e], static_cast<int>(out.vertices.size())).first;
                out.vertices.push_back(pts[f.v[e]]);
            }
            t[e] = it->second;
        }
        out.facets.push_back(t);
        out.normals.push_back(f.n);
        out.offsets.push_back(f.off);
    }

    Vec3 ref = Vec3::Zero();
    for (const auto& p : out.vertices) ref += p;
    ref /= static_cast<double>(out.vertices.size());
    double vol = 0;
    Vec3 cen = Vec3::Zero();
    for (const auto& t : out.facets) {
        const Vec3 a = out.vertices[t[0]] - ref;
        const Vec3 b = out.vertices[t[1]] - ref;
        const Vec3 c = out.vertices[t[2]] - ref;
        const double v6 = a.cross(b).dot(c);
        vol += v6;
        cen += v6 * (a + b + c);  // tet centroid minus ref, times 4
    }
    out.volume = vol / 6.0;
    out.centroid = out.volume > 1e-300 ? Vec3(ref + cen / (4.0 * vol)) : ref;
    return out;
}

bool hull_contains(const Hull3& h, const Vec3& p, double tol) {
    if (h.vertices.empty()) return false;
    if (h.degenerate) {
        if (h.rank == 0) return (p - h.vertices[0]).norm() <= tol;
        if (h.rank == 1) {
            const Vec3 a = h.vertices[0], b = h.vertices[1];
            const Vec3 d = b - a;
            const double len2 = d.squaredNorm();
            const double t = len2 > 0 ? std::clamp(d.dot(p - a) / len2, 0.0, 1.0) : 0.0;
            return (p - (a + t * d)).norm() <= tol;
        }
        const Vec3& n = h.normals[0];
        if (std::abs(n.dot(p) - h.offsets[0]) > tol) return false;
        // Membership in the planar polygon, tested edge by edge in 3-D.
        const std::size_t m = h.vertices.size();
        for (std::size_t i = 0; i < m; ++i) {
            const Vec3& a = h.vertices[i];
            const Vec3& b = h.vertices[(i + 1) % m];
            const Vec3 e = b - a;
            const double len = e.norm();
            if (len < 1e-300) continue;
            if (n.cross(e).dot(p - a) / len < -tol) return false;
        }
        return true;
    }
    for (std::size_t i = 0; i < h.normals.size(); ++i)
        if (h.normals[i].dot(p) > h.offsets[i] + tol) return false;
    return true;
}

}  // namespace malab
