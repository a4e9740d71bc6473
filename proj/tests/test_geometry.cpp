#include <doctest.h>

#include <random>
#include <set>

#include "malab/geometry.hpp"
#include "oracles.hpp"

using namespace malab;

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool is_strictly_convex_ccw(const std::vector<Vec2>& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return true;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        const Vec2& c = poly[(i + 2) % n];
        if (cross(b - a, c - b) <= 0) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("hull2d on a square with interior and duplicate points") {
    std::vector<Vec2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5},
                             {0.25, 0.75}, {1, 0}, {0.5, 0}, {0, 0.5}};
    const auto h = hull2d(pts);
    REQUIRE(h.size() == 4);
    CHECK(is_strictly_convex_ccw(h));
    CHECK(polygon_area(h) == doctest::Approx(1.0));
}

TEST_CASE("hull2d handles collinear and tiny inputs") {
    CHECK(hull2d({{0, 0}}).size() == 1);
    CHECK(hull2d({{0, 0}, {0, 0}, {0, 0}}).size() == 1);
    const auto seg = hull2d({{0, 0}, {1, 1}, {2, 2}, {0.5, 0.5}});
    REQUIRE(seg.size() == 2);
    CHECK((seg[0] - Vec2(0, 0)).norm() == doctest::Approx(0));
    CHECK((seg[1] - Vec2(2, 2)).norm() == doctest::Approx(0));
}

TEST_CASE("hull2d random clouds: convex, covering, vertices from input") {
    auto gen = oracle::rng(101);
    std::uniform_real_distribution<double> d(-3, 3);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Vec2> pts;
        for (int i = 0; i < 200; ++i) pts.emplace_back(d(gen), d(gen));
        const auto h = hull2d(pts);
        CHECK(is_strictly_convex_ccw(h));
        for (const auto& p : pts) CHECK(polygon_contains(h, p, 1e-9));
        for (const auto& v : h) {
            bool found = false;
            for (const auto& p : pts)
                if ((p - v).norm() < 1e-12) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("polygon area and centroid closed forms") {
    const std::vector<Vec2> tri = {{0, 0}, {2, 0}, {0, 2}};
    CHECK(polygon_area(tri) == doctest::Approx(2.0));
    CHECK((polygon_centroid(tri) - Vec2(2.0 / 3, 2.0 / 3)).norm() ==
          doctest::Approx(0).epsilon(1e-12));
    const std::vector<Vec2> sq = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    CHECK(polygon_area(sq) == doctest::Approx(4.0));
    CHECK(polygon_centroid(sq).norm() == doctest::Approx(0));
}

TEST_CASE("clip_polygon halves a square") {
    const std::vector<Vec2> sq = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const auto half = clip_polygon(sq, Vec2(1, 0), 0.0);  // keep x <= 0
    CHECK(polygon_area(half) == doctest::Approx(2.0));
    for (const auto& p : half) CHECK(p.x() <= 1e-12);
    const auto none = clip_polygon(sq, Vec2(1, 0), -2.0);
    CHECK(none.empty());
    const auto all = clip_polygon(sq, Vec2(1, 0), 2.0);
    CHECK(polygon_area(all) == doctest::Approx(4.0));
}

TEST_CASE("halfplane_intersection reproduces a triangle") {
    std::vector<Halfplane> hs = {{Vec2(-1, 0), 0},   // x >= 0
                                 {Vec2(0, -1), 0},   // y >= 0
                                 {Vec2(1, 1), 1}};   // x + y <= 1
    const auto poly = halfplane_intersection(hs);
    CHECK(polygon_area(poly) == doctest::Approx(0.5));
    std::vector<Halfplane> contradictory = {{Vec2(1, 0), -1}, {Vec2(-1, 0), -1}};
    CHECK(halfplane_intersection(contradictory).empty());
}

TEST_CASE("polygon_halfplanes invert the polygon") {
    const std::vector<Vec2> tri = {{0, 0}, {2, 0}, {0, 2}};
    const auto hs = polygon_halfplanes(tri);
    REQUIRE(hs.size() == 3);
    const auto back = halfplane_intersection(hs);
    CHECK(polygon_area(back) == doctest::Approx(2.0));
    // interior point strictly satisfies all
    for (const auto& h : hs) CHECK(h.n.dot(Vec2(0.3, 0.3)) < h.c);
}

TEST_CASE("width scans match axis-aligned expectations") {
    const std::vector<Vec2> rect = {{-2, -1}, {2, -1}, {2, 1}, {-2, 1}};
    CHECK(width_along2(rect, Vec2(1, 0)) == doctest::Approx(4.0));
    CHECK(width_along2(rect, Vec2(0, 3)) == doctest::Approx(2.0));
    std::vector<Vec3> box;
    for (int m = 0; m < 8; ++m)
        box.emplace_back(m & 1 ? 1 : -1, m & 2 ? 2 : -2, m & 4 ? 3 : -3);
    CHECK(width_along(box, Vec3(0, 0, 1)) == doctest::Approx(6.0));
    CHECK(width_along(box, Vec3(5, 0, 0)) == doctest::Approx(2.0));
}

TEST_CASE("direction sets: counts, unit norm, spread") {
    const auto planar = planar_directions(720);
    CHECK(planar.size() == 720);
    for (const auto& v : planar) CHECK(v.norm() == doctest::Approx(1.0));

    const auto s0 = sphere_directions(0);
    CHECK(s0.size() == 12);
    const auto s2 = sphere_directions(2);
    CHECK(s2.size() == 162);  // 10*4^2 + 2
    const auto s4 = sphere_directions(4);
    CHECK(s4.size() == 2562);
    for (const auto& v : s2) CHECK(v.norm() == doctest::Approx(1.0));
    // no duplicates
    std::set<std::array<long long, 3>> seen;
    for (const auto& v : s2)
        seen.insert({llround(v.x() * 1e9), llround(v.y() * 1e9), llround(v.z() * 1e9)});
    CHECK(seen.size() == s2.size());
}

TEST_CASE("hull3d of a cube") {
    std::vector<Vec3> pts;
    for (int m = 0; m < 8; ++m)
        pts.emplace_back(m & 1 ? 1 : -1, m & 2 ? 1 : -1, m & 4 ? 1 : -1);
    pts.emplace_back(0, 0, 0);
    pts.emplace_back(0.5, -0.25, 0.25);
    const Hull3 h = hull3d(pts);
    CHECK(!h.degenerate);
    CHECK(h.vertices.size() == 8);
    CHECK(h.facets.size() == 12);
    CHECK(h.volume == doctest::Approx(8.0));
    CHECK(h.centroid.norm() == doctest::Approx(0).epsilon(1e-9));
    CHECK(hull_contains(h, Vec3(0.9, 0.9, 0.9), 1e-9));
    CHECK(!hull_contains(h, Vec3(1.1, 0, 0), 1e-9));
}

TEST_CASE("hull3d of an octahedron") {
    std::vector<Vec3> pts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                             {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    const Hull3 h = hull3d(pts);
    CHECK(h.vertices.size() == 6);
    CHECK(h.facets.size() == 8);
    CHECK(h.volume == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("hull3d random clouds: containment, Euler formula, orientation") {
    auto gen = oracle::rng(202);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int rep = 0; rep < 6; ++rep) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 150; ++i) pts.emplace_back(d(gen), d(gen), d(gen));
        const Hull3 h = hull3d(pts);
        REQUIRE(!h.degenerate);
        for (const auto& p : pts) CHECK(hull_contains(h, p, 1e-8));
        // Euler: V - E + F = 2 with E = 3F/2 on a triangulated sphere
        std::set<std::pair<int, int>> edges;
        for (const auto& f : h.facets)
            for (int e = 0; e < 3; ++e) {
                int a = f[e], b = f[(e + 1) % 3];
                edges.insert({std::min(a, b), std::max(a, b)});
            }
        CHECK(static_cast<long>(h.vertices.size()) -
                  static_cast<long>(edges.size()) +
                  static_cast<long>(h.facets.size()) ==
              2);
        CHECK(h.volume > 0);
        // every facet normal points away from the centroid
        for (std::size_t i = 0; i < h.facets.size(); ++i)
            CHECK(h.normals[i].dot(h.centroid) < h.offsets[i]);
    }
}

TEST_CASE("hull3d degenerate ranks") {
    const Hull3 pt = hull3d({{1, 2, 3}, {1, 2, 3}});
    CHECK(pt.degenerate);
    CHECK(pt.rank == 0);
    REQUIRE(pt.vertices.size() == 1);

    const Hull3 seg = hull3d({{0, 0, 0}, {1, 1, 1}, {0.5, 0.5, 0.5}});
    CHECK(seg.rank == 1);
    CHECK(seg.vertices.size() == 2);
    CHECK(hull_contains(seg, Vec3(0.25, 0.25, 0.25), 1e-9));
    CHECK(!hull_contains(seg, Vec3(0.25, 0.3, 0.25), 1e-3));

    std::vector<Vec3> flat;
    auto gen = oracle::rng(7);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int i = 0; i < 40; ++i) {
        const double a = d(gen), b = d(gen);
        flat.emplace_back(a, b, 2 * a - b);  // plane z = 2x - y
    }
    const Hull3 h = hull3d(flat);
    CHECK(h.rank == 2);
    CHECK(h.vertices.size() >= 3);
    for (const auto& p : flat) CHECK(hull_contains(h, p, 1e-8));
    CHECK(!hull_contains(h, Vec3(0, 0, 0.5), 1e-6));
}

TEST_CASE("polygon_contains edge cases") {
    const std::vector<Vec2> tri = {{0, 0}, {1, 0}, {0, 1}};
    CHECK(polygon_contains(tri, Vec2(0.2, 0.2), 1e-12));
    CHECK(polygon_contains(tri, Vec2(0, 0), 1e-12));          // vertex
    CHECK(polygon_contains(tri, Vec2(0.5, 0.5), 1e-9));       // edge midpoint
    CHECK(!polygon_contains(tri, Vec2(0.6, 0.6), 1e-9));
    CHECK(!polygon_contains({}, Vec2(0, 0), 1.0));
}
