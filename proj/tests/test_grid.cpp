#include <doctest.h>

#include <cmath>
#include <sstream>

#include "malab/grid.hpp"
#include "oracles.hpp"

using namespace malab;

TEST_CASE("index/coords are inverse bijections") {
    GridSpec s;
    s.dim = 3;
    s.counts = {4, 5, 6};
    s.spacing = {0.1, 0.2, 0.3};
    const Grid g(s);
    CHECK(g.size() == 120);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto c = g.coords(idx);
        CHECK(g.index(c[0], c[1], c[2]) == idx);
    }
    CHECK(g.index(1, 2, 3) == (1 * 5 + 2) * 6 + 3);
}

TEST_CASE("box grid masks: all nodes inside, faces are boundary") {
    auto g = oracle::box_grid(2, 5, 1.0);
    CHECK(g->domain_nodes().size() == 25);
    CHECK(g->interior_nodes().size() == 9);
    CHECK(g->boundary_nodes().size() == 16);
    for (std::size_t idx : g->interior_nodes())
        CHECK(g->boundary_distance(idx) > 0.49);
}

TEST_CASE("ball grid: center interior, corners excluded, distances exact") {
    auto g = oracle::ball_grid(2, 9, 1.0);
    const std::size_t center = g->index(4, 4, 0);
    CHECK(g->is_interior(center));
    CHECK(!g->in_domain(g->index(0, 0, 0)));  // corner at distance sqrt(2)
    CHECK(g->boundary_distance(center) == doctest::Approx(1.0));
    // the node (1,0) scaled: position (0.25,0): distance 0.75
    CHECK(g->boundary_distance(g->index(5, 4, 0)) == doctest::Approx(0.75));
    // axis extreme node lies exactly on the circle and is kept
    CHECK(g->in_domain(g->index(8, 4, 0)));
    CHECK(g->is_boundary(g->index(8, 4, 0)));
}

TEST_CASE("cylinder grid masks") {
    GridSpec s;
    s.dim = 3;
    s.counts = {9, 9, 5};
    s.origin = {-1, -1, -0.5};
    s.spacing = {0.25, 0.25, 0.25};
    s.shape = DomainShape::Cylinder;
    s.shape_params = {1.0, 0.5, 0};
    const Grid g(s);
    const std::size_t center = g.index(4, 4, 2);
    CHECK(g.is_interior(center));
    CHECK(!g.in_domain(g.index(0, 0, 2)));          // outside the circle
    CHECK(g.in_domain(g.index(8, 4, 2)));           // rim
    CHECK(g.is_boundary(g.index(4, 4, 0)));         // bottom cap
    CHECK(g.boundary_distance(center) == doctest::Approx(0.5));

    GridSpec bad = s;
    bad.dim = 2;
    CHECK_THROWS(Grid(bad));
}

TEST_CASE("grid validation") {
    GridSpec s;
    s.dim = 2;
    s.counts = {3, 3, 1};
    s.spacing = {1, -1, 1};
    CHECK_THROWS(Grid(s));
    s.spacing = {1, 1, 1};
    s.dim = 4;
    CHECK_THROWS(Grid(s));
}

TEST_CASE("MAGF round-trips bit-exactly including nan") {
    GridSpec s;
    s.dim = 2;
    s.counts = {3, 4, 1};
    s.origin = {-1.0, 0.125, 0};
    s.spacing = {0.1, 1.0 / 3.0, 1};
    s.shape = DomainShape::Ball;
    s.shape_params = {1.7, 0, 0};
    std::vector<double> vals(12);
    for (std::size_t i = 0; i < vals.size(); ++i)
        vals[i] = std::sin(static_cast<double>(i) * 12.9898) * 43758.5453;
    vals[5] = std::numeric_limits<double>::quiet_NaN();

    std::ostringstream os;
    write_magf(os, s, vals);
    std::istringstream is(os.str());
    const MagfData back = read_magf(is);

    CHECK(back.spec.dim == s.dim);
    CHECK(back.spec.counts == s.counts);
    CHECK(back.spec.shape == s.shape);
    for (int a = 0; a < 2; ++a) {
        CHECK(back.spec.origin[a] == s.origin[a]);
        CHECK(back.spec.spacing[a] == s.spacing[a]);
    }
    CHECK(back.spec.shape_params[0] == s.shape_params[0]);
    REQUIRE(back.values.size() == vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (std::isnan(vals[i])) CHECK(std::isnan(back.values[i]));
        else CHECK(back.values[i] == vals[i]);
    }

    // second serialization is byte-identical
    std::ostringstream os2;
    write_magf(os2, back.spec, back.values);
    CHECK(os.str() == os2.str());
}

TEST_CASE("MAGF rejects malformed input") {
    auto fails = [](const std::string& text) {
        std::istringstream is(text);
        CHECK_THROWS_AS(read_magf(is), std::runtime_error);
    };
    fails("");
    fails("MAGF2 2 3 3");
    fails("MAGF1 2 3\norigin 0 0\nspacing 1 1\ndomain box 1 1\n0 0 0");
    fails("MAGF1 2 3 3\norigin 0 0\nspacing 1 1\ndomain cone 1\n");
    fails("MAGF1 2 3 3\norigin 0 0\nspacing 1 0\ndomain box 1 1\n");
    fails("MAGF1 2 2 2\norigin 0 0\nspacing 1 1\ndomain box 1 1\n1 2 3");   // short values
    fails("MAGF1 2 2 2\norigin 0 Q\nspacing 1 1\ndomain box 1 1\n1 2 3 4");
}

TEST_CASE("dim-1 grids work for internal use") {
    GridSpec s;
    s.dim = 1;
    s.counts = {7, 1, 1};
    s.origin = {-1, 0, 0};
    s.spacing = {1.0 / 3, 1, 1};
    s.shape = DomainShape::Box;
    s.shape_params = {1, 0, 0};
    const Grid g(s);
    CHECK(g.domain_nodes().size() == 7);
    CHECK(g.boundary_nodes().size() == 2);
    CHECK(g.position(6, 0, 0).x() == doctest::Approx(1.0));
}
