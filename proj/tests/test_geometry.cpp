#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "lifespan/geometry.hpp"

using namespace lifespan;

TEST_CASE("box construction") {
    const Domain sq = make_box(2, {1.0, 1.0});
    CHECK(sq.volume() == Catch::Approx(1.0));
    CHECK(sq.n == 2);

    const Domain box = make_box(3, {1.0, 2.0, 3.0});
    CHECK(box.volume() == Catch::Approx(6.0));
    CHECK(box.boundary_measure() == Catch::Approx(2 * (1 * 2 + 2 * 3 + 1 * 3)));

    CHECK_THROWS_AS(make_box(2, {0.0, 1.0}), InvalidGeometry);
    CHECK_THROWS_AS(make_box(4, {1, 1, 1, 1}), InvalidGeometry);
}

TEST_CASE("lshape construction") {
    const Domain l1 = make_lshape(1.0, 1.0, 0.5);
    CHECK(l1.volume() == Catch::Approx(0.75));

    // union of [0,2]x[0,0.5] and [0,0.5]x[0,1]: 1.0 + 0.5 - 0.25
    const Domain l2 = make_lshape(2.0, 1.0, 0.5);
    CHECK(l2.volume() == Catch::Approx(1.25));
    // perimeter: 2 + 0.5 + 1.5 + 0.5 + 0.5 + 1
    CHECK(l2.boundary_measure() == Catch::Approx(6.0));

    CHECK_THROWS_AS(make_lshape(1.0, 1.0, 1.0), InvalidGeometry);
}

TEST_CASE("patch construction and areas") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch bottom = make_patch(sq, 2, {0.25}, {0.75});
    CHECK(bottom.area() == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(bottom.normal_axis == 1);
    CHECK(bottom.plane_offset == 0.0);

    const Domain cube = make_box(3, {1.0, 1.0, 1.0});
    const BoundaryPatch small = make_patch(cube, 4, {0.0, 0.0}, {0.1, 0.1});
    CHECK(small.area() == Catch::Approx(0.01).epsilon(1e-12));

    CHECK_THROWS_AS(make_patch(sq, 2, {0.5}, {1.5}), InvalidGeometry);
    CHECK_THROWS_AS(make_patch(sq, 9, {0.0}, {0.5}), InvalidGeometry);

    // boundary measure partition: patch + remainder = perimeter
    CHECK(bottom.area() + (sq.boundary_measure() - bottom.area()) ==
          Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("surface nodes partition the patch measure") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch patch = make_patch(sq, 2, {0.25}, {0.75});
    for (int res : {2, 5, 16, 37}) {
        const auto nodes = surface_nodes(patch, res);
        double sum = 0;
        for (const auto& n : nodes) sum += n.weight;
        CHECK(sum == Catch::Approx(0.5).epsilon(1e-12));
    }

    const Domain cube = make_box(3, {1.0, 1.0, 1.0});
    const BoundaryPatch rect = make_patch(cube, 4, {0.0, 0.0}, {0.1, 0.1});
    const auto nodes3 = surface_nodes(rect, 8);
    double sum3 = 0;
    for (const auto& n : nodes3) sum3 += n.weight;
    CHECK(sum3 == Catch::Approx(0.01).epsilon(1e-12));

    const BoundaryPatch disk = make_free_ball_patch(3, 0.3);
    const auto nodesd = surface_nodes(disk, 12);
    double sumd = 0;
    for (const auto& n : nodesd) sumd += n.weight;
    CHECK(sumd == Catch::Approx(M_PI * 0.09).epsilon(1e-12));

    CHECK_THROWS_AS(surface_nodes(patch, 1), InvalidGeometry);
}

TEST_CASE("surface quadrature exactness and order") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch patch = make_patch(sq, 2, {0.25}, {0.75});

    // constants and linears are exact for the midpoint rule
    auto integrate_nodes = [&](int res, auto f) {
        double s = 0;
        for (const auto& n : surface_nodes(patch, res)) s += n.weight * f(n.point[0]);
        return s;
    };
    CHECK(integrate_nodes(7, [](double) { return 3.0; }) ==
          Catch::Approx(1.5).epsilon(1e-12));
    // int_{1/4}^{3/4} x dx = 1/4
    CHECK(integrate_nodes(9, [](double x) { return x; }) ==
          Catch::Approx(0.25).epsilon(1e-12));

    // doubling the resolution shrinks the error of a smooth integrand by >= 3
    const double exact = std::exp(0.75) - std::exp(0.25);
    const double e8 =
        std::abs(integrate_nodes(8, [](double x) { return std::exp(x); }) - exact);
    const double e16 =
        std::abs(integrate_nodes(16, [](double x) { return std::exp(x); }) - exact);
    CHECK(e8 / e16 >= 3.0);
}

TEST_CASE("grid classification partitions the boundary") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch patch = make_patch(sq, 2, {0.25}, {0.75});
    const Grid g = make_grid(sq, patch, {17, 17, 1});

    CHECK(g.h[0] == Catch::Approx(1.0 / 16));

    int n_g1 = 0, n_iface = 0, n_g2 = 0, n_int = 0;
    for (long long idx = 0; idx < g.size(); ++idx) {
        const auto m = g.multi(idx);
        const Point p = g.coord(m);
        const bool on_bdry = m[0] == 0 || m[0] == 16 || m[1] == 0 || m[1] == 16;
        switch (g.node_class[idx]) {
            case NodeClass::Gamma1:
                ++n_g1;
                CHECK(on_bdry);
                CHECK(p[1] == 0.0);
                CHECK(p[0] > 0.25);
                CHECK(p[0] < 0.75);
                break;
            case NodeClass::Interface:
                ++n_iface;
                CHECK(p[1] == 0.0);
                CHECK((p[0] == Catch::Approx(0.25) || p[0] == Catch::Approx(0.75)));
                break;
            case NodeClass::Gamma2:
                ++n_g2;
                CHECK(on_bdry);
                break;
            case NodeClass::Interior:
                ++n_int;
                CHECK_FALSE(on_bdry);
                break;
            case NodeClass::Inactive:
                FAIL("box grids have no inactive nodes");
        }
    }
    CHECK(n_g1 == 7);
    CHECK(n_iface == 2);
    CHECK(n_g1 + n_iface + n_g2 == 64);  // all boundary nodes classified once
    CHECK(n_int == 15 * 15);
}

TEST_CASE("full-edge patch turns corners into interface nodes") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch left = make_patch(sq, 0, {0.0}, {1.0});
    const Grid g = make_grid(sq, left, {9, 9, 1});
    int iface = 0, g1 = 0;
    for (long long idx = 0; idx < g.size(); ++idx) {
        if (g.node_class[idx] == NodeClass::Interface) ++iface;
        if (g.node_class[idx] == NodeClass::Gamma1) ++g1;
    }
    CHECK(iface == 2);  // the two corners of the edge
    CHECK(g1 == 7);
}

TEST_CASE("lshape grid masks the notch") {
    const Domain l = make_lshape(1.0, 1.0, 0.5);
    const BoundaryPatch patch = make_patch(l, 2, {0.625}, {0.875});  // inner horizontal
    const Grid g = make_grid(l, patch, {9, 9, 1});

    long long active = 0, inactive = 0;
    for (long long idx = 0; idx < g.size(); ++idx)
        (g.active(idx) ? active : inactive)++;
    CHECK(active == 65);
    CHECK(inactive == 16);

    // inner corner is a boundary node of the domain
    CHECK(g.node_class[g.lin(4, 4)] != NodeClass::Interior);
    CHECK(g.node_class[g.lin(4, 4)] != NodeClass::Inactive);

    // misaligned notch is rejected
    CHECK_THROWS_AS(make_grid(l, patch, {10, 10, 1}), InvalidGeometry);

    int n_g1 = 0, n_if = 0;
    for (long long idx = 0; idx < g.size(); ++idx) {
        if (g.node_class[idx] == NodeClass::Gamma1) ++n_g1;
        if (g.node_class[idx] == NodeClass::Interface) ++n_if;
    }
    CHECK(n_g1 == 1);  // x = 0.75 at y = 0.5
    CHECK(n_if == 2);  // x = 0.625, 0.875
}
