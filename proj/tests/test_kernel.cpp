#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lifespan/kernel.hpp"

using namespace lifespan;

namespace {

double trapezoid_mass_1d(const KernelEvaluator& ev, int axis, double x, double t, int n) {
    const double L = ev.domain().extents[axis];
    const double h = L / (n - 1);
    double s = 0;
    for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
        s += w * ev.axis_value(axis, x, i * h, t);
    }
    return s;
}

}  // namespace

TEST_CASE("1-D kernel: unit mass, symmetry, long-time limit") {
    const Domain box = make_box(2, {1.0, 0.7});
    const KernelEvaluator ev(box);

    for (double t : {1e-4, 1e-3, 0.05, 0.5, 5.0}) {
        for (double x : {0.0, 0.31, 1.0}) {
            // closed-form segment integral over the whole interval
            CHECK(ev.axis_segment_integral(0, x, 0.0, 1.0, t) ==
                  Catch::Approx(1.0).epsilon(1e-10));
            // independent trapezoid quadrature (reflection symmetry makes the
            // equispaced rule spectrally accurate)
            if (t >= 1e-3)
                CHECK(trapezoid_mass_1d(ev, 0, x, t, 257) ==
                      Catch::Approx(1.0).epsilon(1e-9));
        }
    }

    for (double t : {1e-3, 0.3}) {
        CHECK(ev.axis_value(0, 0.2, 0.9, t) ==
              Catch::Approx(ev.axis_value(0, 0.9, 0.2, t)).epsilon(1e-13));
    }

    // t = 10 L^2: only the constant eigenmode survives
    CHECK(ev.axis_value(0, 0.37, 0.81, 10.0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(ev.axis_value(1, 0.1, 0.6, 10.0 * 0.49) ==
          Catch::Approx(1.0 / 0.7).epsilon(1e-12));

    CHECK_THROWS_AS(ev.axis_value(0, 0.1, 0.1, 0.0), InvalidTime);
}

TEST_CASE("image and eigenfunction branches agree at the switch time") {
    const Domain box = make_box(2, {1.0, 1.0});
    const KernelEvaluator ev(box);
    const double ts = ev.t_switch(0);
    CHECK(ts == Catch::Approx(1.0 / (M_PI * M_PI)));
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double x = (i + 0.5) / 10.0, y = (j + 0.5) / 10.0;
            const double a = ev.axis_value_image(0, x, y, ts);
            const double b = ev.axis_value_eigen(0, x, y, ts);
            worst = std::max(worst, std::abs(a - b));
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("box kernel: mass, nonnegativity, symmetry") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const KernelEvaluator ev(sq);

    for (double t : {1e-3, 0.02, 1.0, 10.0}) {
        for (Point x : {Point{{0, 0, 0}}, Point{{0.5, 0.5, 0}}, Point{{0.2, 1.0, 0}}}) {
            CHECK(ev.domain_mass(x, t) == Catch::Approx(1.0).epsilon(1e-6));
        }
    }

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> lt(-3.0, 1.0);
    double vmin = 1e300;
    for (int rep = 0; rep < 10000; ++rep) {
        const Point x{{u(rng), u(rng), 0}}, y{{u(rng), u(rng), 0}};
        const double t = std::pow(10.0, lt(rng));
        const double v = ev.value(x, y, t);
        vmin = std::min(vmin, v);
        if (rep % 50 == 0)
            CHECK(ev.value(y, x, t) == Catch::Approx(v).epsilon(1e-10).margin(1e-300));
    }
    CHECK(vmin >= -1e-12);
}

TEST_CASE("zero normal derivative at the boundary, second order") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const KernelEvaluator ev(sq);
    const Point y{{0.3, 0.4, 0}};
    const double t = 0.02;
    // one-sided interior difference of N across the x = 0 face
    auto dnormal = [&](double h) {
        const Point x0{{0.0, 0.45, 0}}, x1{{h, 0.45, 0}}, x2{{2 * h, 0.45, 0}};
        return (-3.0 * ev.value(x0, y, t) + 4.0 * ev.value(x1, y, t) -
                ev.value(x2, y, t)) /
               (2.0 * h);
    };
    const double d1 = std::abs(dnormal(1.0 / 64));
    const double d2 = std::abs(dnormal(1.0 / 128));
    const double scale = ev.value({{0.0, 0.45, 0}}, y, t);
    CHECK(d1 / scale < 1e-2);
    CHECK(d2 <= 0.3 * d1);  // ~ h^2
}

TEST_CASE("gaussian bound ratio: interior and corner limits") {
    for (int n : {2, 3}) {
        const Domain box = n == 2 ? make_box(2, {1.0, 1.0}) : make_box(3, {1, 1, 1});
        const KernelEvaluator ev(box);
        Point c{{0.5, 0.5, n == 3 ? 0.5 : 0.0}};
        const double t = 1e-3;
        const double interior = ev.value(c, c, t) / phi_radial2(0.0, 2.0 * t, n);
        CHECK(interior == Catch::Approx(std::pow(2.0, 0.5 * n)).epsilon(0.01));

        // every 1-D factor doubles at a corner: 2^n on top of the interior 2^{n/2}
        const Point corner{{0, 0, 0}};
        const double cr = ev.value(corner, corner, 1e-4) / phi_radial2(0.0, 2e-4, n);
        CHECK(cr == Catch::Approx(std::pow(2.0, 1.5 * n)).epsilon(0.01));
    }
}

TEST_CASE("empirical gaussian bound constant is finite and truncation-stable") {
    const Domain sq = make_box(2, {1.0, 1.0});
    std::vector<double> tg;
    for (int k = 0; k < 8; ++k) tg.push_back(std::pow(10.0, -3.0 + 3.0 * k / 7.0));

    KernelTruncation k6;
    k6.images = 6;
    KernelTruncation k12;
    k12.images = 12;
    const double c6 = gaussian_bound_constant(KernelEvaluator(sq, k6), tg, 2000, 42);
    const double c12 = gaussian_bound_constant(KernelEvaluator(sq, k12), tg, 2000, 42);
    CHECK(std::isfinite(c6));
    CHECK(c6 > 0.0);
    CHECK(std::abs(c12 - c6) / c6 < 0.02);
    CHECK_THROWS_AS(gaussian_bound_constant(KernelEvaluator(sq), {0.5, 1.5}, 10, 1),
                    InvalidData);
}

namespace {

RepFormulaInput make_input(const Domain& d, const BoundaryPatch& patch, int grid_n,
                           const std::function<double(const Point&)>& u0, double q,
                           const std::vector<double>& times) {
    RepFormulaInput in;
    std::array<int, 3> counts{{grid_n, grid_n, d.n == 3 ? grid_n : 1}};
    in.grid = make_grid(d, patch, counts);
    in.u0.resize(in.grid.size());
    for (long long i = 0; i < in.grid.size(); ++i)
        in.u0[i] = u0(in.grid.coord(in.grid.multi(i)));
    in.q = q;
    in.gamma1_nodes = surface_nodes(patch, 16);
    in.history_times = times;
    in.history.assign(times.size(), std::vector<double>(in.gamma1_nodes.size(), 0.0));
    return in;
}

}  // namespace

TEST_CASE("representation formula: constant data with zero boundary history") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch patch = make_patch(sq, 2, {0.25}, {0.75});
    const KernelEvaluator ev(sq);
    auto in = make_input(sq, patch, 65, [](const Point&) { return 3.25; }, 2.0,
                         {0.0, 0.5, 1.0});
    for (double t : {0.05, 0.4, 1.0}) {
        for (Point x : {Point{{0.5, 0.5, 0}}, Point{{0.25, 0.0, 0}}}) {
            CHECK(rep_formula_eval(x, t, in, ev, patch) ==
                  Catch::Approx(3.25).epsilon(1e-8));
        }
    }
}

TEST_CASE("small-time recovery of continuous initial data at interior points") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch patch = make_patch(sq, 2, {0.25}, {0.75});
    const KernelEvaluator ev(sq);
    // continuous data violating the zero-flux compatibility; at an interior
    // point the recovery error is boundary-reflection dominated and decays
    // monotonically
    auto u0 = [](const Point& p) { return 1.0 + 0.2 * p[0] + 0.1 * p[1]; };
    auto in = make_input(sq, patch, 257, u0, 2.0, {0.0, 2.0});
    const Point x{{0.4, 0.6, 0}};
    double prev = 1e300;
    for (int j = 3; j <= 10; ++j) {
        const double t = std::pow(2.0, -j);
        const double err = std::abs(rep_formula_eval(x, t, in, ev, patch) - u0(x));
        CHECK(err <= prev * (1.0 + 1e-9));
        prev = err;
    }
    CHECK(prev < 1e-10);
}

TEST_CASE("time-shift continuity of the boundary-time integral, sqrt rate") {
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch patch = make_patch(sq, 2, {0.25}, {0.75});
    const KernelEvaluator ev(sq);
    const Point x{{0.5, 0.0, 0}};  // on the patch: the endpoint is singular
    const double t = 0.5;
    QuadratureControl ctl;
    auto shifted = [&](double eps) {
        // int_0^t PM(x, t + eps - tau) g(tau) dtau with g(tau) = 1 + tau,
        // integrated in s = sqrt(t - tau)
        auto f = [&](double s) {
            const double tau = t - s * s;
            return 2.0 * s * ev.patch_mass(x, patch, t + eps - tau) * (1.0 + tau);
        };
        return integrate(f, 0.0, std::sqrt(t), ctl).value;
    };
    const double base = shifted(0.0);
    double prev_diff = 1e300, rate_hi = 0.0, rate_lo = 1e300;
    for (int j = 4; j <= 12; ++j) {
        const double eps = std::pow(2.0, -j);
        const double diff = std::abs(shifted(eps) - base);
        CHECK(diff <= prev_diff * (1.0 + 1e-9));
        prev_diff = diff;
        const double r = diff / std::sqrt(eps);
        rate_hi = std::max(rate_hi, r);
        rate_lo = std::min(rate_lo, r);
    }
    CHECK(rate_hi < 10.0);           // bounded constant in front of sqrt(eps)
    CHECK(rate_hi / rate_lo < 4.0);  // consistent with the sqrt rate
}

TEST_CASE("time translation: restart through an intermediate state") {
    // pure diffusion: evolving u0 to T + t equals evolving the time-T state
    const Domain sq = make_box(2, {1.0, 1.0});
    const BoundaryPatch patch = make_patch(sq, 2, {0.25}, {0.75});
    const KernelEvaluator ev(sq);
    auto u0 = [](const Point& p) { return 1.0 + std::cos(M_PI * p[0]) * p[1]; };
    auto in = make_input(sq, patch, 129, u0, 2.0, {0.0, 2.0});

    const double T = 0.07, t = 0.13;
    auto inT = in;
    for (long long i = 0; i < in.grid.size(); ++i) {
        const Point y = in.grid.coord(in.grid.multi(i));
        inT.u0[i] = rep_formula_eval(y, T, in, ev, patch);
    }
    for (Point x : {Point{{0.5, 0.5, 0}}, Point{{0.9, 0.2, 0}}}) {
        const double direct = rep_formula_eval(x, T + t, in, ev, patch);
        const double restarted = rep_formula_eval(x, t, inT, ev, patch);
        CHECK(restarted == Catch::Approx(direct).epsilon(1e-6));
    }
}
