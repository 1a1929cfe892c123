#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lifespan/bounds.hpp"

using namespace lifespan;

TEST_CASE("E_q values and sandwich") {
    CHECK(e_q(2.0) == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(e_q(3.0) == Catch::Approx(4.0 / 27.0).epsilon(1e-14));
    for (double q : {1.01, 1.1, 2.0, 5.0, 50.0}) {
        const double e = e_q(q);
        CHECK(e > 1.0 / (3.0 * q));
        CHECK(e < std::min(1.0 / q, 1.0 / ((q - 1.0) * M_E)));
        CHECK(e < 1.0);
    }
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double q = 1.0 + 99.0 * u(rng) + 1e-9;
        const double e = e_q(q);
        CHECK(e > 1.0 / (3.0 * q));
        CHECK(e < std::min(1.0 / q, 1.0 / ((q - 1.0) * M_E)));
    }
    CHECK_THROWS_AS(e_q(1.0), InvalidData);
}

TEST_CASE("upper bound") {
    CHECK(upper_bound_constant_data(2.0, 0.5, 1.0, 1.0) == Catch::Approx(2.0));
    CHECK(upper_bound_constant_data(3.0, 1.0, 1.0, 2.0) == Catch::Approx(0.125));

    // grid quadrature route: u0(x) = 1 + x on the unit interval slab,
    // int (1+x)^{-1} = ln 2
    const int m = 20000;
    std::vector<double> samples(m), w(m, 1.0 / m);
    for (int i = 0; i < m; ++i) samples[i] = 1.0 + (i + 0.5) / m;
    CHECK(upper_bound(2.0, 1.0, samples, w) == Catch::Approx(std::log(2.0)).epsilon(1e-6));

    samples[7] = 0.0;
    CHECK_THROWS_AS(upper_bound(2.0, 1.0, samples, w), PreconditionViolated);
}

TEST_CASE("general lower bound: value and asymptotic orders") {
    BoundsConfig cfg;
    cfg.q = 2.0;
    cfg.m0 = 1.0;
    cfg.gamma1_area = 1.0;
    cfg.omega_volume = 1.0;
    cfg.n = 2;
    cfg.c_general = 1.0;
    CHECK(lower_bound_general(cfg) == Catch::Approx(std::log(1.0625)).epsilon(1e-12));

    // q -> 1+: the bound diverges like (q-1)^{-1}
    auto at_q = [&](double q) {
        BoundsConfig c = cfg;
        c.q = q;
        return lower_bound_general(c);
    };
    CHECK(at_q(1.001) / at_q(1.01) == Catch::Approx(10.0).epsilon(0.02));

    // |Gamma_1| -> 0+: only logarithmic growth
    auto ratio_to_log = [&](double area) {
        BoundsConfig c = cfg;
        c.gamma1_area = area;
        return lower_bound_general(c) /
               (c.c_general / (c.q - 1.0) * (2.0 / (c.n - 1.0)) * std::log(1.0 / area));
    };
    const double r6 = ratio_to_log(1e-6);
    const double r9 = ratio_to_log(1e-9);
    CHECK(std::abs(r9 - 1.0) < std::abs(r6 - 1.0));
    CHECK(r9 == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("critical lower bound and the regime gate") {
    BoundsConfig cfg;
    cfg.q = 2.0;
    cfg.m0 = 1.0;
    cfg.n = 3;
    cfg.gamma1_area = 0.01;
    const CriticalBound cb = lower_bound_critical(cfg);
    CHECK(cb.y == Catch::Approx(0.1).epsilon(1e-14));
    // default Y0 = 1/36, threshold Y0/q = 1/72 < 0.1: not applicable, Y carried
    CHECK_FALSE(cb.bound.has_value());
    CHECK(cb.y_threshold == Catch::Approx(1.0 / 72.0));

    cfg.gamma1_area = 1e-6;
    const CriticalBound cb2 = lower_bound_critical(cfg);
    CHECK(cb2.y == Catch::Approx(1e-3).epsilon(1e-12));
    REQUIRE(cb2.bound.has_value());
    // C/( (q-1) Y ) with the default C = 1/(40 C*) = 1/40
    CHECK(*cb2.bound == Catch::Approx(25.0).epsilon(1e-12));

    // n = 2: bound order |Gamma_1|^{-1}/ln(1/|Gamma_1|) as area -> 0
    BoundsConfig c2 = cfg;
    c2.n = 2;
    auto scaled = [&](double a) {
        c2.gamma1_area = a;
        const CriticalBound b = lower_bound_critical(c2);
        REQUIRE(b.bound.has_value());
        return *b.bound * a * std::log(1.0 / a);
    };
    CHECK(scaled(1e-8) == Catch::Approx(scaled(1e-10)).epsilon(0.05));
}

TEST_CASE("series lower bound: closed forms and the inequality") {
    const SeriesBound s1 = series_lower_bound(0.5, 1.0);
    CHECK(s1.sum == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(s1.bound == Catch::Approx(std::log(1.5) / (2.0 * std::log(2.0))).epsilon(1e-12));
    CHECK(s1.holds);

    // A <= 1/lambda: S = lambda A / (1 - lambda)
    const SeriesBound s2 = series_lower_bound(0.3, 2.0);
    CHECK(s2.sum == Catch::Approx(0.6 / 0.7).epsilon(1e-12));

    const SeriesBound s3 = series_lower_bound(0.5, 2.0);
    CHECK(s3.sum == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(s3.bound == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(s3.holds);

    // brute-force summation oracle on moderate arguments
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const double lambda = 0.02 + 0.96 * u(rng);
        const double A = std::exp(-10.0 + 30.0 * u(rng));
        const SeriesBound s = series_lower_bound(lambda, A);
        CHECK(s.holds);
        if (rep % 10 == 0) {
            double direct = 0.0;
            for (int k = 1; k < 4000; ++k) {
                const double term = std::min(1.0, std::pow(lambda, k) * A);
                direct += term;
                if (term < 1e-17) break;
            }
            CHECK(s.sum == Catch::Approx(direct).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(series_lower_bound(1.0, 1.0), InvalidData);
    CHECK_THROWS_AS(series_lower_bound(0.5, 0.0), InvalidData);
}

TEST_CASE("g_root: boundary, quadratic oracle, NoRoot") {
    // the maximizer: y = m^{1-q} E_q has the root q m/(q-1)
    CHECK(g_root(2.0, 1.0, 0.25).value() == Catch::Approx(2.0).epsilon(1e-12));

    // q = 2 quadratic formula: delta lam^2 - lam + m = 0
    CHECK(g_root(2.0, 1.0, 0.1).value() ==
          Catch::Approx((1.0 - std::sqrt(0.6)) / 0.2).epsilon(1e-12));

    CHECK_FALSE(g_root(2.0, 1.0, 0.3).has_value());

    std::mt19937_64 rng(31415);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const double q = 1.05 + 5.0 * u(rng);
        const double m = 0.1 + 10.0 * u(rng);
        const double ymax = std::pow(m, 1.0 - q) * e_q(q);
        const double y = ymax * (1e-4 + (1 - 2e-4) * u(rng));
        const auto root = g_root(q, m, y);
        REQUIRE(root.has_value());
        const double lam = *root;
        CHECK(lam > m);
        CHECK(lam <= q * m / (q - 1.0) * (1 + 1e-12));
        const double g = (lam - m) / std::pow(lam, q);
        CHECK(g == Catch::Approx(y).epsilon(1e-10));
        CHECK_FALSE(g_root(q, m, ymax * 1.001).has_value());
    }
}

TEST_CASE("doubling schedule: series inequality and saturation") {
    std::mt19937_64 rng(2025);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        BoundsConfig cfg;
        cfg.q = 1.05 + 3.0 * u(rng);
        cfg.m0 = std::exp(-2.0 + 4.0 * u(rng));
        cfg.gamma1_area = std::exp(-8.0 + 8.0 * u(rng));
        cfg.n = rep % 2 ? 2 : 3;
        cfg.c_general = std::exp(-3.0 + 3.0 * u(rng));
        const DoublingSchedule ds = doubling_schedule(cfg);
        CHECK(ds.sum >= ds.series_bound * (1 - 1e-12));
        CHECK(ds.lambda == Catch::Approx(std::pow(2.0, -4.0 * (cfg.q - 1.0))));

        // direct-summation oracle
        double direct = 0.0;
        for (int k = 1; k < 100000; ++k) {
            const double term =
                std::min(1.0, std::exp(ds.log_argument + k * std::log(ds.lambda)));
            direct += term;
            if (term < 1e-16) break;
        }
        CHECK(ds.sum == Catch::Approx(direct).epsilon(1e-8));
    }

    // deep saturation regime: many unit terms
    BoundsConfig sat;
    sat.q = 2.0;
    sat.m0 = 0.01;
    sat.gamma1_area = 0.01;
    sat.n = 2;
    const DoublingSchedule ds = doubling_schedule(sat);
    CHECK(ds.sum > 9.0);

    // q -> 1+: the schedule sum diverges like (q-1)^{-1}
    BoundsConfig q1;
    q1.m0 = 1.0;
    q1.gamma1_area = 0.01;
    q1.n = 2;
    q1.q = 1.01;
    const double s1 = doubling_schedule(q1).sum;
    q1.q = 1.02;
    const double s2 = doubling_schedule(q1).sum;
    CHECK(s1 / s2 == Catch::Approx(2.0).epsilon(0.1));
}

TEST_CASE("critical schedule: recurrence, termination, length bound") {
    // q = 2 lets every step be cross-checked by the quadratic formula
    {
        const double delta1 = 0.01;
        const ScheduleResult sr = critical_schedule(2.0, 1.0, delta1);
        CHECK_FALSE(sr.empty);
        CHECK(sr.L >= 9);  // bound gives L > 8.2
        CHECK(sr.l_lower_bound == Catch::Approx((100.0 - 18.0) / 10.0));
        CHECK(static_cast<double>(sr.L) > sr.l_lower_bound);
        double m = 1.0;
        for (std::size_t k = 1; k < sr.M.size(); ++k) {
            m = (1.0 - std::sqrt(1.0 - 4.0 * delta1 * m)) / (2.0 * delta1);
            CHECK(sr.M[k] == Catch::Approx(m).epsilon(1e-11));
        }
    }
    {
        const ScheduleResult sr = critical_schedule(2.0, 1.0, 0.1);
        CHECK(sr.M[1] == Catch::Approx(1.1270166537925831).epsilon(1e-12));
    }

    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double q = 1.1 + 3.0 * u(rng);
        const double m0 = 0.2 + 5.0 * u(rng);
        const double frac = std::exp(-8.0 * u(rng));  // (e^-8, 1]
        const double delta1 = frac * e_q(q) * std::pow(m0, 1.0 - q);
        const ScheduleResult sr = critical_schedule(q, m0, delta1);
        CHECK_FALSE(sr.empty);
        CHECK(static_cast<double>(sr.L) > sr.l_lower_bound);  // strict
        for (std::size_t k = 1; k < sr.M.size(); ++k) {
            CHECK(sr.M[k] > sr.M[k - 1]);
            CHECK(sr.M[k] <= q / (q - 1.0) * sr.M[k - 1] * (1 + 1e-12));
            // x_{k-1} = x_k (1 - x_k)^{q-1}
            const double lhs = sr.x[k - 1];
            const double rhs = sr.x[k] * std::pow(1.0 - sr.x[k], q - 1.0);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
        }
        CHECK(std::pow(sr.M.back(), q - 1.0) * delta1 > e_q(q));  // stop reason
    }

    // empty construction when x0 > E_q
    const ScheduleResult empty = critical_schedule(2.0, 1.0, 0.3);
    CHECK(empty.empty);
    CHECK(empty.L == 0);
}

TEST_CASE("calibration inverts the bound formulas") {
    const double c = calibrate_c_general(1.7, 2.0, 1.0, 0.5, 2);
    BoundsConfig cfg;
    cfg.q = 2.0;
    cfg.m0 = 1.0;
    cfg.gamma1_area = 0.5;
    cfg.n = 2;
    cfg.c_general = c;
    CHECK(lower_bound_general(cfg) == Catch::Approx(1.7).epsilon(1e-12));

    const double y = critical_y(2, 1.0, 2.0, 0.5);
    const double cc = calibrate_c_critical(1.7, 2.0, y);
    CHECK(cc / ((2.0 - 1.0) * y) == Catch::Approx(1.7).epsilon(1e-12));
}
