#pragma once

#include <cmath>

#include "lifespan/errors.hpp"
#include "lifespan/geometry.hpp"
#include "lifespan/quadrature.hpp"

namespace lifespan {

/// Free-space heat kernel (4 pi t)^{-n/2} exp(-|x|^2/(4t)).
inline double phi_radial2(double r2, double t, int n) {
    if (!(t > 0.0)) throw InvalidTime("heat kernel requires t > 0");
    return std::pow(4.0 * M_PI * t, -0.5 * n) * std::exp(-r2 / (4.0 * t));
}

inline double phi(const Point& x, double t, int n) {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
    return phi_radial2(r2, t, n);
}

namespace detail {

inline QuadratureControl inner_control(const QuadratureControl& ctl) {
    QuadratureControl c = ctl;
    c.abs_tol = std::max(ctl.abs_tol * 1e-2, 1e-14);
    c.rel_tol = std::max(ctl.rel_tol * 1e-2, 1e-12);
    return c;
}

}  // namespace detail

/// tail_integral(a, n) = int_a^inf y^{n/2-2} e^{-y/4} dy, the inner integral
/// of the region below t = r^2 after the substitution y = r^2/t. Evaluated
/// in log space (y = e^s), where the integrand is entire.
inline double tail_integral(double a, int n, const QuadratureControl& ctl = {}) {
    if (!(a > 0.0)) throw InvalidData("tail integral requires a > 0");
    const double p1 = 0.5 * n - 1.0;  // p + 1
    if (a > 4000.0) return 0.0;       // integrand below ~1e-430
    const double s0 = std::log(a);
    const double s1 = std::max(s0 + 5.0, std::log(4.0 * 745.0));
    return integrate([p1](double s) { return std::exp(p1 * s - 0.25 * std::exp(s)); },
                     s0, s1, ctl)
        .value;
}

namespace detail {

/// int_a^1 y^{n/2-2} K(y) dy with K = e^{-y/4} (weighted) or 1; log-space.
inline double low_integral(double a, int n, bool weighted, const QuadratureControl& ctl) {
    if (a >= 1.0) return 0.0;
    const double p1 = 0.5 * n - 1.0;
    double s0 = std::log(a);
    if (n >= 3) s0 = std::max(s0, -70.0);  // truncated mass < e^{-35}
    auto f = [p1, weighted](double s) {
        const double w = weighted ? std::exp(-0.25 * std::exp(s)) : 1.0;
        return std::exp(p1 * s) * w;
    };
    return integrate(f, s0, 0.0, ctl).value;
}

}  // namespace detail

/// Region above the parabola t = r^2 (region I of the proofs):
/// int over {0 < r < min(R, sqrt(T)), r^2 < t < T} of r^{n-2} t^{-n/2} K dr dt
/// with K = exp(-r^2/(4t)) when weighted, K = 1 otherwise.
inline double phi_n_region_above(double T, double R, int n, bool weighted,
                                 const QuadratureControl& ctl = {}) {
    if (!(T > 0.0) || !(R > 0.0)) throw InvalidData("phi_n requires T, R > 0");
    const double r0 = std::min(R, std::sqrt(T));
    const QuadratureControl ictl = detail::inner_control(ctl);
    // inner in y = r^2/t: r^{n-2} * int_{r^2}^T t^{-n/2} K dt = int_{r^2/T}^1 y^{n/2-2} K(y) dy
    auto inner = [&](double r) {
        const double a = r * r / T;
        if (a >= 1.0 || !(r > 0.0)) return 0.0;
        return detail::low_integral(a, n, weighted, ictl);
    };
    if (n == 2) {
        // logarithmic blow-up of the inner integral as r -> 0; integrate in
        // r = r0 e^{-v} which makes the integrand entire with e^{-v} decay.
        // Truncating at v = 40 drops mass of order 40 e^{-40}.
        auto g = [&](double v) {
            const double r = r0 * std::exp(-v);
            return r * inner(r);  // the r factor is the Jacobian dr = -r dv
        };
        return integrate(g, 0.0, 40.0, ctl).value;
    }
    return integrate(inner, 0.0, r0, ctl).value;
}

/// Region below the parabola t = r^2 (region II): the inner t-integral is
/// evaluated through the substitution y = r^2/t as tail_integral(max(1, r^2/T)).
inline double phi_n_region_below(double T, double R, int n,
                                 const QuadratureControl& ctl = {}) {
    if (!(T > 0.0) || !(R > 0.0)) throw InvalidData("phi_n requires T, R > 0");
    const QuadratureControl ictl = detail::inner_control(ctl);
    auto f = [&](double r) { return tail_integral(std::max(1.0, r * r / T), n, ictl); };
    const double rs = std::min(R, std::sqrt(T));
    if (rs < R) {
        const double v1 = integrate(f, 0.0, rs, ctl).value;
        // beyond r^2/T ~ 4000 the tail underflows; cut the outer range there
        const double rmax = std::min(R, std::sqrt(4000.0 * T));
        const double v2 = rmax > rs ? integrate(f, rs, rmax, ctl).value : 0.0;
        return v1 + v2;
    }
    return integrate(f, 0.0, R, ctl).value;
}

/// phi_n(T,R) = int_0^T int_0^R r^{n-2} t^{-n/2} exp(-r^2/(4t)) dr dt,
/// split along t = r^2.
inline double phi_n(double T, double R, int n, const QuadratureControl& ctl = {}) {
    return phi_n_region_above(T, R, n, true, ctl) + phi_n_region_below(T, R, n, ctl);
}

/// Explicit two-sided envelope for phi_n assembled from the proofs'
/// sub-integral bounds, together with the quadrature value.
struct SandwichResult {
    double lower = 0.0;
    double upper = 0.0;
    double value = 0.0;
    bool pass = false;
};

/// Coefficient of t^{-1/2} in the Gaussian-moment bound of the region-II
/// inner integral: 2^{n-2} Gamma((n-1)/2).
inline double gaussian_moment_constant(int n) {
    return std::pow(2.0, n - 2) * std::tgamma(0.5 * (n - 1));
}

inline SandwichResult phi_n_sandwich(double T, double R, int n,
                                     const QuadratureControl& ctl = {}) {
    if (n < 2) throw InvalidData("phi_n_sandwich requires n >= 2");
    SandwichResult s;
    s.value = phi_n(T, R, n, ctl);
    const double e14 = std::exp(-0.25);
    if (T < R * R) {
        const double sqT = std::sqrt(T);
        s.lower = 2.0 * sqT * e14 / (n - 1);
        s.upper = 2.0 * sqT / (n - 1) + 2.0 * gaussian_moment_constant(n) * sqT;
    } else {
        const double ct = tail_integral(1.0, n, detail::inner_control(ctl));
        double u;  // exact unweighted region-I integral
        if (n == 2)
            u = R * (std::log(T / (R * R)) + 2.0);
        else
            u = (2.0 * R / (n - 2)) *
                (1.0 - std::pow(R * R / T, 0.5 * n - 1.0) / (n - 1));
        s.lower = e14 * u + ct * R;
        s.upper = u + ct * R;
    }
    const double slack = 1e2 * (ctl.abs_tol + ctl.rel_tol * std::abs(s.value));
    s.pass = s.lower - slack <= s.value && s.value <= s.upper + slack;
    return s;
}

/// Surface integral of Phi(x - y, t) over a flat axis-aligned patch.
/// Closed form (erf products) for intervals/rectangles; disks support the
/// center axis only.
inline double patch_heat_mass(const Point& x, const BoundaryPatch& patch, double t) {
    if (!(t > 0.0)) throw InvalidTime("patch heat mass requires t > 0");
    const double d = x[patch.normal_axis] - patch.plane_offset;
    const double s2 = 2.0 * std::sqrt(t);
    double v = std::exp(-d * d / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
    if (patch.shape == BoundaryPatch::Shape::Disk) {
        const double u0 = x[patch.in_axes[0]] - patch.disk_center[0];
        const double u1 = x[patch.in_axes[1]] - patch.disk_center[1];
        if (u0 * u0 + u1 * u1 > 1e-24)
            throw InvalidData("disk patch mass implemented for the center axis only");
        const double rho = patch.disk_radius;
        // (4 pi t)^{-1} * 2 pi * 2t * (1 - e^{-rho^2/(4t)})
        return v * (-std::expm1(-rho * rho / (4.0 * t)));
    }
    const int nin = patch.dim - 1;
    for (int k = 0; k < nin; ++k) {
        const double c = x[patch.in_axes[k]];
        v *= 0.5 * (std::erf((patch.hi[k] - c) / s2) - std::erf((patch.lo[k] - c) / s2));
    }
    return v;
}

/// int_0^{T_end} int_patch Phi(x-y, t) dS(y) dt. The t -> 0 endpoint (weakly
/// singular when x lies on the patch closure) is handled by s = sqrt(t).
inline QuadResult boundary_time_integral(const Point& x, const BoundaryPatch& patch,
                                         double T_end,
                                         const QuadratureControl& ctl = {}) {
    if (!(T_end > 0.0)) throw InvalidTime("T_end must be positive");
    if (ctl.sqrt_substitution) {
        auto f = [&](double s) {
            if (s <= 0.0) return 0.0;
            return 2.0 * s * patch_heat_mass(x, patch, s * s);
        };
        return integrate(f, 0.0, std::sqrt(T_end), ctl);
    }
    auto f = [&](double t) { return t > 0.0 ? patch_heat_mass(x, patch, t) : 0.0; };
    return integrate(f, 0.0, T_end, ctl);
}

/// Exact constant of the reduction of the centered flat-ball boundary-time
/// integral to phi_n: I(rho) = (4 pi)^{-n/2} omega_{n-2} phi_n(2, rho).
inline double reduction_constant(int n) {
    const double omega = n == 2 ? 2.0 : 2.0 * M_PI;
    return std::pow(4.0 * M_PI, -0.5 * n) * omega;
}

struct SharpnessResult {
    double rho = 0.0;
    double integral = 0.0;
    double predicted_order = 0.0;
    double ratio = 0.0;
};

/// I(rho) = int_0^2 int_{B~(rho)} Phi dS dt at the patch center, divided by
/// the predicted order (rho for n = 3, rho ln(1 + 1/rho) for n = 2).
inline SharpnessResult sharpness_ratio(double rho, int n,
                                       const QuadratureControl& ctl = {}) {
    if (!(rho > 0.0) || rho > 1.0) throw InvalidData("sharpness requires 0 < rho <= 1");
    if (n != 2 && n != 3) throw InvalidData("sharpness requires n in {2,3}");
    const BoundaryPatch patch = make_free_ball_patch(n, rho);
    Point x{{0.0, 0.0, 0.0}};
    SharpnessResult r;
    r.rho = rho;
    r.integral = boundary_time_integral(x, patch, 2.0, ctl).value;
    r.predicted_order = n == 3 ? rho : rho * std::log1p(1.0 / rho);
    r.ratio = r.integral / r.predicted_order;
    return r;
}

}  // namespace lifespan
