#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lifespan/errors.hpp"

namespace lifespan {

/// Controls for the adaptive time/space integrals. `sqrt_substitution`
/// enables the s = sqrt(t - tau) change of variables at weakly singular
/// endpoints.
struct QuadratureControl {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 32768;
    bool sqrt_substitution = true;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw InvalidData("quadrature tolerances must be positive");
        if (max_subdivisions < 16)
            throw InvalidData("max_subdivisions must be >= 16");
    }

    int max_depth() const {
        int d = 0;
        while ((1 << d) < max_subdivisions && d < 30) ++d;
        return d;
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

template <class F>
QuadResult gk_integrate(const F& f, double a, double b, const QuadratureControl& ctl) {
    if (a == b) return {0.0, 0.0};
    double err = 0.0;
    const double tol = std::max(ctl.rel_tol * 0.25, 1e-15);
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, ctl.max_depth(), tol, &err);
    return {v, err};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod on [a, b]; throws QuadratureFailure if the error
/// estimate exceeds max(abs_tol, rel_tol * |value|).
template <class F>
QuadResult integrate(const F& f, double a, double b,
                     const QuadratureControl& ctl = QuadratureControl{}) {
    ctl.validate();
    QuadResult r = detail::gk_integrate(f, a, b, ctl);
    if (!(r.error <= std::max(ctl.abs_tol, ctl.rel_tol * std::abs(r.value))))
        throw QuadratureFailure("quadrature tolerance not reached", r.value, r.error);
    return r;
}

/// Adaptive Gauss-Kronrod on [a, inf).
template <class F>
QuadResult integrate_to_inf(const F& f, double a,
                            const QuadratureControl& ctl = QuadratureControl{}) {
    ctl.validate();
    QuadResult r = detail::gk_integrate(f, a, std::numeric_limits<double>::infinity(), ctl);
    if (!(r.error <= std::max(ctl.abs_tol, ctl.rel_tol * std::abs(r.value))))
        throw QuadratureFailure("quadrature tolerance not reached", r.value, r.error);
    return r;
}

}  // namespace lifespan
