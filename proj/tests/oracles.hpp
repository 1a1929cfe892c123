// Test-only oracles, independent of the library's quadrature paths.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

namespace oracles {

// int_0^T int_0^R r t^{-3/2} exp(-r^2/4t) dr dt by antidifferentiation:
// phi_3(T,R) = 2 sqrt(pi) R erfc(R/(2 sqrt(T))) + 4 sqrt(T)(1 - e^{-R^2/(4T)})
inline double phi3_closed(double T, double R) {
    const double c = R / (2.0 * std::sqrt(T));
    return 2.0 * std::sqrt(M_PI) * R * std::erfc(c) +
           4.0 * std::sqrt(T) * (-std::expm1(-c * c));
}

// phi_2(T,R) = R E_1(R^2/(4T)) + 2 sqrt(pi T) erf(R/(2 sqrt(T)))
inline double phi2_closed(double T, double R) {
    const double a = R * R / (4.0 * T);
    return R * boost::math::expint(1, a) +
           2.0 * std::sqrt(M_PI * T) * std::erf(R / (2.0 * std::sqrt(T)));
}

// int_1^inf y^{-1/2} e^{-y/4} dy = 2 sqrt(pi) erfc(1/2)
inline double tail3_closed() { return 2.0 * std::sqrt(M_PI) * std::erfc(0.5); }

// int_1^inf e^{-y/4} dy = 4 e^{-1/4}
inline double tail4_closed() { return 4.0 * std::exp(-0.25); }

// Independently written 1-D reference solver for
//   u_t = u_xx on (0, 1),  -u_x(0,t) = u(0,t)^q,  u_x(1,t) = 0,
// explicit Euler with ghost nodes on a uniform grid.
struct OneDimTrace {
    std::vector<double> t;
    std::vector<double> M;
};

inline OneDimTrace solve_1d_radiating(double q, double u0, int nodes, double m_stop,
                                      double safety = 0.8) {
    const double h = 1.0 / (nodes - 1);
    std::vector<double> u(nodes, u0), v(nodes);
    OneDimTrace out;
    double t = 0.0, M = u0;
    out.t.push_back(0);
    out.M.push_back(M);
    long long guard = 0;
    while (M < m_stop) {
        const double dt =
            safety * std::min(h * h / 2.0, h / (2.0 * q * std::pow(M, q - 1.0)));
        for (int i = 0; i < nodes; ++i) {
            double lo, hi;
            if (i == 0) {
                hi = u[1];
                lo = u[1] + 2.0 * h * std::pow(u[0], q);
            } else if (i == nodes - 1) {
                lo = u[nodes - 2];
                hi = u[nodes - 2];
            } else {
                lo = u[i - 1];
                hi = u[i + 1];
            }
            v[i] = u[i] + dt * (lo + hi - 2.0 * u[i]) / (h * h);
        }
        u.swap(v);
        t += dt;
        for (double x : u) M = std::max(M, x);
        out.t.push_back(t);
        out.M.push_back(M);
        if (++guard > 200000000) throw std::runtime_error("1-D oracle did not blow up");
    }
    return out;
}

}  // namespace oracles
