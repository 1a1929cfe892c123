#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lifespan/errors.hpp"
#include "lifespan/freespace.hpp"
#include "lifespan/geometry.hpp"
#include "lifespan/quadrature.hpp"

namespace lifespan {

struct KernelTruncation {
    int images = 6;           // K: image copies per side, per axis
    int modes = 0;            // M: eigenmodes per axis; 0 = pick from weight_tol
    double mode_weight_tol = 1e-14;
};

namespace detail {

/// One axis of the tensor-product Neumann kernel on [0, L]. The 1-D kernel
/// is W(x - y, t) + W(x + y, t) where W is the 2L-periodized Gaussian,
/// summed as images for t <= t_switch and as a cosine expansion beyond.
struct KernelAxis {
    double L = 1.0;
    double t_switch = 0.0;  // L^2 / pi^2
    int K = 6;
    int M = 5;

    void init(double length, const KernelTruncation& tr) {
        L = length;
        t_switch = L * L / (M_PI * M_PI);
        K = std::max(1, tr.images);
        if (tr.modes > 0) {
            M = tr.modes;
        } else {
            // first dropped mode must weigh below tol at t_switch:
            // (2/L) e^{-(M+1)^2} < tol
            M = 1;
            while ((2.0 / L) * std::exp(-static_cast<double>(M + 1) * (M + 1)) >=
                   tr.mode_weight_tol)
                ++M;
        }
    }

    double wrapped(double z, double t) const {
        if (t <= t_switch) {
            const double inv = 1.0 / std::sqrt(4.0 * M_PI * t);
            double s = 0.0;
            for (int k = -K; k <= K; ++k) {
                const double d = z - 2.0 * k * L;
                const double a = d * d / (4.0 * t);
                if (a < 700.0) s += std::exp(-a);
            }
            return inv * s;
        }
        double s = 0.5 / L;
        const double w = M_PI / L;
        for (int m = 1; m <= M; ++m) {
            const double a = (m * w) * (m * w) * t;
            if (a > 700.0) break;
            s += std::exp(-a) * std::cos(m * w * z) / L;
        }
        return s;
    }

    /// Antiderivative of wrapped() in z (branch-consistent).
    double wrapped_antideriv(double z, double t) const {
        if (t <= t_switch) {
            const double s2 = 2.0 * std::sqrt(t);
            double s = 0.0;
            for (int k = -K; k <= K; ++k) s += 0.5 * std::erf((z - 2.0 * k * L) / s2);
            return s;
        }
        double s = 0.5 * z / L;
        const double w = M_PI / L;
        for (int m = 1; m <= M; ++m) {
            const double a = (m * w) * (m * w) * t;
            if (a > 700.0) break;
            s += std::exp(-a) * std::sin(m * w * z) / (m * M_PI);
        }
        return s;
    }

    double value(double x, double y, double t) const {
        return wrapped(x - y, t) + wrapped(x + y, t);
    }

    /// int_a^b N_1(x, y, t) dy
    double segment_integral(double x, double a, double b, double t) const {
        return wrapped_antideriv(x - a, t) - wrapped_antideriv(x - b, t) +
               wrapped_antideriv(x + b, t) - wrapped_antideriv(x + a, t);
    }

    double mass(double x, double t) const { return segment_integral(x, 0.0, L, t); }
};

}  // namespace detail

/// Neumann heat kernel N(x, y, t) of an axis-aligned box, evaluated as a
/// product of 1-D kernels with per-axis image/eigenfunction switching.
class KernelEvaluator {
  public:
    KernelEvaluator() = default;

    KernelEvaluator(const Domain& domain, const KernelTruncation& trunc = {})
        : domain_(domain), trunc_(trunc) {
        if (!domain.is_box())
            throw InvalidGeometry("the Neumann kernel evaluator requires a box domain");
        for (int a = 0; a < domain.n; ++a) axes_[a].init(domain.extents[a], trunc);
    }

    const Domain& domain() const { return domain_; }
    const KernelTruncation& truncation() const { return trunc_; }
    int dim() const { return domain_.n; }
    double t_switch(int axis) const { return axes_[axis].t_switch; }

    double axis_value(int axis, double x, double y, double t) const {
        check_time(t);
        return axes_[axis].value(x, y, t);
    }

    /// 2L-periodized Gaussian W(z, t); the 1-D kernel is W(x-y) + W(x+y).
    double axis_wrapped(int axis, double z, double t) const {
        check_time(t);
        return axes_[axis].wrapped(z, t);
    }

    double axis_value_image(int axis, double x, double y, double t) const {
        check_time(t);
        const auto& ax = axes_[axis];
        const double inv = 1.0 / std::sqrt(4.0 * M_PI * t);
        double s = 0.0;
        for (int k = -ax.K; k <= ax.K; ++k) {
            const double d1 = x - y - 2.0 * k * ax.L;
            const double d2 = x + y - 2.0 * k * ax.L;
            const double a1 = d1 * d1 / (4.0 * t);
            const double a2 = d2 * d2 / (4.0 * t);
            if (a1 < 700.0) s += std::exp(-a1);
            if (a2 < 700.0) s += std::exp(-a2);
        }
        return inv * s;
    }

    double axis_value_eigen(int axis, double x, double y, double t) const {
        check_time(t);
        const auto& ax = axes_[axis];
        double s = 1.0 / ax.L;
        const double w = M_PI / ax.L;
        for (int m = 1; m <= ax.M; ++m) {
            const double a = (m * w) * (m * w) * t;
            if (a > 700.0) break;
            s += 2.0 * std::exp(-a) * std::cos(m * w * x) * std::cos(m * w * y) / ax.L;
        }
        return s;
    }

    double value(const Point& x, const Point& y, double t) const {
        check_time(t);
        double v = 1.0;
        for (int a = 0; a < domain_.n; ++a) v *= axes_[a].value(x[a], y[a], t);
        return v;
    }

    double axis_segment_integral(int axis, double x, double a, double b, double t) const {
        check_time(t);
        return axes_[axis].segment_integral(x, a, b, t);
    }

    /// int_Omega N(x, y, t) dy; equals 1 up to truncation error.
    double domain_mass(const Point& x, double t) const {
        check_time(t);
        double v = 1.0;
        for (int a = 0; a < domain_.n; ++a) v *= axes_[a].mass(x[a], t);
        return v;
    }

    /// int over a box-face patch of N(x, y, t) dS(y), exact in space.
    double patch_mass(const Point& x, const BoundaryPatch& patch, double t) const {
        check_time(t);
        if (patch.shape == BoundaryPatch::Shape::Disk)
            throw InvalidData("kernel patch mass supports interval/rect patches");
        double v = axes_[patch.normal_axis].value(x[patch.normal_axis],
                                                  patch.plane_offset, t);
        const int nin = domain_.n - 1;
        for (int k = 0; k < nin; ++k) {
            const int a = patch.in_axes[k];
            v *= axes_[a].segment_integral(x[a], patch.lo[k], patch.hi[k], t);
        }
        return v;
    }

  private:
    static void check_time(double t) {
        if (!(t > 0.0)) throw InvalidTime("Neumann kernel requires t > 0");
    }

    Domain domain_;
    KernelTruncation trunc_;
    std::array<detail::KernelAxis, 3> axes_;
};

/// Empirical constant of the Gaussian bound N(x,y,t) <= C Phi(x-y, 2t) over
/// sampled triples with t in (0, 1]: returns sup N / Phi(.,2t).
inline double gaussian_bound_constant(const KernelEvaluator& ev,
                                      const std::vector<double>& t_grid,
                                      int random_samples = 2000,
                                      std::uint64_t seed = 2718281828ull) {
    const int n = ev.dim();
    for (double t : t_grid)
        if (!(t > 0.0) || t > 1.0) throw InvalidData("gaussian bound requires t in (0,1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<Point> special;
    Point corner{{0, 0, 0}}, center{{0, 0, 0}}, far{{0, 0, 0}};
    for (int a = 0; a < n; ++a) {
        center[a] = 0.5 * ev.domain().extents[a];
        far[a] = ev.domain().extents[a];
    }
    special.push_back(corner);
    special.push_back(center);
    special.push_back(far);

    double sup = 0.0;
    auto probe = [&](const Point& x, const Point& y, double t) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (x[a] - y[a]) * (x[a] - y[a]);
        const double denom = phi_radial2(r2, 2.0 * t, n);
        if (denom <= 0.0) return;
        sup = std::max(sup, ev.value(x, y, t) / denom);
    };
    for (double t : t_grid) {
        for (const Point& s : special) probe(s, s, t);
        for (int i = 0; i < random_samples; ++i) {
            Point x{{0, 0, 0}}, y{{0, 0, 0}};
            for (int a = 0; a < n; ++a) {
                x[a] = unif(rng) * ev.domain().extents[a];
                y[a] = unif(rng) * ev.domain().extents[a];
            }
            probe(x, y, t);
        }
    }
    return sup;
}

/// Sampled initial data plus a Gamma_1 boundary history, the ingredients of
/// the representation formula.
struct RepFormulaInput {
    // tensor grid samples of u0 over the box (lexicographic in grid order)
    Grid grid;
    std::vector<double> u0;
    double q = 2.0;
    // boundary trace u(y, tau) at the patch surface nodes
    std::vector<SurfaceNode> gamma1_nodes;
    std::vector<double> history_times;            // strictly increasing from 0
    std::vector<std::vector<double>> history;     // [time index][node]

    void validate() const {
        if (!(q > 1.0)) throw InvalidData("q must exceed 1");
        if (history_times.empty() || history_times.front() != 0.0)
            throw InvalidData("boundary history must start at time 0");
        for (std::size_t i = 1; i < history_times.size(); ++i)
            if (!(history_times[i] > history_times[i - 1]))
                throw InvalidData("boundary history times must be strictly increasing");
        for (const auto& row : history) {
            if (row.size() != gamma1_nodes.size())
                throw InvalidData("history row size mismatch");
            for (double v : row)
                if (!(v >= 0.0)) throw InvalidData("boundary history must be nonnegative");
        }
    }

    /// linear interpolation of the node trace at time tau
    double node_value(std::size_t j, double tau) const {
        const auto& ts = history_times;
        if (tau <= ts.front()) return history.front()[j];
        if (tau >= ts.back()) return history.back()[j];
        const auto it = std::upper_bound(ts.begin(), ts.end(), tau);
        const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
        const std::size_t lo = hi - 1;
        const double w = (tau - ts[lo]) / (ts[hi] - ts[lo]);
        return (1.0 - w) * history[lo][j] + w * history[hi][j];
    }
};

namespace detail {

inline double tensor_volume_term(const Point& x, double t, const RepFormulaInput& in,
                                 const KernelEvaluator& ev) {
    const Grid& g = in.grid;
    const int n = g.n;
    // per-axis kernel row scaled by trapezoid weights
    std::array<std::vector<double>, 3> rows;
    for (int a = 0; a < n; ++a) {
        rows[a].resize(g.counts[a]);
        for (int i = 0; i < g.counts[a]; ++i) {
            const double w = (i == 0 || i == g.counts[a] - 1) ? 0.5 * g.h[a] : g.h[a];
            rows[a][i] = w * ev.axis_value(a, x[a], i * g.h[a], t);
        }
    }
    double acc = 0.0;
    if (n == 2) {
        for (int j = 0; j < g.counts[1]; ++j) {
            double inner = 0.0;
            for (int i = 0; i < g.counts[0]; ++i)
                inner += rows[0][i] * in.u0[g.lin(i, j)];
            acc += rows[1][j] * inner;
        }
    } else {
        for (int k = 0; k < g.counts[2]; ++k) {
            double mid = 0.0;
            for (int j = 0; j < g.counts[1]; ++j) {
                double inner = 0.0;
                for (int i = 0; i < g.counts[0]; ++i)
                    inner += rows[0][i] * in.u0[g.lin(i, j, k)];
                mid += rows[1][j] * inner;
            }
            acc += rows[2][k] * mid;
        }
    }
    return acc;
}

inline bool on_patch_closure(const Point& x, const BoundaryPatch& patch, double tol) {
    if (std::abs(x[patch.normal_axis] - patch.plane_offset) > tol) return false;
    const int nin = patch.dim - 1;
    for (int k = 0; k < nin; ++k) {
        const double c = x[patch.in_axes[k]];
        if (c < patch.lo[k] - tol || c > patch.hi[k] + tol) return false;
    }
    return true;
}

}  // namespace detail

/// Representation-formula evaluation
///   u(x,t) = int_Omega N(x,y,t) u0(y) dy
///          + int_0^t int_{Gamma_1} N(x,y,t-tau) u^q(y,tau) dS(y) dtau,
/// valid for x in the closed domain. The tau -> t endpoint uses
/// s = sqrt(t - tau); when x sits on the patch closure the last sliver is
/// integrated against the exact continuum patch mass of the kernel with the
/// locally constant boundary value at x.
inline double rep_formula_eval(const Point& x, double t, const RepFormulaInput& in,
                               const KernelEvaluator& ev,
                               const BoundaryPatch& patch,
                               const QuadratureControl& ctl = {}) {
    in.validate();
    if (!(t > 0.0)) throw InvalidTime("rep formula requires t > 0");
    if (t > in.history_times.back() * (1.0 + 1e-12))
        throw InvalidData("t exceeds the boundary history mesh");

    const double vol = detail::tensor_volume_term(x, t, in, ev);

    const auto& nodes = in.gamma1_nodes;
    auto surface_sum = [&](double tau, double dt_back) {
        double s = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double u = in.node_value(j, tau);
            s += nodes[j].weight * ev.value(x, nodes[j].point, dt_back) *
                 std::pow(u, in.q);
        }
        return s;
    };

    // node spacing controls where the discrete surface sum stops resolving
    double spacing = 0.0;
    if (nodes.size() > 1) {
        for (std::size_t j = 1; j < nodes.size(); ++j) {
            double d2 = 0.0;
            for (int a = 0; a < ev.dim(); ++a)
                d2 += (nodes[j].point[a] - nodes[0].point[a]) *
                      (nodes[j].point[a] - nodes[0].point[a]);
            const double d = std::sqrt(d2);
            if (spacing == 0.0 || d < spacing) spacing = d;
        }
    }
    const bool singular = detail::on_patch_closure(x, patch, 1e-12);
    const double t_cut = singular ? std::min(t, spacing * spacing) : 0.0;

    QuadratureControl bctl = ctl;
    bctl.abs_tol = std::max(ctl.abs_tol, 1e-12);

    double boundary = 0.0;
    if (t_cut < t) {
        auto f = [&](double s) {
            const double back = s * s;
            if (back <= 0.0) return 0.0;
            return 2.0 * s * surface_sum(t - back, back);
        };
        boundary += integrate(f, std::sqrt(t_cut), std::sqrt(t), bctl).value;
    }
    if (t_cut > 0.0) {
        // local sliver: continuum patch mass against u^q frozen at x
        std::size_t jx = 0;
        double best = 1e300;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            double d2 = 0.0;
            for (int a = 0; a < ev.dim(); ++a)
                d2 += (x[a] - nodes[j].point[a]) * (x[a] - nodes[j].point[a]);
            if (d2 < best) {
                best = d2;
                jx = j;
            }
        }
        auto f = [&](double s) {
            const double back = s * s;
            if (back <= 0.0) return 0.0;
            const double u = in.node_value(jx, t - back);
            return 2.0 * s * ev.patch_mass(x, patch, back) * std::pow(u, in.q);
        };
        boundary += integrate(f, 0.0, std::sqrt(t_cut), bctl).value;
    }
    return vol + boundary;
}

}  // namespace lifespan
