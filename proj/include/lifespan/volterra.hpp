#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lifespan/errors.hpp"
#include "lifespan/geometry.hpp"
#include "lifespan/kernel.hpp"
#include "lifespan/solver.hpp"

namespace lifespan {

struct VolterraControl {
    double m_stop_factor = 1e4;
    double m_stop = -1.0;
    double dt_floor = 1e-12;
    int max_rejects = 200;
    long long max_steps = 200000;
    int u0_grid = 65;  // per-axis tensor quadrature for the N * u0 term
};

namespace detail {

inline const std::array<double, 2> kGL2x{{-0.5773502691896257, 0.5773502691896257}};
inline const std::array<double, 2> kGL2w{{1.0, 1.0}};
inline const std::array<double, 4> kGL4x{{-0.8611363115940526, -0.3399810435848563,
                                          0.3399810435848563, 0.8611363115940526}};
inline const std::array<double, 4> kGL4w{{0.3478548451374538, 0.6521451548625461,
                                          0.6521451548625461, 0.3478548451374538}};

/// Dense boundary-to-boundary action of N(., ., dt) restricted to the patch
/// nodes, assembled from per-axis difference/sum arrays of the wrapped
/// Gaussian (the midpoint nodes are equispaced per axis).
struct PatchKernelApply {
    const KernelEvaluator* ev = nullptr;
    BoundaryPatch patch;
    int nface = 1;  // 1 (interval) or 2 (rect)
    std::array<int, 2> m{{0, 0}};
    std::array<double, 2> delta{{0, 0}};
    std::array<double, 2> c0{{0, 0}};  // first midpoint per face axis
    double cell_weight = 0.0;

    void init(const KernelEvaluator& e, const BoundaryPatch& p, int resolution) {
        ev = &e;
        patch = p;
        if (p.shape == BoundaryPatch::Shape::Disk)
            throw InvalidData("volterra marcher supports interval/rect patches");
        nface = p.dim - 1;
        cell_weight = 1.0;
        for (int k = 0; k < nface; ++k) {
            m[k] = resolution;
            delta[k] = (p.hi[k] - p.lo[k]) / resolution;
            c0[k] = p.lo[k] + 0.5 * delta[k];
            cell_weight *= delta[k];
        }
    }

    int count() const { return nface == 1 ? m[0] : m[0] * m[1]; }

    /// out += scale * [N(dt) (w f)] at all patch nodes.
    void accumulate(double dt, double scale, const std::vector<double>& f,
                    std::vector<double>& out, std::vector<double>& scratch) const {
        const double perp = ev->axis_value(patch.normal_axis, patch.plane_offset,
                                           patch.plane_offset, dt);
        const double s = scale * perp * cell_weight;
        std::array<std::vector<double>, 2> D, S;
        for (int k = 0; k < nface; ++k) {
            const int a = patch.in_axes[k];
            D[k].resize(m[k]);
            S[k].resize(2 * m[k] - 1);
            for (int d = 0; d < m[k]; ++d)
                D[k][d] = ev->axis_wrapped(a, d * delta[k], dt);
            for (int d = 0; d < 2 * m[k] - 1; ++d)
                S[k][d] = ev->axis_wrapped(a, 2.0 * c0[k] + d * delta[k], dt);
        }
        if (nface == 1) {
            for (int i = 0; i < m[0]; ++i) {
                double acc = 0.0;
                for (int j = 0; j < m[0]; ++j)
                    acc += (D[0][std::abs(i - j)] + S[0][i + j]) * f[j];
                out[i] += s * acc;
            }
            return;
        }
        // rect: contract axis 1 then axis 0; node index is i0 * m1 + i1
        const int m0 = m[0], m1 = m[1];
        scratch.assign(static_cast<std::size_t>(m0) * m1, 0.0);
        for (int j0 = 0; j0 < m0; ++j0)
            for (int i1 = 0; i1 < m1; ++i1) {
                double acc = 0.0;
                for (int j1 = 0; j1 < m1; ++j1)
                    acc += (D[1][std::abs(i1 - j1)] + S[1][i1 + j1]) * f[j0 * m1 + j1];
                scratch[static_cast<std::size_t>(j0) * m1 + i1] = acc;
            }
        for (int i0 = 0; i0 < m0; ++i0)
            for (int i1 = 0; i1 < m1; ++i1) {
                double acc = 0.0;
                for (int j0 = 0; j0 < m0; ++j0)
                    acc += (D[0][std::abs(i0 - j0)] + S[0][i0 + j0]) *
                           scratch[static_cast<std::size_t>(j0) * m1 + i1];
                out[static_cast<std::size_t>(i0) * m1 + i1] += s * acc;
            }
    }
};

/// Tensor-quadrature volume term (N * u0)(x, t) over the box.
struct VolumeTerm {
    const KernelEvaluator* ev = nullptr;
    bool constant = false;
    double value = 0.0;
    int n = 2;
    std::array<int, 3> counts{{0, 0, 0}};
    std::array<double, 3> hz{{0, 0, 0}};
    std::vector<double> samples;  // lexicographic, axis 0 fastest
    double mass0 = 0.0;           // int u0 dx
    double max0 = 0.0;

    void init(const Problem& prob, const KernelEvaluator& e, int grid_nodes) {
        ev = &e;
        n = prob.domain.n;
        if (prob.u0_constant >= 0.0) {
            constant = true;
            value = prob.u0_constant;
            mass0 = value * prob.domain.volume();
            max0 = value;
            return;
        }
        for (int a = 0; a < n; ++a) {
            counts[a] = grid_nodes;
            hz[a] = prob.domain.extents[a] / (grid_nodes - 1);
        }
        const long long total = [&] {
            long long s = 1;
            for (int a = 0; a < n; ++a) s *= counts[a];
            return s;
        }();
        samples.resize(total);
        mass0 = 0.0;
        max0 = 0.0;
        for (long long idx = 0; idx < total; ++idx) {
            long long r = idx;
            Point p{{0, 0, 0}};
            double w = 1.0;
            for (int a = 0; a < n; ++a) {
                const int i = static_cast<int>(r % counts[a]);
                r /= counts[a];
                p[a] = i * hz[a];
                w *= (i == 0 || i == counts[a] - 1) ? 0.5 * hz[a] : hz[a];
            }
            const double v = prob.u0(p);
            if (!(v >= 0.0)) throw InvalidData("initial data must be nonnegative");
            samples[idx] = v;
            mass0 += w * v;
            max0 = std::max(max0, v);
        }
    }

    double at(const Point& x, double t) const {
        if (constant) return value * ev->domain_mass(x, t);
        // contract axis by axis
        std::vector<double> cur = samples;
        std::array<int, 3> dims = counts;
        for (int a = n - 1; a >= 0; --a) {
            std::vector<double> row(counts[a]);
            for (int i = 0; i < counts[a]; ++i) {
                const double w = (i == 0 || i == counts[a] - 1) ? 0.5 * hz[a] : hz[a];
                row[i] = w * ev->axis_value(a, x[a], i * hz[a], t);
            }
            long long outer = 1;
            for (int b = 0; b < a; ++b) outer *= dims[b];
            std::vector<double> next(outer);
            for (long long o = 0; o < outer; ++o) {
                double acc = 0.0;
                for (int i = 0; i < counts[a]; ++i) acc += row[i] * cur[o + outer * i];
                next[o] = acc;
            }
            cur.swap(next);
            dims[a] = 1;
        }
        return cur[0];
    }
};

}  // namespace detail

/// Nonlinear Volterra march of the boundary trace on Gamma_1:
///   u = (N * u0) + (N ⋆ u^q) on the patch nodes,
/// product integration with piecewise-linear u^q in tau; the weakly singular
/// last interval is integrated in s = sqrt(t - tau) against the exact patch
/// mass of the kernel; one lagged fixed-point sweep plus one correction pass
/// per step, halving dt when the correction is non-contractive.
inline SolveResult solve_volterra(const Problem& prob, const KernelEvaluator& ev,
                                  std::vector<double> mesh, int surface_resolution,
                                  const VolterraControl& ctl = {}) {
    prob.validate();
    if (!prob.domain.is_box()) throw InvalidGeometry("volterra marcher requires a box");
    if (mesh.size() < 2 || mesh.front() != 0.0)
        throw InvalidData("time mesh must start at 0 with at least two points");
    for (std::size_t i = 1; i < mesh.size(); ++i)
        if (!(mesh[i] > mesh[i - 1])) throw InvalidData("time mesh must increase");

    detail::PatchKernelApply pk;
    pk.init(ev, prob.patch, surface_resolution);
    const int nn = pk.count();

    detail::VolumeTerm vol;
    vol.init(prob, ev, ctl.u0_grid);

    SolveResult res;
    res.boundary_nodes = surface_nodes(prob.patch, surface_resolution);

    std::vector<double> node_u0(nn);
    for (int i = 0; i < nn; ++i) node_u0[i] = prob.u0(res.boundary_nodes[i].point);
    const double m0 = std::max(vol.max0, *std::max_element(node_u0.begin(), node_u0.end()));
    if (!(m0 > 0.0)) throw InvalidData("initial data must not be identically zero");
    res.m0 = m0;
    res.m_stop = ctl.m_stop > 0.0 ? ctl.m_stop : ctl.m_stop_factor * m0;

    const double q = prob.q;
    std::vector<std::vector<double>> v;  // boundary trace per accepted step
    std::vector<std::vector<double>> f;  // u^q per accepted step
    std::vector<double> times;
    times.push_back(0.0);
    v.push_back(node_u0);
    {
        std::vector<double> f0(nn);
        for (int i = 0; i < nn; ++i) f0[i] = std::pow(node_u0[i], q);
        f.push_back(std::move(f0));
    }

    double M = m0;
    double mass = vol.mass0;
    auto bmax = [&](const std::vector<double>& row) {
        return *std::max_element(row.begin(), row.end());
    };
    res.trace.push_back({0.0, 0.0, M, bmax(node_u0), mass});
    res.boundary_times.push_back(0.0);
    res.boundary_values.push_back(node_u0);

    std::vector<double> base(nn), scratch, fg(nn), v0(nn), v1(nn), A(nn), B(nn);
    int rejects = 0;
    std::size_t k = 1;
    res.termination = Termination::TimeHorizon;
    while (k < mesh.size()) {
        if (static_cast<long long>(k) > ctl.max_steps) {
            res.termination = Termination::MaxSteps;
            break;
        }
        const double tk = mesh[k];
        const double tprev = times.back();
        const double dt = tk - tprev;
        if (dt < ctl.dt_floor) throw StiffnessFailure("volterra step below dt floor");

        // volume + nonsingular history
        for (int i = 0; i < nn; ++i) base[i] = vol.at(res.boundary_nodes[i].point, tk);
        for (std::size_t l = 0; l + 1 < times.size(); ++l) {
            const double ta = times[l], tb = times[l + 1];
            const bool fine = (tk - tb) < 3.0 * (tb - ta);
            const int npt = fine ? 4 : 2;
            for (int g = 0; g < npt; ++g) {
                const double xg = npt == 4 ? detail::kGL4x[g] : detail::kGL2x[g];
                const double wg = npt == 4 ? detail::kGL4w[g] : detail::kGL2w[g];
                const double tau = 0.5 * (ta + tb) + 0.5 * (tb - ta) * xg;
                const double wl = (tb - tau) / (tb - ta);
                for (int i = 0; i < nn; ++i)
                    fg[i] = wl * f[l][i] + (1.0 - wl) * f[l + 1][i];
                pk.accumulate(tk - tau, 0.5 * (tb - ta) * wg, fg, base, scratch);
            }
        }

        // singular interval [tprev, tk] against the continuum patch mass:
        // A = int_0^dt PM, B = int_0^dt PM * (delta/dt), via s = sqrt(delta)
        {
            QuadratureControl qc;
            qc.abs_tol = 1e-12;
            qc.rel_tol = 1e-9;
            const double sdt = std::sqrt(dt);
            for (int i = 0; i < nn; ++i) {
                const Point& p = res.boundary_nodes[i].point;
                A[i] = integrate(
                           [&](double s) {
                               return s > 0 ? 2.0 * s * ev.patch_mass(p, prob.patch, s * s)
                                            : 0.0;
                           },
                           0.0, sdt, qc)
                           .value;
                B[i] = integrate(
                           [&](double s) {
                               return s > 0 ? 2.0 * s * (s * s / dt) *
                                                  ev.patch_mass(p, prob.patch, s * s)
                                            : 0.0;
                           },
                           0.0, sdt, qc)
                           .value;
            }
        }

        // lagged predictor, then one correction pass
        const auto& fp = f.back();
        for (int i = 0; i < nn; ++i) v0[i] = base[i] + fp[i] * A[i];
        double rel = 0.0;
        for (int i = 0; i < nn; ++i) {
            const double fc = std::pow(std::max(v0[i], 0.0), q);
            v1[i] = base[i] + fp[i] * B[i] + fc * (A[i] - B[i]);
            rel = std::max(rel, std::abs(v1[i] - v0[i]) /
                                    std::max({std::abs(v1[i]), std::abs(v0[i]), 1e-300}));
        }
        if (rel > 0.5) {
            if (++rejects > ctl.max_rejects)
                throw StiffnessFailure("volterra correction kept rejecting");
            const double tmid = 0.5 * (tprev + tk);
            if (tmid - tprev < ctl.dt_floor)
                throw StiffnessFailure("volterra step below dt floor");
            mesh.insert(mesh.begin() + k, tmid);
            continue;
        }

        times.push_back(tk);
        std::vector<double> fr(nn);
        for (int i = 0; i < nn; ++i) fr[i] = std::pow(std::max(v1[i], 0.0), q);
        double dm = 0.0;
        for (int i = 0; i < nn; ++i)
            dm += res.boundary_nodes[i].weight * 0.5 * (fr[i] + fp[i]);
        mass += dm * dt;
        v.push_back(v1);
        f.push_back(std::move(fr));

        const double bm = bmax(v1);
        M = std::max(M, bm);
        res.trace.push_back({tk, dt, M, bm, mass});
        res.boundary_times.push_back(tk);
        res.boundary_values.push_back(v1);
        ++k;
        if (M >= res.m_stop) {
            res.termination = Termination::BlowupThreshold;
            break;
        }
    }
    res.steps = static_cast<long long>(times.size()) - 1;
    res.final_time = times.back();
    res.min_value = 0.0;
    for (const auto& row : v)
        for (double x : row) res.min_value = std::min(res.min_value, x);

    if (res.termination == Termination::BlowupThreshold) {
        std::vector<double> ts, ms;
        for (const auto& r : res.trace) {
            ts.push_back(r.t);
            ms.push_back(r.M);
        }
        res.blowup = estimate_blowup_time(ts, ms, res.m_stop);
    }
    return res;
}

inline std::vector<double> uniform_mesh(double t_end, double dt) {
    if (!(t_end > 0.0) || !(dt > 0.0)) throw InvalidData("mesh parameters must be positive");
    std::vector<double> m;
    const int n = std::max(1, static_cast<int>(std::ceil(t_end / dt)));
    m.reserve(n + 1);
    for (int i = 0; i <= n; ++i) m.push_back(t_end * i / n);
    return m;
}

/// Boundary history of a solve packaged for the representation formula.
inline RepFormulaInput rep_input_from_result(const SolveResult& res, const Problem& prob,
                                             int u0_grid_nodes) {
    RepFormulaInput in;
    std::array<int, 3> counts{{1, 1, 1}};
    for (int a = 0; a < prob.domain.n; ++a) counts[a] = u0_grid_nodes;
    in.grid = make_grid(prob.domain, prob.patch, counts);
    in.u0.resize(in.grid.size());
    for (long long idx = 0; idx < in.grid.size(); ++idx)
        in.u0[idx] = prob.u0(in.grid.coord(in.grid.multi(idx)));
    in.q = prob.q;
    in.gamma1_nodes = res.boundary_nodes;
    in.history_times = res.boundary_times;
    in.history = res.boundary_values;
    return in;
}

}  // namespace lifespan
