#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "lifespan/errors.hpp"
#include "lifespan/geometry.hpp"

namespace lifespan {

/// One instance of the radiating-boundary heat problem.
struct Problem {
    Domain domain;
    BoundaryPatch patch;
    double q = 2.0;
    std::function<double(const Point&)> u0;
    double u0_constant = -1.0;  // >= 0 marks spatially constant data

    static Problem constant_data(const Domain& d, const BoundaryPatch& p, double q,
                                 double value) {
        Problem pr;
        pr.domain = d;
        pr.patch = p;
        pr.q = q;
        pr.u0 = [value](const Point&) { return value; };
        pr.u0_constant = value;
        return pr;
    }

    void validate() const {
        if (!(q > 1.0)) throw InvalidData("q must exceed 1");
        if (!u0) throw InvalidData("initial data missing");
    }
};

struct SolveControl {
    double m_stop_factor = 1e4;  // M_stop = factor * M0 unless m_stop set
    double m_stop = -1.0;
    double safety = 0.8;
    long long max_steps = 400000000;
    double dt_floor = 1e-14;
    int output_every = 16;
    int boundary_every = 4;
    double t_max = std::numeric_limits<double>::infinity();
    bool pure_neumann = false;  // validation mode: zero flux everywhere

    void validate() const {
        if (!(safety > 0.0 && safety < 1.0))
            throw InvalidData("safety factor must lie in (0,1)");
        if (output_every < 1 || boundary_every < 1)
            throw InvalidData("output cadences must be positive");
    }
};

enum class Termination { BlowupThreshold, MaxSteps, TimeHorizon };

struct BlowupEstimate {
    bool fitted = false;
    double t_star = std::numeric_limits<double>::quiet_NaN();
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double beta = std::numeric_limits<double>::quiet_NaN();
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
    double stderr_t_star = std::numeric_limits<double>::quiet_NaN();
};

struct TraceRow {
    double t = 0.0, dt = 0.0, M = 0.0, boundary_max = 0.0, mass = 0.0;
};

struct SolveResult {
    std::vector<TraceRow> trace;
    // boundary history at the patch surface-quadrature nodes
    std::vector<SurfaceNode> boundary_nodes;
    std::vector<double> boundary_times;
    std::vector<std::vector<double>> boundary_values;

    double m0 = 0.0;
    double m_stop = 0.0;
    BlowupEstimate blowup;
    Termination termination = Termination::TimeHorizon;
    long long steps = 0;
    double final_time = 0.0;
    double min_value = 0.0;
    std::vector<double> final_state;  // by lattice index; NaN outside the domain

    /// running max M(t), interpolated from the trace
    double M_at(double t) const {
        if (trace.empty()) return 0.0;
        if (t <= trace.front().t) return trace.front().M;
        if (t >= trace.back().t) return trace.back().M;
        std::size_t lo = 0, hi = trace.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (trace[mid].t <= t ? lo : hi) = mid;
        }
        const double w = (t - trace[lo].t) / (trace[hi].t - trace[lo].t);
        return (1.0 - w) * trace[lo].M + w * trace[hi].M;
    }
};

/// Tail fit M(t) ~ c (T* - t)^{-beta} over the samples with M >= m_stop/100.
/// Bracket lower end is the last computed time; the upper end adds the fit
/// standard error. A failed fit returns the bracket only (UnfittedTail).
inline BlowupEstimate estimate_blowup_time(const std::vector<double>& ts,
                                           const std::vector<double>& Ms,
                                           double m_stop) {
    BlowupEstimate est;
    if (ts.size() != Ms.size() || ts.empty())
        throw InvalidData("blow-up fit needs a nonempty trace");
    const double gate = m_stop / 100.0;
    std::vector<double> t, lm;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (Ms[i] >= gate && Ms[i] > 0.0) {
            if (!t.empty() && !(ts[i] > t.back())) continue;
            t.push_back(ts[i]);
            lm.push_back(std::log(Ms[i]));
        }
    }
    const double t_last = ts.back();
    est.bracket_lo = t_last;
    if (t.size() < 6) {
        est.bracket_hi = t_last + 2.0 * (t.empty() ? t_last : t_last - t.front());
        return est;
    }
    const double span = t.back() - t.front();
    const std::size_t m = t.size();

    auto ss_of = [&](double T) {
        // linear fit lm = a - beta * ln(T - t)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double z = std::log(T - t[i]);
            sx += z;
            sy += lm[i];
            sxx += z * z;
            sxy += z * lm[i];
        }
        const double denom = m * sxx - sx * sx;
        const double slope = (m * sxy - sx * sy) / denom;
        const double icept = (sy - slope * sx) / m;
        double ss = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = lm[i] - (icept + slope * std::log(T - t[i]));
            ss += r * r;
        }
        return ss;
    };

    const double lo0 = t_last + std::max(1e-14, 1e-12 * std::abs(t_last));
    const double hi0 = t_last + std::max(10.0 * span, 1e-9);
    double a = lo0, b = hi0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = ss_of(c), fd = ss_of(d);
    for (int it = 0; it < 200; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = ss_of(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = ss_of(d);
        }
        if (b - a < 1e-14 * std::max(1.0, std::abs(t_last))) break;
    }
    const double T = 0.5 * (a + b);
    const bool edge = (hi0 - T) < 1e-6 * (hi0 - lo0);

    // final linear fit at T
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double z = std::log(T - t[i]);
        sx += z;
        sy += lm[i];
        sxx += z * z;
        sxy += z * lm[i];
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    const double beta = -slope;
    double ss = ss_of(T), tss = 0;
    const double mean = sy / m;
    for (double v : lm) tss += (v - mean) * (v - mean);
    const double r2 = tss > 0 ? std::clamp(1.0 - ss / tss, 0.0, 1.0) : 1.0;

    // curvature-based standard error of T*
    const double h = std::max(1e-7 * (T - t_last), 1e-13);
    const double ss2 = ss_of(T + h) + ss_of(T - h) - 2.0 * ss;
    double se = 0.0;
    bool curved = ss2 > 0.0;
    if (curved) {
        const double sigma2 = ss / std::max<double>(1, m - 2);
        se = std::sqrt(std::max(0.0, 2.0 * sigma2 / (ss2 / (h * h))));
    }

    if (edge || !(beta > 0.0) || !curved) {
        est.bracket_hi = t_last + 2.0 * span;
        return est;
    }
    est.fitted = true;
    est.t_star = T;
    est.beta = beta;
    est.fit_r2 = r2;
    est.stderr_t_star = se;
    est.bracket_hi = T + se;
    return est;
}

namespace detail {

struct FDLattice {
    int n = 2;
    std::array<double, 3> h{{0, 0, 0}};
    std::vector<long long> compact_of;           // lattice -> compact (-1 inactive)
    std::vector<std::array<int, 6>> nb;          // compact: lo/hi per axis (-1 missing)
    std::vector<std::array<float, 3>> flux_fm;   // per axis flux multiplier
    std::vector<double> mass_w;
    std::vector<long long> radiating;            // compact ids with any fm > 0
    std::vector<long long> gamma1_all;           // Gamma1 + interface compact ids
    long long size = 0;
};

inline FDLattice build_lattice(const Grid& g) {
    FDLattice lat;
    lat.n = g.n;
    lat.h = g.h;
    const long long total = g.size();
    lat.compact_of.assign(total, -1);
    long long np = 0;
    for (long long idx = 0; idx < total; ++idx)
        if (g.active(idx)) lat.compact_of[idx] = np++;
    lat.size = np;
    lat.nb.assign(np, {{-1, -1, -1, -1, -1, -1}});
    lat.flux_fm.assign(np, {{0.f, 0.f, 0.f}});
    lat.mass_w.assign(np, 0.0);

    const double cellw = [&] {
        double w = 1.0;
        for (int a = 0; a < g.n; ++a) w *= g.h[a];
        return w / (1 << g.n);
    }();

    for (long long idx = 0; idx < total; ++idx) {
        const long long ci = lat.compact_of[idx];
        if (ci < 0) continue;
        const auto m = g.multi(idx);
        for (int a = 0; a < g.n; ++a) {
            auto mm = m;
            if (m[a] > 0) {
                mm[a] = m[a] - 1;
                lat.nb[ci][2 * a] = static_cast<int>(lat.compact_of[g.lin(mm[0], mm[1], mm[2])]);
            }
            mm = m;
            if (m[a] < g.counts[a] - 1) {
                mm[a] = m[a] + 1;
                lat.nb[ci][2 * a + 1] =
                    static_cast<int>(lat.compact_of[g.lin(mm[0], mm[1], mm[2])]);
            }
        }
        const NodeClass cls = g.node_class[idx];
        if (cls == NodeClass::Gamma1 || cls == NodeClass::Interface) {
            const double fm = cls == NodeClass::Gamma1 ? 1.0 : 0.5;
            lat.flux_fm[ci][g.patch.normal_axis] = static_cast<float>(fm);
            lat.radiating.push_back(ci);
            lat.gamma1_all.push_back(ci);
        }
        // node mass = measure of adjacent active cells / 2^n
        int cells = 0;
        const int lo0 = m[0] > 0 ? -1 : 0, hi0 = m[0] < g.counts[0] - 1 ? 0 : -1;
        const int lo1 = m[1] > 0 ? -1 : 0, hi1 = m[1] < g.counts[1] - 1 ? 0 : -1;
        const int lo2 = g.n == 3 ? (m[2] > 0 ? -1 : 0) : 0;
        const int hi2 = g.n == 3 ? (m[2] < g.counts[2] - 1 ? 0 : -1) : 0;
        for (int da = lo0; da <= hi0; ++da)
            for (int db = lo1; db <= hi1; ++db)
                for (int dc = lo2; dc <= hi2; ++dc) {
                    // cell with lower corner (m0+da, m1+db, m2+dc): active iff all
                    // of its corner nodes are active
                    bool act = true;
                    for (int s0 = 0; s0 <= 1 && act; ++s0)
                        for (int s1 = 0; s1 <= 1 && act; ++s1)
                            for (int s2 = 0; s2 <= (g.n == 3 ? 1 : 0) && act; ++s2) {
                                const int i0 = m[0] + da + s0, i1 = m[1] + db + s1,
                                          i2 = g.n == 3 ? m[2] + dc + s2 : 0;
                                act = lat.compact_of[g.lin(i0, i1, i2)] >= 0;
                            }
                    if (act) ++cells;
                }
        lat.mass_w[ci] = cells * cellw;
    }
    return lat;
}

}  // namespace detail

/// Explicit five/seven-point time-stepper for the radiating-boundary heat
/// problem. Ghost nodes give second-order flux on Gamma_1 (u^q), Gamma_2 (0)
/// and the interface (u^q / 2); dt obeys both the diffusive limit and the
/// nonlinear boundary Lipschitz limit.
inline SolveResult solve_fd(const Problem& prob, const Grid& grid,
                            const SolveControl& ctl = {}) {
    prob.validate();
    ctl.validate();
    const int n = grid.n;
    const double q = prob.q;
    auto lat = detail::build_lattice(grid);
    if (lat.gamma1_all.size() < 4 && !ctl.pure_neumann)
        throw InvalidGeometry("grid must resolve the patch by at least 4 nodes");

    // initial data
    std::vector<double> u(lat.size), unew(lat.size);
    {
        const long long total = grid.size();
        for (long long idx = 0; idx < total; ++idx) {
            const long long ci = lat.compact_of[idx];
            if (ci < 0) continue;
            const double v = prob.u0(grid.coord(grid.multi(idx)));
            if (!(v >= 0.0)) throw InvalidData("initial data must be nonnegative");
            u[ci] = v;
        }
    }
    double m0 = *std::max_element(u.begin(), u.end());
    const bool validation = ctl.pure_neumann || std::isfinite(ctl.t_max);
    if (!(m0 > 0.0) && !validation)
        throw InvalidData("initial data must not be identically zero");

    SolveResult res;
    res.m0 = m0;
    res.m_stop = ctl.m_stop > 0.0 ? ctl.m_stop : ctl.m_stop_factor * std::max(m0, 1e-300);
    if (!(res.m_stop > 10.0 * m0) && !validation)
        throw InvalidData("M_stop must exceed 10 * M0");

    // boundary surface nodes (cell midpoints along the patch)
    int cells_across = 0;
    {
        const double hface = grid.h[grid.patch.in_axes[0]];
        cells_across = std::max(
            2, static_cast<int>(std::round((grid.patch.hi[0] - grid.patch.lo[0]) / hface)));
    }
    if (grid.patch.face_id >= 0)
        res.boundary_nodes = surface_nodes(grid.patch, cells_across);

    // map each surface node to the two (2-D) or four (3-D) bracketing grid
    // nodes on the patch face for interpolation of the recorded trace
    std::vector<std::vector<std::pair<long long, double>>> interp(res.boundary_nodes.size());
    for (std::size_t s = 0; s < res.boundary_nodes.size(); ++s) {
        const Point& p = res.boundary_nodes[s].point;
        std::array<int, 3> base{{0, 0, 0}};
        std::array<double, 3> frac{{0, 0, 0}};
        for (int a = 0; a < n; ++a) {
            const double r = p[a] / grid.h[a];
            int i0 = static_cast<int>(std::floor(r + 1e-12));
            i0 = std::clamp(i0, 0, grid.counts[a] - 1);
            base[a] = i0;
            frac[a] = std::clamp(r - i0, 0.0, 1.0);
        }
        for (int s0 = 0; s0 <= (frac[0] > 1e-12 ? 1 : 0); ++s0)
            for (int s1 = 0; s1 <= (frac[1] > 1e-12 ? 1 : 0); ++s1)
                for (int s2 = 0; s2 <= (n == 3 && frac[2] > 1e-12 ? 1 : 0); ++s2) {
                    const double w = (s0 ? frac[0] : (frac[0] > 1e-12 ? 1 - frac[0] : 1.0)) *
                                     (s1 ? frac[1] : (frac[1] > 1e-12 ? 1 - frac[1] : 1.0)) *
                                     ((n == 3 && frac[2] > 1e-12)
                                          ? (s2 ? frac[2] : 1 - frac[2])
                                          : 1.0);
                    const long long ci = lat.compact_of[grid.lin(
                        std::min(base[0] + s0, grid.counts[0] - 1),
                        std::min(base[1] + s1, grid.counts[1] - 1),
                        n == 3 ? std::min(base[2] + s2, grid.counts[2] - 1) : 0)];
                    if (ci >= 0 && w > 0) interp[s].emplace_back(ci, w);
                }
    }
    auto record_boundary = [&](double t) {
        std::vector<double> row(res.boundary_nodes.size());
        for (std::size_t s = 0; s < row.size(); ++s) {
            double v = 0;
            for (const auto& [ci, w] : interp[s]) v += w * u[ci];
            row[s] = v;
        }
        res.boundary_times.push_back(t);
        res.boundary_values.push_back(std::move(row));
    };

    const double hmin = *std::min_element(lat.h.begin(), lat.h.begin() + n);
    std::array<double, 3> inv_h2{{0, 0, 0}};
    for (int a = 0; a < n; ++a) inv_h2[a] = 1.0 / (lat.h[a] * lat.h[a]);

    double t = 0.0;
    double M = m0;
    double minv = 0.0;
    auto mass_of = [&] {
        double s = 0;
        for (long long i = 0; i < lat.size; ++i) s += lat.mass_w[i] * u[i];
        return s;
    };
    auto bmax_of = [&] {
        double s = 0;
        for (long long ci : lat.gamma1_all) s = std::max(s, u[ci]);
        return s;
    };
    res.trace.push_back({0.0, 0.0, M, bmax_of(), mass_of()});
    record_boundary(0.0);

    const double diff_dt = hmin * hmin / (2.0 * n);
    long long step = 0;
    while (true) {
        if (M >= res.m_stop) {
            res.termination = Termination::BlowupThreshold;
            break;
        }
        if (t >= ctl.t_max) {
            res.termination = Termination::TimeHorizon;
            break;
        }
        if (step >= ctl.max_steps) {
            res.termination = Termination::MaxSteps;
            break;
        }
        double dt = ctl.safety * diff_dt;
        if (!ctl.pure_neumann) {
            const double mq = std::pow(M, q - 1.0);
            dt = std::min(dt, ctl.safety * hmin / (2.0 * q * mq));
        }
        if (t + dt > ctl.t_max) dt = ctl.t_max - t;
        if (dt < ctl.dt_floor)
            throw StiffnessFailure("time step fell below the floor");

        double newM = M, newmin = 0.0;
        for (long long i = 0; i < lat.size; ++i) {
            const double ui = u[i];
            double lap = 0.0;
            double pw = -1.0;
            for (int a = 0; a < n; ++a) {
                const int lo = lat.nb[i][2 * a], hi = lat.nb[i][2 * a + 1];
                double vlo, vhi;
                if (lo >= 0 && hi >= 0) {
                    vlo = u[lo];
                    vhi = u[hi];
                } else {
                    double g = 0.0;
                    const double fm = ctl.pure_neumann ? 0.0 : lat.flux_fm[i][a];
                    if (fm > 0.0) {
                        if (pw < 0.0) pw = std::pow(ui, q);
                        g = fm * pw;
                    }
                    if (lo < 0) {
                        vhi = u[hi];
                        vlo = vhi + 2.0 * lat.h[a] * g;
                    } else {
                        vlo = u[lo];
                        vhi = vlo + 2.0 * lat.h[a] * g;
                    }
                }
                lap += inv_h2[a] * (vlo + vhi - 2.0 * ui);
            }
            const double v = ui + dt * lap;
            unew[i] = v;
            if (v > newM) newM = v;
            if (v < newmin) newmin = v;
        }
        u.swap(unew);
        t += dt;
        ++step;
        M = newM;
        minv = std::min(minv, newmin);
        if (!std::isfinite(M))
            throw NumericalBlowupArtifact("non-finite state during time stepping");

        if (step % ctl.output_every == 0 || M >= res.m_stop || t >= ctl.t_max)
            res.trace.push_back({t, dt, M, bmax_of(), mass_of()});
        if (step % ctl.boundary_every == 0) record_boundary(t);
    }
    if (res.trace.back().t < t) res.trace.push_back({t, 0.0, M, bmax_of(), mass_of()});
    if (res.boundary_times.back() < t) record_boundary(t);
    res.steps = step;
    res.final_time = t;
    res.min_value = minv;
    res.final_state.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    for (long long idx = 0; idx < grid.size(); ++idx)
        if (lat.compact_of[idx] >= 0) res.final_state[idx] = u[lat.compact_of[idx]];

    if (res.termination == Termination::BlowupThreshold) {
        std::vector<double> ts, ms;
        ts.reserve(res.trace.size());
        for (const auto& r : res.trace) {
            ts.push_back(r.t);
            ms.push_back(r.M);
        }
        res.blowup = estimate_blowup_time(ts, ms, res.m_stop);
    }
    return res;
}

struct GrowthRateRow {
    double T = 0, t = 0, lhs = 0, rhs = 0, ratio = 0;
};

struct GrowthRateResult {
    std::vector<GrowthRateRow> rows;
    double c_sup = 0.0;
};

namespace detail {

template <class RhsFn>
GrowthRateResult growth_rate_scan(const SolveResult& res, double q, const RhsFn& rhs) {
    GrowthRateResult out;
    const double t_last = res.trace.back().t;
    for (int i = 0; i < 12; ++i) {
        const double T = t_last * i / 12.0;
        const double tmax = std::min(1.0, t_last - T);
        if (tmax <= 0) continue;
        for (int j = 0; j < 8; ++j) {
            const double t = tmax * std::pow(10.0, -3.0 * (7 - j) / 7.0);
            const double Mt = res.M_at(T + t);
            const double lhs = (Mt - res.M_at(T)) / std::pow(Mt, q);
            GrowthRateRow row{T, t, lhs, rhs(t), 0.0};
            row.ratio = row.lhs / row.rhs;
            out.rows.push_back(row);
            out.c_sup = std::max(out.c_sup, row.ratio);
        }
    }
    return out;
}

}  // namespace detail

/// Empirical constant of (M(T+t) - M(T)) / M^q(T+t) <= C |Gamma_1|^alpha
/// t^{[1-(n-1)alpha]/2} over samples drawn from the trace.
inline GrowthRateResult growth_rate_check(const SolveResult& res, double gamma1_area,
                                          int n, double q, double alpha) {
    if (alpha < 0.0 || alpha > 1.0 / (n - 1))
        throw InvalidData("alpha outside [0, 1/(n-1)]");
    const double ga = std::pow(gamma1_area, alpha);
    const double ex = 0.5 * (1.0 - (n - 1) * alpha);
    return detail::growth_rate_scan(
        res, q, [ga, ex](double t) { return ga * std::pow(t, ex); });
}

/// Critical form: the right-hand side is |Gamma_1|^{1/(n-1)} (n >= 3) or
/// |Gamma_1| ln(1 + 1/|Gamma_1|) (n = 2), independent of t.
inline GrowthRateResult growth_rate_check_critical(const SolveResult& res,
                                                   double gamma1_area, int n, double q) {
    const double rhs = n >= 3 ? std::pow(gamma1_area, 1.0 / (n - 1))
                              : gamma1_area * std::log1p(1.0 / gamma1_area);
    return detail::growth_rate_scan(res, q, [rhs](double) { return rhs; });
}

}  // namespace lifespan
