#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lifespan/bounds.hpp"
#include "lifespan/csv.hpp"
#include "lifespan/errors.hpp"
#include "lifespan/fit.hpp"
#include "lifespan/solver.hpp"

namespace lifespan {

enum class SweepVariable { M0, Gamma1Area, Q };

inline std::string sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::M0: return "M0";
        case SweepVariable::Gamma1Area: return "Gamma1Area";
        case SweepVariable::Q: return "Q";
    }
    return "?";
}

/// Per-point grid and threshold policy. The patch is resolved by at least
/// `min_patch_cells` cells so that small patches measure physics rather
/// than discretization.
struct SweepPolicy {
    int nodes_per_unit = 32;
    int min_patch_cells = 8;
    double m_stop_factor = 1e4;
    double safety = 0.8;
    int output_every = 16;
    long long max_steps = 400000000;
};

struct SweepConfig {
    SweepVariable variable = SweepVariable::M0;
    std::vector<double> values;
    Domain domain;
    int patch_face = 0;
    std::vector<double> patch_lo, patch_hi;  // template span (M0 / Q sweeps)
    double patch_center = 0.5;               // Gamma1Area sweeps: centered patch
    double q = 2.0;
    double m0 = 1.0;
    SweepPolicy policy;
    BoundsConfig bounds;  // constants reused across the sweep
    unsigned threads = 0;

    void validate() const {
        if (values.size() < 4)
            throw SweepFailed("sweep needs at least 4 values");
        bool inc = true, dec = true;
        for (std::size_t i = 1; i < values.size(); ++i) {
            inc = inc && values[i] > values[i - 1];
            dec = dec && values[i] < values[i - 1];
        }
        if (!inc && !dec) throw SweepFailed("sweep values must be strictly monotone");
        for (double v : values) {
            switch (variable) {
                case SweepVariable::M0:
                    if (!(v > 0.0)) throw SweepFailed("M0 values must be positive");
                    break;
                case SweepVariable::Gamma1Area:
                    if (!(v > 0.0)) throw SweepFailed("area values must be positive");
                    break;
                case SweepVariable::Q:
                    if (!(v > 1.0)) throw SweepFailed("q values must exceed 1");
                    break;
            }
        }
    }
};

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    double t_star = std::numeric_limits<double>::quiet_NaN();
    double bracket_lo = 0.0, bracket_hi = 0.0;
    double beta = std::numeric_limits<double>::quiet_NaN();
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
    double upper = std::numeric_limits<double>::quiet_NaN();
    double lower_general = std::numeric_limits<double>::quiet_NaN();
    double y = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> lower_critical;
};

struct SweepResult {
    SweepVariable variable = SweepVariable::M0;
    std::vector<SweepRow> rows;
};

namespace detail {

struct PointSetup {
    Problem problem;
    Grid grid;
    SolveControl control;
    BoundsConfig bounds;
};

inline PointSetup sweep_point_setup(const SweepConfig& cfg, double value) {
    double q = cfg.q, m0 = cfg.m0;
    std::vector<double> lo = cfg.patch_lo, hi = cfg.patch_hi;
    if (cfg.variable == SweepVariable::M0) m0 = value;
    if (cfg.variable == SweepVariable::Q) q = value;
    if (cfg.variable == SweepVariable::Gamma1Area) {
        lo = {cfg.patch_center - 0.5 * value};
        hi = {cfg.patch_center + 0.5 * value};
    }
    PointSetup ps;
    const BoundaryPatch patch = make_patch(cfg.domain, cfg.patch_face, lo, hi);
    ps.problem = Problem::constant_data(cfg.domain, patch, q, m0);

    const double patch_extent = patch.hi[0] - patch.lo[0];
    int npu = cfg.policy.nodes_per_unit;
    const int need = static_cast<int>(std::ceil(cfg.policy.min_patch_cells / patch_extent));
    while (npu < need) npu *= 2;
    ps.grid = make_grid_uniform(cfg.domain, patch, npu);

    ps.control.m_stop_factor = cfg.policy.m_stop_factor;
    ps.control.safety = cfg.policy.safety;
    ps.control.output_every = cfg.policy.output_every;
    ps.control.max_steps = cfg.policy.max_steps;
    ps.control.boundary_every = 1 << 20;  // sweeps do not need boundary history

    ps.bounds = cfg.bounds;
    ps.bounds.q = q;
    ps.bounds.m0 = m0;
    ps.bounds.min_u0 = m0;
    ps.bounds.gamma1_area = patch.area();
    ps.bounds.omega_volume = cfg.domain.volume();
    ps.bounds.n = cfg.domain.n;
    return ps;
}

}  // namespace detail

/// One row per sweep value; per-row failures are recorded, never abort the
/// sweep. Points run in a small work pool with results collected by index.
inline SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepResult out;
    out.variable = cfg.variable;
    out.rows.assign(cfg.values.size(), SweepRow{});

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.values.size()) return;
            SweepRow& row = out.rows[i];
            row.value = cfg.values[i];
            try {
                auto ps = detail::sweep_point_setup(cfg, cfg.values[i]);
                const SolveResult sr = solve_fd(ps.problem, ps.grid, ps.control);
                if (sr.termination != Termination::BlowupThreshold)
                    throw Error("run ended before reaching the blow-up threshold");
                row.bracket_lo = sr.blowup.bracket_lo;
                row.bracket_hi = sr.blowup.bracket_hi;
                if (sr.blowup.fitted) {
                    row.t_star = sr.blowup.t_star;
                    row.beta = sr.blowup.beta;
                    row.fit_r2 = sr.blowup.fit_r2;
                } else {
                    row.t_star = sr.blowup.bracket_lo;
                }
                row.upper = upper_bound_constant_data(
                    ps.bounds.q, ps.bounds.gamma1_area, ps.bounds.omega_volume, ps.bounds.m0);
                row.lower_general = lower_bound_general(ps.bounds);
                const CriticalBound cb = lower_bound_critical(ps.bounds);
                row.y = cb.y;
                row.lower_critical = cb.bound;
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    };
    unsigned nt = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    nt = std::max(1u, std::min<unsigned>(nt, cfg.values.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < nt; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    bool any_ok = false;
    for (const auto& r : out.rows) any_ok = any_ok || r.ok;
    if (!any_ok) throw SweepFailed("all sweep rows failed");
    return out;
}

inline FitResult fit_sweep(const SweepResult& res) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : res.rows)
        if (r.ok && r.t_star > 0.0) pairs.emplace_back(r.value, r.t_star);
    return fit_power_law(pairs);
}

/// sweep.csv, fit.csv and a plain-text summary comparing fitted slopes to
/// the predicted orders.
inline void emit_report(const SweepResult& res, const FitResult& fit,
                        const std::filesystem::path& outdir) {
    if (res.rows.empty()) throw ReportError("empty sweep table");
    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);

    CsvWriter sweep(outdir / "sweep.csv",
                    {"value", "Tstar", "bracket_lo", "bracket_hi", "beta", "fit_r2",
                     "upper_bound", "lower_general", "Y", "lower_critical", "regime"});
    for (const auto& r : res.rows) {
        std::vector<std::string> cells;
        cells.push_back(format_double(r.value));
        if (!r.ok) {
            for (int i = 0; i < 9; ++i) cells.push_back("NA");
            cells.back() = "failed";
            sweep.write_row_strings(cells);
            continue;
        }
        cells.push_back(format_double(r.t_star));
        cells.push_back(format_double(r.bracket_lo));
        cells.push_back(format_double(r.bracket_hi));
        cells.push_back(format_double(r.beta));
        cells.push_back(format_double(r.fit_r2));
        cells.push_back(format_double(r.upper));
        cells.push_back(format_double(r.lower_general));
        cells.push_back(format_double(r.y));
        cells.push_back(r.lower_critical ? format_double(*r.lower_critical) : "NA");
        cells.push_back(r.lower_critical ? "critical" : "NA");
        sweep.write_row_strings(cells);
    }

    CsvWriter fits(outdir / "fit.csv", {"sweep_id", "slope", "intercept", "r2"});
    fits.write_row_strings({sweep_variable_name(res.variable), format_double(fit.slope),
                            format_double(fit.intercept), format_double(fit.r2)});

    std::ofstream summary(outdir / "summary.txt");
    if (!summary) throw ReportError("cannot open summary.txt");
    summary << "sweep variable: " << sweep_variable_name(res.variable) << "\n";
    summary << "rows: " << res.rows.size() << "\n";
    summary << "fitted slope: " << format_double(fit.slope)
            << "  (intercept " << format_double(fit.intercept) << ", R^2 "
            << format_double(fit.r2) << ")\n";
    if (res.variable == SweepVariable::M0)
        summary << "predicted slope: -(q-1) as M0 -> 0\n";
    else if (res.variable == SweepVariable::Gamma1Area)
        summary << "predicted slope: between -1 (upper-bound order) and the "
                   "log-corrected lower order\n";
    else
        summary << "predicted order: T* ~ (q-1)^{-1} as q -> 1\n";
    if (!summary) throw ReportError("summary write failed");
}

}  // namespace lifespan
