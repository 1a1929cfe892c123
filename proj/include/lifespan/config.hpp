#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lifespan/bounds.hpp"
#include "lifespan/errors.hpp"
#include "lifespan/geometry.hpp"
#include "lifespan/solver.hpp"
#include "lifespan/sweep.hpp"

namespace lifespan {

namespace detail {

using json = nlohmann::json;

inline void require_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("bad value for '" + key + "'");
    }
}

template <class T>
T get_req(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError("bad value for '" + key + "' in " + where);
    }
}

}  // namespace detail

struct SolverSettings {
    std::string method = "fd";  // fd | volterra | both
    int nodes_per_unit = 32;
    int min_patch_cells = 8;
    double safety = 0.8;
    double m_stop_factor = 1e4;
    long long max_steps = 400000000;
    double dt_floor = 1e-14;
    int output_every = 16;
    int boundary_every = 4;
    double volterra_dt = 2e-3;
    double volterra_t_end = 0.0;  // 0: derived from the analytic upper bound
    int volterra_u0_grid = 65;
};

struct AppConfig {
    std::optional<Domain> domain;
    std::optional<BoundaryPatch> patch;
    double q = 2.0;
    double u0 = 1.0;
    SolverSettings solver;
    double c_general = 1.0;
    double c_star = 1.0;
    double y0 = -1.0;
    double c_critical = -1.0;
    bool calibrate = false;
    // sweep section
    std::optional<SweepVariable> sweep_variable;
    std::vector<double> sweep_values;
    double sweep_patch_center = 0.5;
    int threads = 0;

    BoundsConfig bounds_config() const {
        BoundsConfig b;
        b.q = q;
        b.m0 = u0;
        b.min_u0 = u0;
        if (domain) {
            b.n = domain->n;
            b.omega_volume = domain->volume();
        }
        if (patch) b.gamma1_area = patch->area();
        b.c_general = c_general;
        b.c_star = c_star;
        b.y0 = y0;
        b.c_critical = c_critical;
        return b;
    }
};

namespace detail {

inline int face_id_from_name(const Domain& d, const json& v) {
    if (v.is_number_integer()) return v.get<int>();
    const std::string s = v.get<std::string>();
    if (d.is_box()) {
        static const std::vector<std::string> names{"xlo", "xhi", "ylo", "yhi", "zlo", "zhi"};
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == s) return static_cast<int>(i);
    } else {
        static const std::vector<std::string> names{"bottom", "right", "inner-h",
                                                    "inner-v", "top", "left"};
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == s) return static_cast<int>(i);
    }
    throw ConfigError("unknown face name '" + s + "'");
}

}  // namespace detail

inline AppConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    detail::json root;
    try {
        in >> root;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    detail::require_keys(root, "config",
                         {"domain", "patch", "problem", "solver", "bounds", "sweep"});
    AppConfig cfg;

    if (root.contains("domain")) {
        const auto& d = root["domain"];
        detail::require_keys(d, "domain", {"kind", "extents", "arms", "thickness"});
        const std::string kind = detail::get_req<std::string>(d, "kind", "domain");
        try {
            if (kind == "box2d" || kind == "box3d") {
                const auto ext = detail::get_req<std::vector<double>>(d, "extents", "domain");
                cfg.domain = make_box(kind == "box2d" ? 2 : 3, ext);
            } else if (kind == "lshape") {
                const auto arms = detail::get_req<std::vector<double>>(d, "arms", "domain");
                if (arms.size() != 2) throw ConfigError("lshape arms must have 2 entries");
                cfg.domain = make_lshape(arms[0], arms[1],
                                         detail::get_req<double>(d, "thickness", "domain"));
            } else {
                throw ConfigError("domain kind must be box2d, box3d or lshape");
            }
        } catch (const InvalidGeometry& e) {
            throw ConfigError(std::string("domain: ") + e.what());
        }
    }

    if (root.contains("patch")) {
        if (!cfg.domain) throw ConfigError("patch requires a domain");
        const auto& p = root["patch"];
        detail::require_keys(p, "patch", {"face", "span", "disk"});
        const int face = detail::face_id_from_name(*cfg.domain, p.at("face"));
        try {
            if (p.contains("disk")) {
                const auto& dk = p["disk"];
                detail::require_keys(dk, "patch.disk", {"center", "radius"});
                const auto c = detail::get_req<std::vector<double>>(dk, "center", "patch.disk");
                if (c.size() != 2) throw ConfigError("disk center must have 2 entries");
                cfg.patch = make_disk_patch(*cfg.domain, face, {c[0], c[1]},
                                            detail::get_req<double>(dk, "radius", "patch.disk"));
            } else {
                const auto span =
                    detail::get_req<std::vector<std::vector<double>>>(p, "span", "patch");
                std::vector<double> lo, hi;
                for (const auto& s : span) {
                    if (s.size() != 2) throw ConfigError("span entries must be [lo, hi]");
                    lo.push_back(s[0]);
                    hi.push_back(s[1]);
                }
                cfg.patch = make_patch(*cfg.domain, face, lo, hi);
            }
        } catch (const InvalidGeometry& e) {
            throw ConfigError(std::string("patch: ") + e.what());
        }
    }

    if (root.contains("problem")) {
        const auto& p = root["problem"];
        detail::require_keys(p, "problem", {"q", "u0"});
        cfg.q = detail::get_or<double>(p, "q", cfg.q);
        cfg.u0 = detail::get_or<double>(p, "u0", cfg.u0);
        if (!(cfg.q > 1.0)) throw ConfigError("problem.q must exceed 1");
        if (!(cfg.u0 > 0.0)) throw ConfigError("problem.u0 must be positive");
    }

    if (root.contains("solver")) {
        const auto& s = root["solver"];
        detail::require_keys(s, "solver",
                             {"method", "nodes_per_unit", "min_patch_cells", "safety",
                              "m_stop_factor", "max_steps", "dt_floor", "output_every",
                              "boundary_every", "volterra_dt", "volterra_t_end",
                              "volterra_u0_grid"});
        auto& v = cfg.solver;
        v.method = detail::get_or<std::string>(s, "method", v.method);
        if (v.method != "fd" && v.method != "volterra" && v.method != "both")
            throw ConfigError("solver.method must be fd, volterra or both");
        v.nodes_per_unit = detail::get_or<int>(s, "nodes_per_unit", v.nodes_per_unit);
        v.min_patch_cells = detail::get_or<int>(s, "min_patch_cells", v.min_patch_cells);
        v.safety = detail::get_or<double>(s, "safety", v.safety);
        v.m_stop_factor = detail::get_or<double>(s, "m_stop_factor", v.m_stop_factor);
        v.max_steps = detail::get_or<long long>(s, "max_steps", v.max_steps);
        v.dt_floor = detail::get_or<double>(s, "dt_floor", v.dt_floor);
        v.output_every = detail::get_or<int>(s, "output_every", v.output_every);
        v.boundary_every = detail::get_or<int>(s, "boundary_every", v.boundary_every);
        v.volterra_dt = detail::get_or<double>(s, "volterra_dt", v.volterra_dt);
        v.volterra_t_end = detail::get_or<double>(s, "volterra_t_end", v.volterra_t_end);
        v.volterra_u0_grid = detail::get_or<int>(s, "volterra_u0_grid", v.volterra_u0_grid);
    }

    if (root.contains("bounds")) {
        const auto& b = root["bounds"];
        detail::require_keys(b, "bounds",
                             {"c_general", "c_star", "y0", "c_critical", "calibrate"});
        cfg.c_general = detail::get_or<double>(b, "c_general", cfg.c_general);
        cfg.c_star = detail::get_or<double>(b, "c_star", cfg.c_star);
        cfg.y0 = detail::get_or<double>(b, "y0", cfg.y0);
        cfg.c_critical = detail::get_or<double>(b, "c_critical", cfg.c_critical);
        cfg.calibrate = detail::get_or<bool>(b, "calibrate", cfg.calibrate);
    }

    if (root.contains("sweep")) {
        const auto& s = root["sweep"];
        detail::require_keys(s, "sweep", {"variable", "values", "patch_center", "threads"});
        const std::string var = detail::get_req<std::string>(s, "variable", "sweep");
        if (var == "M0")
            cfg.sweep_variable = SweepVariable::M0;
        else if (var == "Gamma1Area")
            cfg.sweep_variable = SweepVariable::Gamma1Area;
        else if (var == "Q")
            cfg.sweep_variable = SweepVariable::Q;
        else
            throw ConfigError("sweep.variable must be M0, Gamma1Area or Q");
        cfg.sweep_values = detail::get_req<std::vector<double>>(s, "values", "sweep");
        cfg.sweep_patch_center = detail::get_or<double>(s, "patch_center", 0.5);
        cfg.threads = detail::get_or<int>(s, "threads", 0);
    }
    return cfg;
}

}  // namespace lifespan
