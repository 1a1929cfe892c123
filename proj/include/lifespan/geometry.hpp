#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lifespan/errors.hpp"

namespace lifespan {

using Point = std::array<double, 3>;

enum class DomainKind { Box2D, Box3D, LShape2D };

/// A face of the domain boundary: the plane it lives in plus its in-plane
/// extent. `side` is the outward normal direction along `axis`.
struct Face {
    int id = 0;
    int axis = 0;
    int side = +1;  // -1: normal points toward -axis, +1: toward +axis
    double offset = 0.0;
    std::array<int, 2> in_axes{{-1, -1}};
    std::array<double, 2> lo{{0.0, 0.0}};
    std::array<double, 2> hi{{0.0, 0.0}};

    double measure(int n) const {
        double m = hi[0] - lo[0];
        if (n == 3) m *= hi[1] - lo[1];
        return m;
    }
};

/// Axis-aligned box in 2-D/3-D, or the 2-D L-shape
/// [0,ax] x [0,th]  union  [0,th] x [0,ay].
struct Domain {
    DomainKind kind = DomainKind::Box2D;
    int n = 2;
    std::array<double, 3> extents{{1.0, 1.0, 0.0}};
    double thickness = 0.0;  // LShape2D only

    double volume() const {
        if (kind == DomainKind::LShape2D)
            return extents[0] * thickness + thickness * extents[1] - thickness * thickness;
        double v = 1.0;
        for (int a = 0; a < n; ++a) v *= extents[a];
        return v;
    }

    bool is_box() const { return kind != DomainKind::LShape2D; }

    bool contains(const Point& p) const {
        for (int a = 0; a < n; ++a)
            if (p[a] < -1e-14 || p[a] > extents[a] + 1e-14) return false;
        if (kind == DomainKind::LShape2D)
            return p[0] <= thickness + 1e-14 || p[1] <= thickness + 1e-14;
        return true;
    }

    std::vector<Face> faces() const {
        std::vector<Face> fs;
        if (is_box()) {
            int id = 0;
            for (int a = 0; a < n; ++a) {
                for (int side : {-1, +1}) {
                    Face f;
                    f.id = id++;
                    f.axis = a;
                    f.side = side;
                    f.offset = side < 0 ? 0.0 : extents[a];
                    int k = 0;
                    for (int b = 0; b < n; ++b) {
                        if (b == a) continue;
                        f.in_axes[k] = b;
                        f.lo[k] = 0.0;
                        f.hi[k] = extents[b];
                        ++k;
                    }
                    fs.push_back(f);
                }
            }
        } else {
            const double ax = extents[0], ay = extents[1], th = thickness;
            auto edge = [](int id, int axis, int side, double off, int run_axis,
                           double a, double b) {
                Face f;
                f.id = id;
                f.axis = axis;
                f.side = side;
                f.offset = off;
                f.in_axes[0] = run_axis;
                f.lo[0] = a;
                f.hi[0] = b;
                return f;
            };
            fs.push_back(edge(0, 1, -1, 0.0, 0, 0.0, ax));  // bottom
            fs.push_back(edge(1, 0, +1, ax, 1, 0.0, th));   // right
            fs.push_back(edge(2, 1, +1, th, 0, th, ax));    // inner horizontal
            fs.push_back(edge(3, 0, +1, th, 1, th, ay));    // inner vertical
            fs.push_back(edge(4, 1, +1, ay, 0, 0.0, th));   // top
            fs.push_back(edge(5, 0, -1, 0.0, 1, 0.0, ay));  // left
        }
        return fs;
    }

    double boundary_measure() const {
        double m = 0.0;
        for (const Face& f : faces()) m += f.measure(n);
        return m;
    }
};

inline Domain make_box(int n, const std::vector<double>& extents) {
    if (n != 2 && n != 3) throw InvalidGeometry("box dimension must be 2 or 3");
    if (static_cast<int>(extents.size()) != n)
        throw InvalidGeometry("extent count must match dimension");
    Domain d;
    d.kind = n == 2 ? DomainKind::Box2D : DomainKind::Box3D;
    d.n = n;
    for (int a = 0; a < n; ++a) {
        if (!(extents[a] > 0.0)) throw InvalidGeometry("extents must be strictly positive");
        d.extents[a] = extents[a];
    }
    return d;
}

inline Domain make_lshape(double arm_x, double arm_y, double thickness) {
    if (!(arm_x > 0.0) || !(arm_y > 0.0) || !(thickness > 0.0))
        throw InvalidGeometry("L-shape parameters must be positive");
    if (!(thickness < arm_x) || !(thickness < arm_y))
        throw InvalidGeometry("thickness must be smaller than each arm length");
    Domain d;
    d.kind = DomainKind::LShape2D;
    d.n = 2;
    d.extents = {arm_x, arm_y, 0.0};
    d.thickness = thickness;
    return d;
}

/// Flat axis-aligned radiating patch (Gamma_1). Lives in the plane
/// {x[normal_axis] = plane_offset}; an interval in 2-D, a rectangle or a
/// disk in 3-D. `face_id < 0` marks a free patch not attached to a domain
/// (used by the sharpness experiment).
struct BoundaryPatch {
    enum class Shape { Interval, Rect, Disk };

    Shape shape = Shape::Interval;
    int dim = 2;
    int face_id = -1;
    int normal_axis = 1;
    int side = -1;
    double plane_offset = 0.0;
    std::array<int, 2> in_axes{{0, -1}};
    std::array<double, 2> lo{{0.0, 0.0}};
    std::array<double, 2> hi{{0.0, 0.0}};
    std::array<double, 2> disk_center{{0.0, 0.0}};
    double disk_radius = 0.0;

    double area() const {
        switch (shape) {
            case Shape::Interval: return hi[0] - lo[0];
            case Shape::Rect: return (hi[0] - lo[0]) * (hi[1] - lo[1]);
            case Shape::Disk: return M_PI * disk_radius * disk_radius;
        }
        return 0.0;
    }

    /// In-plane membership for a point already on the patch plane.
    bool covers(const Point& p) const {
        if (shape == Shape::Disk) {
            const double u = p[in_axes[0]] - disk_center[0];
            const double v = p[in_axes[1]] - disk_center[1];
            return u * u + v * v <= disk_radius * disk_radius;
        }
        for (int k = 0; k < (shape == Shape::Rect ? 2 : 1); ++k) {
            const double c = p[in_axes[k]];
            if (c < lo[k] || c > hi[k]) return false;
        }
        return true;
    }
};

inline BoundaryPatch make_patch(const Domain& domain, int face_id,
                                const std::vector<double>& span_lo,
                                const std::vector<double>& span_hi) {
    const auto fs = domain.faces();
    if (face_id < 0 || face_id >= static_cast<int>(fs.size()))
        throw InvalidGeometry("no such face");
    const Face& f = fs[face_id];
    const int nin = domain.n - 1;
    if (static_cast<int>(span_lo.size()) != nin || static_cast<int>(span_hi.size()) != nin)
        throw InvalidGeometry("patch span rank must match face dimension");

    BoundaryPatch p;
    p.shape = domain.n == 2 ? BoundaryPatch::Shape::Interval : BoundaryPatch::Shape::Rect;
    p.dim = domain.n;
    p.face_id = face_id;
    p.normal_axis = f.axis;
    p.side = f.side;
    p.plane_offset = f.offset;
    p.in_axes = f.in_axes;
    for (int k = 0; k < nin; ++k) {
        if (!(span_lo[k] < span_hi[k]))
            throw InvalidGeometry("patch span must be nondegenerate");
        if (span_lo[k] < f.lo[k] - 1e-12 || span_hi[k] > f.hi[k] + 1e-12)
            throw InvalidGeometry("patch span lies outside the face");
        p.lo[k] = span_lo[k];
        p.hi[k] = span_hi[k];
    }
    return p;
}

inline BoundaryPatch make_disk_patch(const Domain& domain, int face_id,
                                     const std::array<double, 2>& center, double radius) {
    if (domain.n != 3) throw InvalidGeometry("disk patches require a 3-D box");
    const auto fs = domain.faces();
    if (face_id < 0 || face_id >= static_cast<int>(fs.size()))
        throw InvalidGeometry("no such face");
    const Face& f = fs[face_id];
    if (!(radius > 0.0)) throw InvalidGeometry("disk radius must be positive");
    for (int k = 0; k < 2; ++k)
        if (center[k] - radius < f.lo[k] - 1e-12 || center[k] + radius > f.hi[k] + 1e-12)
            throw InvalidGeometry("disk lies outside the face");
    BoundaryPatch p;
    p.shape = BoundaryPatch::Shape::Disk;
    p.dim = 3;
    p.face_id = face_id;
    p.normal_axis = f.axis;
    p.side = f.side;
    p.plane_offset = f.offset;
    p.in_axes = f.in_axes;
    p.disk_center = center;
    p.disk_radius = radius;
    return p;
}

/// Free flat patch in the hyperplane {x_n = 0}, centered at the origin:
/// the interval (-rho, rho) for n = 2, the flat disk of radius rho for n = 3.
inline BoundaryPatch make_free_ball_patch(int n, double rho) {
    if (n != 2 && n != 3) throw InvalidGeometry("free ball patch requires n in {2,3}");
    if (!(rho > 0.0)) throw InvalidGeometry("radius must be positive");
    BoundaryPatch p;
    p.dim = n;
    p.face_id = -1;
    p.normal_axis = n - 1;
    p.side = +1;
    p.plane_offset = 0.0;
    if (n == 2) {
        p.shape = BoundaryPatch::Shape::Interval;
        p.in_axes = {0, -1};
        p.lo[0] = -rho;
        p.hi[0] = rho;
    } else {
        p.shape = BoundaryPatch::Shape::Disk;
        p.in_axes = {0, 1};
        p.disk_center = {0.0, 0.0};
        p.disk_radius = rho;
    }
    return p;
}

struct SurfaceNode {
    Point point{{0.0, 0.0, 0.0}};
    double weight = 0.0;
};

/// Composite midpoint nodes on the flat patch; weights sum to the patch
/// area exactly (up to roundoff) and the rule is exact for degree <= 1.
inline std::vector<SurfaceNode> surface_nodes(const BoundaryPatch& patch, int resolution) {
    if (resolution < 2) throw InvalidGeometry("surface resolution must be >= 2");
    std::vector<SurfaceNode> nodes;
    auto base = [&patch]() {
        Point p{{0.0, 0.0, 0.0}};
        p[patch.normal_axis] = patch.plane_offset;
        return p;
    };
    if (patch.shape == BoundaryPatch::Shape::Interval) {
        const double len = patch.hi[0] - patch.lo[0];
        const double dw = len / resolution;
        for (int i = 0; i < resolution; ++i) {
            SurfaceNode sn;
            sn.point = base();
            sn.point[patch.in_axes[0]] = patch.lo[0] + (i + 0.5) * dw;
            sn.weight = dw;
            nodes.push_back(sn);
        }
    } else if (patch.shape == BoundaryPatch::Shape::Rect) {
        const double d0 = (patch.hi[0] - patch.lo[0]) / resolution;
        const double d1 = (patch.hi[1] - patch.lo[1]) / resolution;
        for (int i = 0; i < resolution; ++i) {
            for (int j = 0; j < resolution; ++j) {
                SurfaceNode sn;
                sn.point = base();
                sn.point[patch.in_axes[0]] = patch.lo[0] + (i + 0.5) * d0;
                sn.point[patch.in_axes[1]] = patch.lo[1] + (j + 0.5) * d1;
                sn.weight = d0 * d1;
                nodes.push_back(sn);
            }
        }
    } else {
        const int mr = resolution;
        const int mt = std::max(8, 4 * resolution);
        const double dr = patch.disk_radius / mr;
        const double dth = 2.0 * M_PI / mt;
        for (int i = 0; i < mr; ++i) {
            const double r = (i + 0.5) * dr;
            for (int j = 0; j < mt; ++j) {
                const double th = (j + 0.5) * dth;
                SurfaceNode sn;
                sn.point = base();
                sn.point[patch.in_axes[0]] = patch.disk_center[0] + r * std::cos(th);
                sn.point[patch.in_axes[1]] = patch.disk_center[1] + r * std::sin(th);
                sn.weight = r * dr * dth;
                nodes.push_back(sn);
            }
        }
    }
    return nodes;
}

enum class NodeClass : std::uint8_t { Inactive, Interior, Gamma1, Gamma2, Interface };

/// Tensor lattice over the domain's bounding box with node spacing
/// extent/(count-1); L-shape nodes outside the domain are inactive.
/// Boundary nodes carry the Gamma_1 / Gamma_2 / interface classification
/// induced by the patch.
struct Grid {
    Domain domain;
    BoundaryPatch patch;
    int n = 2;
    std::array<int, 3> counts{{2, 2, 1}};
    std::array<double, 3> h{{1.0, 1.0, 0.0}};
    std::vector<NodeClass> node_class;

    long long size() const {
        long long s = 1;
        for (int a = 0; a < n; ++a) s *= counts[a];
        return s;
    }

    long long lin(int i, int j, int k = 0) const {
        long long idx = i + static_cast<long long>(counts[0]) * j;
        if (n == 3) idx += static_cast<long long>(counts[0]) * counts[1] * k;
        return idx;
    }

    std::array<int, 3> multi(long long idx) const {
        std::array<int, 3> m{{0, 0, 0}};
        m[0] = static_cast<int>(idx % counts[0]);
        idx /= counts[0];
        m[1] = static_cast<int>(idx % counts[1]);
        if (n == 3) m[2] = static_cast<int>(idx / counts[1]);
        return m;
    }

    Point coord(const std::array<int, 3>& m) const {
        Point p{{0.0, 0.0, 0.0}};
        for (int a = 0; a < n; ++a) p[a] = m[a] * h[a];
        return p;
    }

    bool active(long long idx) const { return node_class[idx] != NodeClass::Inactive; }
};

namespace detail {

inline bool on_segment(double v, double lo, double hi, double tol) {
    return v >= lo - tol && v <= hi + tol;
}

}  // namespace detail

inline Grid make_grid(const Domain& domain, const BoundaryPatch& patch,
                      const std::array<int, 3>& counts) {
    Grid g;
    g.domain = domain;
    g.patch = patch;
    g.n = domain.n;
    g.counts = counts;
    for (int a = 0; a < g.n; ++a) {
        if (counts[a] < 3) throw InvalidGeometry("need at least 3 nodes per axis");
        g.h[a] = domain.extents[a] / (counts[a] - 1);
    }
    if (domain.kind == DomainKind::LShape2D) {
        const double r0 = domain.thickness / g.h[0];
        const double r1 = domain.thickness / g.h[1];
        if (std::abs(r0 - std::round(r0)) > 1e-9 || std::abs(r1 - std::round(r1)) > 1e-9)
            throw InvalidGeometry("grid spacing must align with the L-shape notch");
    }

    const long long total = g.size();
    g.node_class.assign(total, NodeClass::Interior);
    const auto faces = domain.faces();
    const double snap = 1e-9;

    for (long long idx = 0; idx < total; ++idx) {
        const auto m = g.multi(idx);
        const Point p = g.coord(m);
        if (!domain.contains(p)) {
            g.node_class[idx] = NodeClass::Inactive;
            continue;
        }
        // locate on the boundary
        bool on_boundary = false;
        for (const Face& f : faces) {
            if (std::abs(p[f.axis] - f.offset) > snap * std::max(1.0, domain.extents[f.axis]))
                continue;
            bool in_face = true;
            const int nin = g.n - 1;
            for (int k = 0; k < nin; ++k)
                in_face = in_face && detail::on_segment(p[f.in_axes[k]], f.lo[k], f.hi[k], snap);
            if (in_face) {
                on_boundary = true;
                break;
            }
        }
        if (!on_boundary) continue;

        // patch-relative classification
        NodeClass cls = NodeClass::Gamma2;
        if (patch.face_id >= 0 &&
            std::abs(p[patch.normal_axis] - patch.plane_offset) <= snap) {
            const int nin = g.n - 1;
            bool inside = true, on_rim = false;
            if (patch.shape == BoundaryPatch::Shape::Disk) {
                const double u = p[patch.in_axes[0]] - patch.disk_center[0];
                const double v = p[patch.in_axes[1]] - patch.disk_center[1];
                const double r = std::sqrt(u * u + v * v);
                inside = r <= patch.disk_radius + snap;
                on_rim = std::abs(r - patch.disk_radius) <= snap;
            } else {
                for (int k = 0; k < nin; ++k) {
                    const double c = p[patch.in_axes[k]];
                    if (c < patch.lo[k] - snap || c > patch.hi[k] + snap) inside = false;
                    if (std::abs(c - patch.lo[k]) <= snap || std::abs(c - patch.hi[k]) <= snap)
                        on_rim = true;
                }
            }
            if (inside) cls = on_rim ? NodeClass::Interface : NodeClass::Gamma1;
        }
        g.node_class[idx] = cls;
    }
    return g;
}

inline Grid make_grid_uniform(const Domain& domain, const BoundaryPatch& patch,
                              int nodes_per_unit) {
    std::array<int, 3> counts{{1, 1, 1}};
    for (int a = 0; a < domain.n; ++a) {
        counts[a] = static_cast<int>(std::round(domain.extents[a] * nodes_per_unit)) + 1;
        if (counts[a] < 3) counts[a] = 3;
    }
    return make_grid(domain, patch, counts);
}

}  // namespace lifespan
