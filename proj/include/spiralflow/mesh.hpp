#pragma once

// Graded polar triangulation of the annulus between a star-shaped body and a
// far-field circle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace spiralflow {

enum class BodyKind { Circle, PerturbedCircle };

/// r(theta) = a + b cos(k theta). Circle is b = 0.
struct BodyCurve {
    BodyKind kind = BodyKind::Circle;
    double a = 1;
    double b = 0;
    int k = 0;

    static BodyCurve circle(double radius) { return validated({BodyKind::Circle, radius, 0, 0}); }

    static BodyCurve perturbed(double a, double b, int k) {
        return validated({BodyKind::PerturbedCircle, a, b, k});
    }

    double radius(double theta) const { return a + b * std::cos(k * theta); }
    Vec2 point(double theta) const {
        double r = radius(theta);
        return Vec2(r * std::cos(theta), r * std::sin(theta));
    }
    double min_radius() const { return a - std::abs(b); }
    double max_radius() const { return a + std::abs(b); }
    double scale() const { return max_radius(); }

private:
    static BodyCurve validated(BodyCurve c) {
        if (c.kind == BodyKind::Circle) {
            if (!(c.a >= 1)) throw DomainError("BodyCurve: circle radius must be >= 1");
            return c;
        }
        if (c.k < 1) throw DomainError("BodyCurve: wavenumber k must be >= 1");
        if (!(c.a >= 1)) throw DomainError("BodyCurve: base radius a must be >= 1");
        if (!(c.a - std::abs(c.b) > 1) && c.b != 0)
            throw DomainError("BodyCurve: a - |b| must exceed 1 so the body contains the unit disk");
        return c;
    }
};

enum class BoundaryTag { Body, FarField };

struct BoundaryEdge {
    int a;
    int b;
    BoundaryTag tag;
    int triangle; ///< the triangle owning this edge
};

enum class NodeTag { Interior, Body, FarField };

struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<NodeTag> node_tags;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    BodyCurve curve;
    double h = 0;
    double R_out = 0;
    int n_theta = 0;
    int n_radial = 0;

    double signed_area(std::size_t t) const {
        const auto& tri = triangles[t];
        Vec2 e1 = nodes[tri[1]] - nodes[tri[0]];
        Vec2 e2 = nodes[tri[2]] - nodes[tri[0]];
        return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    }

    Vec2 centroid(std::size_t t) const {
        const auto& tri = triangles[t];
        return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
    }
};

namespace detail {

inline std::array<double, 3> triangle_angles(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    auto angle = [](const Vec2& at, const Vec2& u, const Vec2& v) {
        Vec2 a = u - at, b = v - at;
        double c = a.x() * b.y() - a.y() * b.x();
        return std::atan2(std::abs(c), a.dot(b));
    };
    return {angle(p0, p1, p2), angle(p1, p2, p0), angle(p2, p0, p1)};
}

inline double min_angle_deg(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    auto a = triangle_angles(p0, p1, p2);
    return *std::min_element(a.begin(), a.end()) * 180 / std::numbers::pi;
}

} // namespace detail

struct MeshQuality {
    double min_angle_deg;
    double max_angle_deg;
    double max_aspect;  ///< longest edge over shortest altitude
    long vertices;
    long edges;
    long faces;
    long body_edges;
    long far_field_edges;

    long euler_characteristic() const { return vertices - edges + faces; }
};

inline MeshQuality mesh_quality_report(const Mesh& mesh) {
    MeshQuality q{180, 0, 0, long(mesh.nodes.size()), 0, long(mesh.triangles.size()), 0, 0};
    std::vector<std::pair<int, int>> edges;
    edges.reserve(3 * mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 &p0 = mesh.nodes[tri[0]], &p1 = mesh.nodes[tri[1]], &p2 = mesh.nodes[tri[2]];
        auto ang = detail::triangle_angles(p0, p1, p2);
        for (double a : ang) {
            q.min_angle_deg = std::min(q.min_angle_deg, a * 180 / std::numbers::pi);
            q.max_angle_deg = std::max(q.max_angle_deg, a * 180 / std::numbers::pi);
        }
        double longest = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
        double area = std::abs(mesh.signed_area(t));
        q.max_aspect = std::max(q.max_aspect, longest * longest / (2 * area));
        for (int i = 0; i < 3; ++i) {
            int u = tri[i], v = tri[(i + 1) % 3];
            edges.emplace_back(std::min(u, v), std::max(u, v));
        }
    }
    std::sort(edges.begin(), edges.end());
    q.edges = long(std::unique(edges.begin(), edges.end()) - edges.begin());
    for (const auto& e : mesh.boundary_edges)
        (e.tag == BoundaryTag::Body ? q.body_edges : q.far_field_edges)++;
    return q;
}

/// Structured mesh: n_theta rays, n_radial geometric layers with
/// r(theta, t) = r_body(theta)^(1-t) R_out^t, every quad split across its better diagonal.
inline Mesh generate_mesh(const BodyCurve& curve, double R_out, double h) {
    if (!(h > 0)) throw DomainError("generate_mesh: h must be > 0");
    if (!(R_out >= 4 * curve.max_radius()))
        throw DomainError("generate_mesh: R_out must be >= 4 x body radius");

    Mesh mesh;
    mesh.curve = curve;
    mesh.h = h;
    mesh.R_out = R_out;

    int n_theta = std::max(8, int(std::ceil(2 * std::numbers::pi * curve.a / h)));
    if (curve.k > 0) n_theta = ((n_theta + curve.k - 1) / curve.k) * curve.k;
    int n_radial = std::max(2, int(std::ceil(curve.a * std::log(R_out / curve.a) / h)));
    mesh.n_theta = n_theta;
    mesh.n_radial = n_radial;

    auto id = [&](int i, int j) { return i * n_theta + (j % n_theta); };

    mesh.nodes.reserve(std::size_t(n_theta) * (n_radial + 1));
    for (int i = 0; i <= n_radial; ++i) {
        double t = double(i) / n_radial;
        for (int j = 0; j < n_theta; ++j) {
            double theta = 2 * std::numbers::pi * j / n_theta;
            Vec2 dir(std::cos(theta), std::sin(theta));
            if (i == 0) {
                mesh.nodes.push_back(curve.point(theta));
            } else if (i == n_radial) {
                mesh.nodes.push_back(R_out * dir);
            } else {
                double rb = curve.radius(theta);
                mesh.nodes.push_back(std::exp((1 - t) * std::log(rb) + t * std::log(R_out)) * dir);
            }
            mesh.node_tags.push_back(i == 0 ? NodeTag::Body
                                     : i == n_radial ? NodeTag::FarField
                                                     : NodeTag::Interior);
        }
    }

    mesh.triangles.reserve(2 * std::size_t(n_theta) * n_radial);
    for (int i = 0; i < n_radial; ++i) {
        for (int j = 0; j < n_theta; ++j) {
            int q0 = id(i, j), q1 = id(i + 1, j), q2 = id(i + 1, j + 1), q3 = id(i, j + 1);
            const auto& P = mesh.nodes;
            double diag02 = std::min(detail::min_angle_deg(P[q0], P[q1], P[q2]),
                                     detail::min_angle_deg(P[q0], P[q2], P[q3]));
            double diag13 = std::min(detail::min_angle_deg(P[q0], P[q1], P[q3]),
                                     detail::min_angle_deg(P[q1], P[q2], P[q3]));
            std::size_t first = mesh.triangles.size();
            if (diag02 >= diag13 - 1e-12) {
                mesh.triangles.push_back({q0, q1, q2});
                mesh.triangles.push_back({q0, q2, q3});
            } else {
                mesh.triangles.push_back({q0, q1, q3});
                mesh.triangles.push_back({q1, q2, q3});
            }
            // q0-q3 lies on ring i, q1-q2 on ring i+1.
            if (i == 0) {
                int owner = int(first) + (diag02 >= diag13 - 1e-12 ? 1 : 0);
                mesh.boundary_edges.push_back({q0, q3, BoundaryTag::Body, owner});
            }
            if (i == n_radial - 1) {
                int owner = int(first) + (diag02 >= diag13 - 1e-12 ? 0 : 1);
                mesh.boundary_edges.push_back({q1, q2, BoundaryTag::FarField, owner});
            }
        }
    }

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        double area = mesh.signed_area(t);
        double ang = detail::min_angle_deg(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
        if (!(area > 0) || ang < 20) {
            std::ostringstream msg;
            msg << "generate_mesh: degenerate triangle " << t << " (signed area " << area
                << ", min angle " << ang << " deg)";
            throw MeshQualityError(msg.str(), long(t));
        }
    }
    return mesh;
}

/// Relabel nodes: new index of old node i is perm[i].
inline Mesh permute_nodes(const Mesh& mesh, const std::vector<int>& perm) {
    Mesh out = mesh;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        out.nodes[perm[i]] = mesh.nodes[i];
        out.node_tags[perm[i]] = mesh.node_tags[i];
    }
    for (auto& tri : out.triangles)
        for (int& v : tri) v = perm[v];
    for (auto& e : out.boundary_edges) {
        e.a = perm[e.a];
        e.b = perm[e.b];
    }
    return out;
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Legacy VTK ASCII unstructured grid, cell type 5. Data sections are appended by callers.
inline void write_vtk_mesh(std::ostream& os, const Mesh& mesh, const std::string& title = "spiralflow mesh") {
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.nodes.size() << " double\n";
    for (const auto& p : mesh.nodes) os << detail::fmt17(p.x()) << ' ' << detail::fmt17(p.y()) << " 0\n";
    os << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.triangles.size() << '\n';
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) os << "5\n";
}

} // namespace spiralflow
