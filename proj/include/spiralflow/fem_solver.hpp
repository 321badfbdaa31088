#pragma once

// P1 minimization of the exterior stream-function functional
//
//   I[u] = int F(|grad u + grad psi0|^2) - F(|grad psi0|^2) - 2 F'(|grad psi0|^2) grad psi0 . grad u
//
// for the single-valued deviation u = psi - psi0. grad psi0 is evaluated analytically,
// u is pinned to -psi20 on the body. On the far-field circle u is either pinned to zero
// or tied to one floating value (zero net flux mismatch, the finite-energy condition).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "errors.hpp"
#include "gas_model.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "radial_flow.hpp"
#include "types.hpp"

namespace spiralflow {

enum class FarFieldCondition { Zero, Floating };

inline const char* to_string(FarFieldCondition f) {
    return f == FarFieldCondition::Zero ? "zero" : "floating";
}

struct SolverOptions {
    double newton_tol = 1e-9;
    int max_iter = 50;
    int threads = 1;
    FarFieldCondition far_field = FarFieldCondition::Floating;
};

namespace quadrature {

/// Degree-5 seven-point rule on the reference triangle, barycentric coordinates.
struct TrianglePoint {
    double l0, l1, l2, w;
};

inline const std::array<TrianglePoint, 7>& dunavant5() {
    static const std::array<TrianglePoint, 7> rule = [] {
        const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
        return std::array<TrianglePoint, 7>{{
            {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
            {a1, b1, b1, w1}, {b1, a1, b1, w1}, {b1, b1, a1, w1},
            {a2, b2, b2, w2}, {b2, a2, b2, w2}, {b2, b2, a2, w2},
        }};
    }();
    return rule;
}

} // namespace quadrature

/// Mesh-dependent background data shared by every truncation level and solve.
class BackgroundField {
public:
    BackgroundField(RadialBackground bg, std::shared_ptr<const Mesh> mesh)
        : bg_(std::move(bg)), mesh_(std::move(mesh)) {
        const Mesh& m = *mesh_;
        std::size_t nt = m.triangles.size();
        area_.resize(nt);
        basis_grad_.resize(nt);
        grad0_.resize(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& tri = m.triangles[t];
            const Vec2 &p0 = m.nodes[tri[0]], &p1 = m.nodes[tri[1]], &p2 = m.nodes[tri[2]];
            double a2 = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
            area_[t] = 0.5 * a2;
            // grad lambda_i = perp(opposite edge) / (2A), oriented inward.
            basis_grad_[t] = {Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / a2,
                              Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / a2,
                              Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / a2};
            grad0_[t] = bg_.grad_psi0(m.centroid(t));
        }
        node_grad0_.resize(m.nodes.size());
        body_value_.assign(m.nodes.size(), 0.0);
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            node_grad0_[i] = bg_.grad_psi0(m.nodes[i]);
            if (m.node_tags[i] == NodeTag::Body) body_value_[i] = -bg_.psi20(m.nodes[i].norm());
        }
    }

    const RadialBackground& background() const { return bg_; }
    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    double area(std::size_t t) const { return area_[t]; }
    const std::array<Vec2, 3>& basis_grad(std::size_t t) const { return basis_grad_[t]; }
    const Vec2& grad_psi0(std::size_t t) const { return grad0_[t]; }
    const Vec2& node_grad_psi0(std::size_t i) const { return node_grad0_[i]; }
    double body_value(std::size_t i) const { return body_value_[i]; }

    Vec2 grad(std::size_t t, const std::vector<double>& u) const {
        const auto& tri = mesh_->triangles[t];
        const auto& g = basis_grad_[t];
        return u[tri[0]] * g[0] + u[tri[1]] * g[1] + u[tri[2]] * g[2];
    }

private:
    RadialBackground bg_;
    std::shared_ptr<const Mesh> mesh_;
    std::vector<double> area_;
    std::vector<std::array<Vec2, 3>> basis_grad_;
    std::vector<Vec2> grad0_;
    std::vector<Vec2> node_grad0_;
    std::vector<double> body_value_;
};

class ProblemSetup {
public:
    ProblemSetup(GasModel gas, std::shared_ptr<const BackgroundField> field, SolverOptions opts = {})
        : gas_(std::move(gas)), field_(std::move(field)), opts_(opts) {
        const Mesh& m = field_->mesh();
        dof_.assign(m.nodes.size(), -1);
        lift_.assign(m.nodes.size(), 0.0);
        int n = 0;
        for (std::size_t i = 0; i < m.nodes.size(); ++i)
            if (m.node_tags[i] == NodeTag::Interior) dof_[i] = n++;
        if (opts_.far_field == FarFieldCondition::Floating) {
            for (std::size_t i = 0; i < m.nodes.size(); ++i)
                if (m.node_tags[i] == NodeTag::FarField) dof_[i] = n;
            ++n;
        }
        n_dofs_ = n;
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            if (m.node_tags[i] == NodeTag::Body) lift_[i] = field_->body_value(i);
            if (!std::isfinite(lift_[i])) throw DomainError("ProblemSetup: non-finite boundary value");
        }

        std::size_t nt = m.triangles.size();
        f0_.resize(nt);
        df0_.resize(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            FluxPotential fp = gas_.flux_potential(field_->grad_psi0(t).squaredNorm());
            f0_[t] = fp.F;
            df0_[t] = fp.dF;
        }
    }

    const GasModel& gas() const { return gas_; }
    const BackgroundField& field() const { return *field_; }
    std::shared_ptr<const BackgroundField> field_ptr() const { return field_; }
    const Mesh& mesh() const { return field_->mesh(); }
    const RadialBackground& background() const { return field_->background(); }
    const SolverOptions& options() const { return opts_; }
    int n_dofs() const { return n_dofs_; }
    int dof(std::size_t node) const { return dof_[node]; }
    double background_flux(std::size_t t) const { return f0_[t]; }
    double background_flux_slope(std::size_t t) const { return df0_[t]; }

    /// Nodal vector holding the boundary data and zero elsewhere.
    const std::vector<double>& lift() const { return lift_; }

    std::vector<double> nodal_from_dofs(const Eigen::VectorXd& x) const {
        std::vector<double> u = lift_;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (dof_[i] >= 0) u[i] = x[dof_[i]];
        return u;
    }

    /// Restrict a nodal vector to the free values (floating ring takes its mean).
    Eigen::VectorXd dofs_from_nodal(const std::vector<double>& u) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_dofs_);
        Eigen::VectorXd count = Eigen::VectorXd::Zero(n_dofs_);
        for (std::size_t i = 0; i < u.size(); ++i)
            if (dof_[i] >= 0) {
                x[dof_[i]] += u[i];
                count[dof_[i]] += 1;
            }
        for (int k = 0; k < n_dofs_; ++k)
            if (count[k] > 0) x[k] /= count[k];
        return x;
    }

private:
    GasModel gas_;
    std::shared_ptr<const BackgroundField> field_;
    SolverOptions opts_;
    std::vector<int> dof_;
    std::vector<double> lift_;
    int n_dofs_ = 0;
    std::vector<double> f0_, df0_;
};

struct Assembly {
    double value = 0;
    Eigen::VectorXd gradient;
    Eigen::SparseMatrix<double> hessian;
};

namespace detail {

struct ElementTerms {
    double value;
    std::array<double, 3> grad;
    std::array<double, 9> hess;
};

inline ElementTerms element_terms(const ProblemSetup& setup, std::size_t t,
                                  const std::vector<double>& u, bool with_hessian) {
    const BackgroundField& f = setup.field();
    const auto& bg = f.basis_grad(t);
    Vec2 du = f.grad(t, u);
    const Vec2& g0 = f.grad_psi0(t);
    Vec2 p = du + g0;
    FluxPotential fp = setup.gas().flux_potential(p.squaredNorm());
    double A = f.area(t);
    double df0 = setup.background_flux_slope(t);

    ElementTerms e{};
    e.value = A * (fp.F - setup.background_flux(t) - 2 * df0 * g0.dot(du));
    Vec2 flux = 2 * fp.dF * p - 2 * df0 * g0;
    for (int a = 0; a < 3; ++a) e.grad[a] = A * flux.dot(bg[a]);
    if (with_hessian) {
        Mat2 K = 2 * fp.dF * Mat2::Identity() + 4 * fp.d2F * p * p.transpose();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) e.hess[3 * a + b] = A * bg[a].dot(K * bg[b]);
    }
    return e;
}

} // namespace detail

/// Value, dof gradient and dof Hessian of the discrete functional at nodal u.
/// Element kernels run in parallel; the reduction runs in element order.
inline Assembly assemble_functional(const ProblemSetup& setup, const std::vector<double>& u,
                                    bool with_hessian = true) {
    const Mesh& m = setup.mesh();
    std::size_t nt = m.triangles.size();
    std::vector<detail::ElementTerms> terms(nt);
    parallel_for(nt, setup.options().threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) terms[t] = detail::element_terms(setup, t, u, with_hessian);
    });

    Assembly out;
    out.gradient = Eigen::VectorXd::Zero(setup.n_dofs());
    std::vector<Eigen::Triplet<double>> trip;
    if (with_hessian) trip.reserve(9 * nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& e = terms[t];
        if (!std::isfinite(e.value)) {
            std::ostringstream msg;
            msg << "assemble_functional: non-finite contribution from triangle " << t;
            throw AssemblyError(msg.str(), long(t));
        }
        out.value += e.value;
        const auto& tri = m.triangles[t];
        for (int a = 0; a < 3; ++a) {
            int da = setup.dof(tri[a]);
            if (da < 0) continue;
            out.gradient[da] += e.grad[a];
            if (!with_hessian) continue;
            for (int b = 0; b < 3; ++b) {
                int db = setup.dof(tri[b]);
                if (db >= 0) trip.emplace_back(da, db, e.hess[3 * a + b]);
            }
        }
    }
    if (with_hessian) {
        out.hessian.resize(setup.n_dofs(), setup.n_dofs());
        out.hessian.setFromTriplets(trip.begin(), trip.end());
    }
    return out;
}

inline double functional_value(const ProblemSetup& setup, const std::vector<double>& u) {
    const Mesh& m = setup.mesh();
    std::size_t nt = m.triangles.size();
    std::vector<double> vals(nt);
    const BackgroundField& f = setup.field();
    parallel_for(nt, setup.options().threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            Vec2 du = f.grad(t, u);
            const Vec2& g0 = f.grad_psi0(t);
            double F = setup.gas().flux_potential((du + g0).squaredNorm()).F;
            vals[t] = f.area(t) * (F - setup.background_flux(t) - 2 * setup.background_flux_slope(t) * g0.dot(du));
        }
    });
    double sum = 0;
    for (double v : vals) sum += v;
    return sum;
}

/// int |grad w|^2 for a nodal vector w.
inline double dirichlet_energy(const BackgroundField& f, const std::vector<double>& w) {
    double sum = 0;
    for (std::size_t t = 0; t < f.mesh().triangles.size(); ++t) sum += f.area(t) * f.grad(t, w).squaredNorm();
    return sum;
}

struct NewtonStep {
    int iter;
    double energy;
    double grad_norm;
    double step_length;
};

struct StreamSolution {
    std::shared_ptr<const ProblemSetup> setup;
    std::vector<double> u;
    std::vector<Vec2> grad_psi;  ///< per triangle, grad u + grad psi0 at the centroid
    std::vector<double> density; ///< H~(|grad psi|^2)
    std::vector<double> speed;   ///< |grad psi| / rho
    std::vector<Vec2> velocity;  ///< (d2 psi, -d1 psi) / rho
    double energy = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<NewtonStep> log;
    double s_max = 0;            ///< sup of |grad psi|^2 over centroids and element vertices
    double q_max = 0;
    Vec2 argmax = Vec2::Zero();
};

namespace detail {

inline void fill_fields(StreamSolution& sol) {
    const ProblemSetup& setup = *sol.setup;
    const BackgroundField& f = setup.field();
    const GasModel& gas = setup.gas();
    const Mesh& m = setup.mesh();
    std::size_t nt = m.triangles.size();
    sol.grad_psi.resize(nt);
    sol.density.resize(nt);
    sol.speed.resize(nt);
    sol.velocity.resize(nt);
    sol.s_max = 0;
    sol.q_max = 0;
    for (std::size_t t = 0; t < nt; ++t) {
        Vec2 du = f.grad(t, sol.u);
        Vec2 p = du + f.grad_psi0(t);
        double rho = gas.truncated_density(p.squaredNorm());
        sol.grad_psi[t] = p;
        sol.density[t] = rho;
        sol.speed[t] = p.norm() / rho;
        sol.velocity[t] = Vec2(p.y() / rho, -p.x() / rho);

        auto visit = [&](const Vec2& grad, const Vec2& where) {
            double s = grad.squaredNorm();
            double q = std::sqrt(s) / gas.truncated_density(s);
            if (s > sol.s_max) {
                sol.s_max = s;
                sol.argmax = where;
            }
            sol.q_max = std::max(sol.q_max, q);
        };
        visit(p, m.centroid(t));
        for (int v : m.triangles[t]) visit(du + f.node_grad_psi0(v), m.nodes[v]);
    }
}

} // namespace detail

/// Damped Newton with Armijo backtracking. The functional is strictly convex, so the
/// iteration either converges or signals a setup bug.
inline StreamSolution solve(std::shared_ptr<const ProblemSetup> setup,
                            const std::vector<double>* initial = nullptr) {
    const SolverOptions& opt = setup->options();
    Eigen::VectorXd x = initial ? setup->dofs_from_nodal(*initial) : Eigen::VectorXd::Zero(setup->n_dofs());

    StreamSolution sol;
    sol.setup = setup;
    std::vector<double> u = setup->nodal_from_dofs(x);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;
    for (int it = 0;; ++it) {
        Assembly as = assemble_functional(*setup, u, true);
        double gnorm = as.gradient.norm();
        bool done = gnorm <= opt.newton_tol * (1 + std::abs(as.value));
        if (done || it == opt.max_iter) {
            sol.log.push_back({it, as.value, gnorm, 0});
            sol.energy = as.value;
            sol.iterations = it;
            sol.converged = done;
            if (!done) {
                std::ostringstream msg;
                msg << "solve: no convergence after " << it << " Newton steps (|grad| = " << gnorm << ")";
                throw ConvergenceError(msg.str(), u);
            }
            break;
        }

        if (!analyzed) {
            ldlt.analyzePattern(as.hessian);
            analyzed = true;
        }
        ldlt.factorize(as.hessian);
        Eigen::VectorXd d;
        if (ldlt.info() == Eigen::Success) d = ldlt.solve(-as.gradient);
        if (d.size() == 0 || !d.allFinite() || d.dot(as.gradient) >= 0) d = -as.gradient;

        double slope = d.dot(as.gradient);
        double t = 1;
        double trial = 0;
        std::vector<double> ut;
        // Below roundoff the decrement cannot be resolved by energy differences.
        bool tiny = -slope <= 1e-14 * (1 + std::abs(as.value));
        for (int ls = 0; ls < 60; ++ls) {
            ut = setup->nodal_from_dofs(x + t * d);
            trial = functional_value(*setup, ut);
            if (tiny || trial <= as.value + 1e-4 * t * slope) break;
            t *= 0.5;
        }
        sol.log.push_back({it, as.value, gnorm, t});
        x += t * d;
        u = std::move(ut);
    }
    sol.u = std::move(u);
    detail::fill_fields(sol);
    return sol;
}

inline StreamSolution solve(const ProblemSetup& setup, const std::vector<double>* initial = nullptr) {
    return solve(std::make_shared<const ProblemSetup>(setup), initial);
}

struct RecoveredFields {
    std::vector<double> density, u1, u2, speed, mach;
    std::vector<std::size_t> sonic_or_above; ///< triangles with q >= 1
};

inline RecoveredFields recover_fields(const StreamSolution& sol) {
    RecoveredFields r;
    const GasModel& gas = sol.setup->gas();
    std::size_t nt = sol.grad_psi.size();
    for (std::size_t t = 0; t < nt; ++t) {
        double rho = sol.density[t];
        r.density.push_back(rho);
        r.u1.push_back(sol.velocity[t].x());
        r.u2.push_back(sol.velocity[t].y());
        r.speed.push_back(sol.speed[t]);
        r.mach.push_back(sol.speed[t] / std::sqrt(gas.sound_speed_sq(rho)));
        if (sol.speed[t] >= 1) r.sonic_or_above.push_back(t);
    }
    return r;
}

/// Mass flux through the body, oriented into the flow domain. The trace of
/// rho u = (d2 psi, -d1 psi) combines the element gradient of u with grad psi0 on the
/// body curve; each edge is integrated over its arc in theta, three Gauss points.
inline double boundary_flux(const StreamSolution& sol) {
    const BackgroundField& f = sol.setup->field();
    const Mesh& m = f.mesh();
    const BodyCurve& c = m.curve;
    static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
    double flux = 0;
    for (const auto& e : m.boundary_edges) {
        if (e.tag != BoundaryTag::Body) continue;
        const Vec2 &a = m.nodes[e.a], &b = m.nodes[e.b];
        double ta = std::atan2(a.y(), a.x());
        double dt = std::remainder(std::atan2(b.y(), b.x()) - ta, 2 * std::numbers::pi);
        bool flip = perp(b - a).dot(m.centroid(e.triangle) - a) < 0;
        Vec2 du = f.grad(e.triangle, sol.u);
        for (int q = 0; q < 3; ++q) {
            double th = ta + 0.5 * dt * (1 + gx[q]);
            double r = c.radius(th), dr = -c.b * c.k * std::sin(c.k * th);
            Vec2 tangent(dr * std::cos(th) - r * std::sin(th), dr * std::sin(th) + r * std::cos(th));
            Vec2 n = perp(tangent * dt);
            if (flip) n = -n;
            Vec2 p = du + f.background().grad_psi0(c.point(th));
            flux += 0.5 * gw[q] * Vec2(p.y(), -p.x()).dot(n);
        }
    }
    return flux;
}

/// ||grad(u_a - u_b)||_L2 for two solutions on the same mesh.
inline double energy_norm_difference(const StreamSolution& a, const StreamSolution& b) {
    std::vector<double> w(a.u.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = a.u[i] - b.u[i];
    return std::sqrt(dirichlet_energy(a.setup->field(), w));
}

/// Relative L2 error of the piecewise-constant grad psi against grad psi0,
/// integrated with a degree-5 rule. grad psi0 is the exact solution on a circular body.
inline double relative_gradient_error(const StreamSolution& sol) {
    const BackgroundField& f = sol.setup->field();
    const Mesh& m = f.mesh();
    double err = 0, ref = 0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& tri = m.triangles[t];
        for (const auto& q : quadrature::dunavant5()) {
            Vec2 x = q.l0 * m.nodes[tri[0]] + q.l1 * m.nodes[tri[1]] + q.l2 * m.nodes[tri[2]];
            Vec2 exact = f.background().grad_psi0(x);
            err += q.w * f.area(t) * (sol.grad_psi[t] - exact).squaredNorm();
            ref += q.w * f.area(t) * exact.squaredNorm();
        }
    }
    return std::sqrt(err / ref);
}

/// Discrete mollifier bumps b(x) = exp(1 - 1/(1 - |x-c|^2/R^2)) interpolated on the mesh,
/// supported strictly inside the annulus.
struct TestBump {
    Vec2 center;
    double radius;
    std::vector<double> values; ///< nodal
};

inline std::vector<TestBump> interior_test_bumps(const Mesh& m, int n_tests) {
    std::vector<TestBump> bumps;
    double scale = m.curve.scale();
    double r_lo = 2 * scale, r_hi = m.R_out / 2;
    const double golden = std::numbers::pi * (3 - std::sqrt(5.0));
    for (int k = 0; k < n_tests; ++k) {
        double frac = n_tests == 1 ? 0.5 : double(k) / (n_tests - 1);
        double rc = r_lo * std::pow(r_hi / r_lo, frac);
        double th = golden * k;
        TestBump b;
        b.center = Vec2(rc * std::cos(th), rc * std::sin(th));
        b.radius = 0.5 * std::min(rc - scale, m.R_out - rc);
        b.values.assign(m.nodes.size(), 0.0);
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            double z = (m.nodes[i] - b.center).squaredNorm() / (b.radius * b.radius);
            if (z < 1 && m.node_tags[i] == NodeTag::Interior) b.values[i] = std::exp(1 - 1 / (1 - z));
        }
        bumps.push_back(std::move(b));
    }
    return bumps;
}

enum class ResidualMode {
    Deviation, ///< flux relative to the exact background
    Full,      ///< total flux grad psi / H~; includes the background's own consistency error
};

/// max over bumps v of |int grad psi / H~ . grad v| / ||grad v||_L2, centroid rule.
/// In Deviation mode the discrete background flux F'(|grad psi0|^2) grad psi0 is
/// subtracted; the continuous background is divergence free.
inline double weak_residual(const StreamSolution& sol, int n_tests, ResidualMode mode = ResidualMode::Deviation) {
    const ProblemSetup& setup = *sol.setup;
    const BackgroundField& f = setup.field();
    const Mesh& m = f.mesh();
    double worst = 0;
    for (const auto& bump : interior_test_bumps(m, n_tests)) {
        double num = 0, den = 0;
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
            Vec2 gv = f.grad(t, bump.values);
            if (gv.squaredNorm() == 0) continue;
            den += f.area(t) * gv.squaredNorm();
            Vec2 flux = sol.grad_psi[t] / sol.density[t];
            if (mode == ResidualMode::Deviation) flux -= setup.background_flux_slope(t) * f.grad_psi0(t);
            num += f.area(t) * flux.dot(gv);
        }
        if (den > 0) worst = std::max(worst, std::abs(num) / std::sqrt(den));
    }
    return worst;
}

struct EulerResiduals {
    double mass;          ///< div(g(q^2) u) tested against bumps
    double irrotational;  ///< curl u tested against bumps
};

/// Weak residuals of the steady Euler pair for the recovered velocity, measured
/// relative to the radial background (an exact solution of both equations).
inline EulerResiduals euler_residuals(const StreamSolution& sol, int n_tests) {
    const ProblemSetup& setup = *sol.setup;
    const BackgroundField& f = setup.field();
    const Mesh& m = f.mesh();
    const GasModel& gas = setup.gas();
    const RadialBackground& bg = f.background();
    std::vector<Vec2> u0(m.triangles.size()), mass0(m.triangles.size());
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        Vec2 c = m.centroid(t);
        u0[t] = bg.velocity(c);
        mass0[t] = bg.density(c.norm()) * u0[t];
    }
    EulerResiduals r{0, 0};
    for (const auto& bump : interior_test_bumps(m, n_tests)) {
        double mass = 0, rot = 0, den = 0;
        for (std::size_t t = 0; t < m.triangles.size(); ++t) {
            Vec2 gv = f.grad(t, bump.values);
            if (gv.squaredNorm() == 0) continue;
            double A = f.area(t);
            den += A * gv.squaredNorm();
            const Vec2& u = sol.velocity[t];
            double rho = gas.density_from_speed(std::min(u.squaredNorm(), (gas.gamma() + 1) / (gas.gamma() - 1)));
            mass += A * (rho * u - mass0[t]).dot(gv);
            rot += A * (u - u0[t]).dot(perp(gv));
        }
        if (den > 0) {
            r.mass = std::max(r.mass, std::abs(mass) / std::sqrt(den));
            r.irrotational = std::max(r.irrotational, std::abs(rot) / std::sqrt(den));
        }
    }
    return r;
}

struct RingSample {
    double r;
    double m;
};

struct DecayFit {
    bool exact_match = false;
    double slope = 0;
    std::vector<RingSample> rings;
};

namespace detail {

inline DecayFit fit_rings(const Mesh& m, const std::vector<double>& per_triangle, int n_rings) {
    double lo = 2 * m.curve.scale(), hi = m.R_out / 2;
    double ratio = std::pow(hi / lo, 1.0 / (n_rings - 1));
    double half = std::sqrt(ratio);
    DecayFit fit;
    fit.rings.resize(n_rings);
    for (int k = 0; k < n_rings; ++k) fit.rings[k] = {lo * std::pow(ratio, k), 0};
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        double rc = m.centroid(t).norm();
        for (auto& ring : fit.rings)
            if (rc >= ring.r / half && rc < ring.r * half) ring.m = std::max(ring.m, per_triangle[t]);
    }

    bool all_tiny = std::all_of(fit.rings.begin(), fit.rings.end(), [](const RingSample& s) { return s.m < 1e-13; });
    if (all_tiny) {
        fit.exact_match = true;
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& s : fit.rings) {
        if (!(s.m > 0)) continue;
        double x = std::log(s.r), y = std::log(s.m);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

} // namespace detail

/// Least-squares exponent of ring maxima of |grad psi - grad psi0| over r in [2 scale, R_out/2].
inline DecayFit decay_slope(const StreamSolution& sol, int n_rings = 8) {
    const BackgroundField& f = sol.setup->field();
    std::vector<double> dev(sol.grad_psi.size());
    for (std::size_t t = 0; t < dev.size(); ++t) dev[t] = (sol.grad_psi[t] - f.grad_psi0(t)).norm();
    return detail::fit_rings(f.mesh(), dev, n_rings);
}

/// Same ring fit applied to |grad psi0| itself.
inline DecayFit background_decay_slope(const BackgroundField& f, int n_rings = 8) {
    std::vector<double> mag(f.mesh().triangles.size());
    for (std::size_t t = 0; t < mag.size(); ++t) mag[t] = f.grad_psi0(t).norm();
    return detail::fit_rings(f.mesh(), mag, n_rings);
}

struct EnergyBound {
    double energy_norm_sq; ///< ||grad u*||^2 at the minimizer
    double bound;          ///< I[lift] / lambda
};

/// lambda ||grad u||^2 <= I[u] for every admissible u, and I[u*] <= I[lift].
inline EnergyBound energy_bound(const StreamSolution& sol) {
    const ProblemSetup& setup = *sol.setup;
    double lambda = setup.gas().ellipticity_bounds().lambda;
    return {dirichlet_energy(setup.field(), sol.u), functional_value(setup, setup.lift()) / lambda};
}

inline void write_solution_vtk(std::ostream& os, const StreamSolution& sol) {
    const Mesh& m = sol.setup->mesh();
    write_vtk_mesh(os, m, "spiralflow solution");
    os << "POINT_DATA " << m.nodes.size() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (double v : sol.u) os << detail::fmt17(v) << '\n';
    os << "CELL_DATA " << m.triangles.size() << "\nSCALARS speed double 1\nLOOKUP_TABLE default\n";
    for (double v : sol.speed) os << detail::fmt17(v) << '\n';
    os << "SCALARS density double 1\nLOOKUP_TABLE default\n";
    for (double v : sol.density) os << detail::fmt17(v) << '\n';
    os << "VECTORS velocity double\n";
    for (const auto& v : sol.velocity) os << detail::fmt17(v.x()) << ' ' << detail::fmt17(v.y()) << " 0\n";
}

inline void write_rings_csv(std::ostream& os, const DecayFit& fit) {
    os << "r,m\n";
    for (const auto& s : fit.rings) os << detail::fmt17(s.r) << ',' << detail::fmt17(s.m) << '\n';
}

} // namespace spiralflow
