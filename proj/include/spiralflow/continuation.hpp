#pragma once

// Truncation removal, parameter sweeps, removability bisection and the
// approach to the sonic limit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fem_solver.hpp"
#include "gas_model.hpp"
#include "mesh.hpp"
#include "radial_flow.hpp"

namespace spiralflow {

/// Halving ladder 0.2, 0.1, ..., 0.2 * 2^-17. The first five entries are the
/// conventional coarse schedule; the finer ones let removability resolve
/// boundary speeds within about 1e-5 of sonic.
inline std::vector<double> default_eps_schedule() {
    std::vector<double> eps;
    for (int k = 0; k <= 17; ++k) eps.push_back(0.2 * std::ldexp(1.0, -k));
    return eps;
}

struct ContinuationOptions {
    double gamma = 2;
    std::vector<double> eps_schedule = default_eps_schedule();
    SolverOptions solver;
    bool verify_next = false; ///< also solve at the next eps and compare
};

struct ContinuationRecord {
    double kappa1 = 0;
    double kappa2 = 0;
    double eps_used = 0;
    double q_max = 0;
    double s_max = 0;
    double energy = 0;
    bool removed = false;
    bool converged = false;
    bool solved = false;   ///< false when the background is not subsonic at the body
    /// ||grad(u_eps - u_eps_next)|| when the next eps was also removed; NaN otherwise.
    double next_eps_difference = std::numeric_limits<double>::quiet_NaN();
};

struct TruncationResult {
    std::optional<StreamSolution> solution;
    ContinuationRecord record;
};

/// Solve along the eps schedule and stop at the first eps whose truncation is inactive.
inline TruncationResult solve_with_truncation_removal(double kappa1, double kappa2,
                                                      std::shared_ptr<const Mesh> mesh,
                                                      const ContinuationOptions& opt,
                                                      const std::vector<double>* initial = nullptr) {
    if (!(kappa1 > 0 && kappa1 <= 1)) throw DomainError("solve_with_truncation_removal: kappa1 must lie in (0, 1]");
    if (opt.eps_schedule.empty()) throw DomainError("solve_with_truncation_removal: empty eps schedule");

    TruncationResult res;
    ContinuationRecord& rec = res.record;
    rec.kappa1 = kappa1;
    rec.kappa2 = kappa2;
    // A background with boundary speed >= 1 has no uniformly subsonic state.
    if (kappa1 * kappa1 + kappa2 * kappa2 >= 1 - 1e-12) {
        rec.eps_used = opt.eps_schedule.back();
        rec.q_max = std::sqrt(kappa1 * kappa1 + kappa2 * kappa2);
        return res;
    }

    GasModel base(opt.gamma, opt.eps_schedule.front());
    auto field = std::make_shared<const BackgroundField>(RadialBackground(base, kappa1, kappa2), mesh);

    std::vector<double> warm;
    if (initial) warm = *initial;
    for (std::size_t i = 0; i < opt.eps_schedule.size(); ++i) {
        double eps = opt.eps_schedule[i];
        auto setup = std::make_shared<const ProblemSetup>(GasModel(opt.gamma, eps), field, opt.solver);
        StreamSolution sol = solve(setup, warm.empty() ? nullptr : &warm);
        warm = sol.u;

        rec.eps_used = eps;
        rec.q_max = sol.q_max;
        rec.s_max = sol.s_max;
        rec.energy = sol.energy;
        rec.converged = sol.converged;
        rec.solved = true;
        rec.removed = sol.s_max < 1 - 2 * eps;

        bool last = i + 1 == opt.eps_schedule.size();
        if (rec.removed && opt.verify_next && !last) {
            double next = opt.eps_schedule[i + 1];
            auto s2 = std::make_shared<const ProblemSetup>(GasModel(opt.gamma, next), field, opt.solver);
            StreamSolution other = solve(s2, &sol.u);
            if (other.s_max < 1 - 2 * next) rec.next_eps_difference = energy_norm_difference(sol, other);
        }
        if (rec.removed || last) {
            res.solution = std::move(sol);
            break;
        }
    }
    return res;
}

enum class SweepAxis { Kappa2, Kappa1 };

inline const char* to_string(SweepAxis a) { return a == SweepAxis::Kappa2 ? "kappa2" : "kappa1"; }

struct SweepResult {
    std::vector<ContinuationRecord> records;
    double modulus = 0;   ///< max over adjacent pairs of |dq_max| / |dkappa|
    double max_jump = 0;  ///< max over adjacent pairs of |dq_max|
};

namespace detail {

inline std::pair<double, double> axis_point(SweepAxis axis, double fixed, double value) {
    return axis == SweepAxis::Kappa2 ? std::pair{fixed, value} : std::pair{value, fixed};
}

inline double axis_value(SweepAxis axis, const ContinuationRecord& r) {
    return axis == SweepAxis::Kappa2 ? r.kappa2 : r.kappa1;
}

} // namespace detail

/// One record per grid value, warm-started from the previous point.
inline SweepResult parameter_sweep(SweepAxis axis, double fixed, const std::vector<double>& grid,
                                   std::shared_ptr<const Mesh> mesh, const ContinuationOptions& opt) {
    SweepResult out;
    std::vector<double> warm;
    for (double v : grid) {
        auto [k1, k2] = detail::axis_point(axis, fixed, v);
        auto r = solve_with_truncation_removal(k1, k2, mesh, opt, warm.empty() ? nullptr : &warm);
        if (r.solution) warm = r.solution->u;
        out.records.push_back(r.record);
    }
    for (std::size_t i = 1; i < out.records.size(); ++i) {
        double dq = std::abs(out.records[i].q_max - out.records[i - 1].q_max);
        double dk = std::abs(detail::axis_value(axis, out.records[i]) - detail::axis_value(axis, out.records[i - 1]));
        out.max_jump = std::max(out.max_jump, dq);
        if (dk > 0) out.modulus = std::max(out.modulus, dq / dk);
    }
    return out;
}

/// Default coarse grids. The closing value 1 is never removable.
inline std::vector<double> default_critical_grid(SweepAxis axis) {
    std::vector<double> g;
    if (axis == SweepAxis::Kappa2)
        for (int i = 0; i <= 9; ++i) g.push_back(0.1 * i);
    else
        for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
    g.push_back(1.0);
    return g;
}

struct BisectionStep {
    double lo;
    double hi;
    double mid;
    bool removed;
};

struct CriticalResult {
    SweepAxis axis;
    double fixed;
    double lo;   ///< removable
    double hi;   ///< not removable
    std::vector<ContinuationRecord> grid_records;
    std::vector<BisectionStep> steps;
    ContinuationRecord lo_record;
};

inline CriticalResult find_critical_parameter(SweepAxis axis, double fixed, double tol,
                                              std::shared_ptr<const Mesh> mesh,
                                              const ContinuationOptions& opt,
                                              std::vector<double> grid = {}) {
    if (!(tol >= 1e-3)) throw DomainError("find_critical_parameter: tol must be >= 1e-3");
    if (grid.empty()) grid = default_critical_grid(axis);

    CriticalResult res{axis, fixed, 0, 0, {}, {}, {}};
    auto predicate = [&](double v, const std::vector<double>* warm) {
        auto [k1, k2] = detail::axis_point(axis, fixed, v);
        return solve_with_truncation_removal(k1, k2, mesh, opt, warm);
    };

    for (double v : grid) res.grid_records.push_back(predicate(v, nullptr).record);
    const auto& g = res.grid_records;

    // Removability must switch from true to false exactly once along the grid.
    std::size_t first_false = g.size();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!g[i].removed) {
            first_false = i;
            break;
        }
    for (std::size_t k = first_false + 1; k < g.size(); ++k)
        if (g[k].removed) {
            double a = first_false > 0 ? grid[first_false - 1] : std::numeric_limits<double>::quiet_NaN();
            std::ostringstream msg;
            msg << "find_critical_parameter: removability is not monotone on the grid near ("
                << a << ", " << grid[first_false] << ", " << grid[k] << ")";
            throw MonotonicityError(msg.str(), a, grid[first_false], grid[k]);
        }
    if (first_false == 0) throw RegimeError("find_critical_parameter: no removable grid point");
    if (first_false == g.size()) throw RegimeError("find_critical_parameter: every grid point is removable");

    res.lo = grid[first_false - 1];
    res.hi = grid[first_false];
    res.lo_record = g[first_false - 1];
    while (res.hi - res.lo > tol) {
        double mid = 0.5 * (res.lo + res.hi);
        auto r = predicate(mid, nullptr);
        res.steps.push_back({res.lo, res.hi, mid, r.record.removed});
        if (r.record.removed) {
            res.lo = mid;
            res.lo_record = r.record;
        } else {
            res.hi = mid;
        }
    }
    return res;
}

struct LadderPoint {
    double kappa;
    ContinuationRecord record;
    double cauchy_difference;   ///< L2 velocity difference to the previous point on the annulus; NaN first
    double mass_residual;
    double irrotational_residual;
    double delta_h;             ///< max(0, q_max - 1)
};

struct LimitStudy {
    SweepAxis axis;
    double fixed;
    double annulus_inner;
    double annulus_outer;
    std::vector<LadderPoint> points;
    double weak_residual_final = 0;
};

/// kappa^j = lo - spread (2^-j - 2^-(n-1)), j = 0..n-1: distances to lo halve and the
/// ladder ends at the removable end of the bracket.
inline std::vector<double> sonic_ladder(double lo, int n_seq, double spread) {
    if (n_seq < 2) throw DomainError("sonic_ladder: n_seq must be >= 2");
    std::vector<double> k;
    for (int j = 0; j < n_seq; ++j) k.push_back(lo - spread * (std::ldexp(1.0, -j) - std::ldexp(1.0, -(n_seq - 1))));
    return k;
}

inline LimitStudy sonic_limit_study(SweepAxis axis, double fixed, double bracket_lo, double bracket_hi, int n_seq,
                                    std::shared_ptr<const Mesh> mesh, const ContinuationOptions& opt,
                                    double spread = 0.1, int n_tests = 12) {
    if (!(bracket_lo < bracket_hi)) throw DomainError("sonic_limit_study: invalid bracket");
    LimitStudy st{axis, fixed, mesh->curve.scale(), 4 * mesh->curve.scale(), {}, 0};
    std::vector<double> ladder = sonic_ladder(bracket_lo, n_seq, spread);

    std::vector<double> warm;
    std::vector<Vec2> prev_velocity;
    for (double kappa : ladder) {
        auto [k1, k2] = detail::axis_point(axis, fixed, kappa);
        auto r = solve_with_truncation_removal(k1, k2, mesh, opt, warm.empty() ? nullptr : &warm);
        if (!r.solution) throw RegimeError("sonic_limit_study: ladder point outside the subsonic range");
        const StreamSolution& sol = *r.solution;
        warm = sol.u;

        LadderPoint p{kappa, r.record, std::numeric_limits<double>::quiet_NaN(), 0, 0,
                      std::max(0.0, sol.q_max - 1)};
        if (!prev_velocity.empty()) {
            double sum = 0;
            for (std::size_t t = 0; t < mesh->triangles.size(); ++t) {
                double rc = mesh->centroid(t).norm();
                if (rc < st.annulus_inner || rc > st.annulus_outer) continue;
                sum += std::abs(mesh->signed_area(t)) * (sol.velocity[t] - prev_velocity[t]).squaredNorm();
            }
            p.cauchy_difference = std::sqrt(sum);
        }
        EulerResiduals er = euler_residuals(sol, n_tests);
        p.mass_residual = er.mass;
        p.irrotational_residual = er.irrotational;
        prev_velocity = sol.velocity;
        st.points.push_back(p);
        if (&kappa == &ladder.back()) st.weak_residual_final = weak_residual(sol, n_tests);
    }
    return st;
}

inline void write_records_csv(std::ostream& os, const std::vector<ContinuationRecord>& recs) {
    using detail::fmt17;
    os << "kappa1,kappa2,eps,q_max,s_max,energy,removed,converged\n";
    for (const auto& r : recs)
        os << fmt17(r.kappa1) << ',' << fmt17(r.kappa2) << ',' << fmt17(r.eps_used) << ',' << fmt17(r.q_max) << ','
           << fmt17(r.s_max) << ',' << fmt17(r.energy) << ',' << (r.removed ? 1 : 0) << ','
           << (r.converged ? 1 : 0) << '\n';
}

} // namespace spiralflow
