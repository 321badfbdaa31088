// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include <spiralflow/continuation.hpp>

using namespace spiralflow;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const Mesh> make_mesh(const BodyCurve& c, double R_out, double h) {
    return std::make_shared<const Mesh>(generate_mesh(c, R_out, h));
}

std::shared_ptr<const ProblemSetup> make_setup(std::shared_ptr<const Mesh> mesh, double k1, double k2, double eps,
                                               SolverOptions opt = {}) {
    GasModel gas(2, eps);
    auto field = std::make_shared<const BackgroundField>(RadialBackground(gas, k1, k2), mesh);
    return std::make_shared<const ProblemSetup>(gas, field, opt);
}

std::vector<double> random_state(const ProblemSetup& s, std::mt19937_64& rng, double amp) {
    std::uniform_real_distribution<double> U(-amp, amp);
    Eigen::VectorXd x(s.n_dofs());
    for (int i = 0; i < s.n_dofs(); ++i) x[i] = U(rng);
    return s.nodal_from_dofs(x);
}

const BodyCurve kLobed = BodyCurve::perturbed(1.2, 0.1, 3);

void radial_exactness() {
    double err[2];
    std::size_t tris[2];
    double hs[2] = {0.1, 0.05};
    for (int i = 0; i < 2; ++i) {
        auto s = make_setup(make_mesh(BodyCurve::circle(1), 16, hs[i]), 0.3, 0.2, 0.2);
        StreamSolution sol = solve(s);
        err[i] = relative_gradient_error(sol);
        tris[i] = s->mesh().triangles.size();
    }
    double order = std::log2(err[0] / err[1]);

    // Timing on a ~20k triangle mesh.
    auto big = make_mesh(BodyCurve::circle(1), 16, 0.042);
    auto t0 = std::chrono::steady_clock::now();
    solve(make_setup(big, 0.3, 0.2, 0.2));
    double secs = seconds_since(t0);

    bool pass = err[0] <= 0.05 && order >= 0.9 && secs <= 60;
    report(1, pass,
           fmt("rel L2 grad error %.4g (h=0.1, %zu tri), %.4g (h=0.05, %zu tri), order %.3f; "
               "solve on %zu tri took %.2f s",
               err[0], tris[0], err[1], tris[1], order, big->triangles.size(), secs));
}

void critical_anchor() {
    auto t0 = std::chrono::steady_clock::now();
    ContinuationOptions opt;
    CriticalResult c = find_critical_parameter(SweepAxis::Kappa2, 0.6, 0.02, make_mesh(BodyCurve::circle(1), 16, 0.1), opt);
    double secs = seconds_since(t0);
    bool pass = c.lo <= 0.8 && c.hi >= 0.8 && c.hi - c.lo <= 0.02 && secs <= 900;
    report(2, pass, fmt("bracket [%.6g, %.6g], width %.3g, %.1f s", c.lo, c.hi, c.hi - c.lo, secs));
}

void decay_exponent() {
    double slope[2];
    double R[2] = {32, 64};
    for (int i = 0; i < 2; ++i) {
        StreamSolution sol = solve(make_setup(make_mesh(kLobed, R[i], 0.1), 0.3, 0.2, 0.2));
        DecayFit fit = decay_slope(sol);
        slope[i] = fit.exact_match ? 0 : fit.slope;
    }
    bool window = slope[0] >= -2.4 && slope[0] <= -1.6;
    bool stable = std::abs(slope[1] - slope[0]) <= 0.2;
    report(3, window && stable,
           fmt("slope %.4f at R_out=32 (window [-2.4, -1.6] %s), %.4f at R_out=64 (change %.3f, %s)", slope[0],
               window ? "met" : "missed", slope[1], std::abs(slope[1] - slope[0]), stable ? "met" : "missed"));
}

void ode_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    GasModel gas(2, 0.1);
    double worst = 0;
    std::size_t min_samples = SIZE_MAX;
    for (int trial = 0; trial < 5; ++trial) {
        double k1, k2;
        do {
            k1 = std::abs(U(rng));
            k2 = U(rng);
        } while (k1 <= 0.01 || k1 * k1 + k2 * k2 >= 0.9);
        RadialReport rep = classify_radial(RadialBackground(gas, k1, k2), 50);
        // 500 evenly spaced samples along the integration.
        std::size_t n = rep.samples.size();
        min_samples = std::min(min_samples, n);
        for (int i = 0; i < 500 && n >= 500; ++i) {
            const MachSample& s = rep.samples[i * (n - 1) / 499];
            worst = std::max(worst, std::abs(s.Msq_ode - s.Msq_algebraic) / s.Msq_algebraic);
        }
    }
    double secs = seconds_since(t0);
    bool pass = min_samples >= 500 && worst <= 1e-6 && secs <= 5;
    report(4, pass, fmt("max rel error %.3g over 5 states x 500 radii, %.2f s", worst, secs));
}

void convexity() {
    auto s = make_setup(make_mesh(kLobed, 5.2, 0.25), 0.5, 0.4, 0.05);
    double lambda = s->gas().ellipticity_bounds().lambda;
    std::mt19937_64 rng(11);
    double worst = INFINITY;
    for (int trial = 0; trial < 100; ++trial) {
        double amp = trial % 2 ? 0.5 : 0.05;
        std::vector<double> u1 = random_state(*s, rng, amp), u2 = random_state(*s, rng, amp);
        std::vector<double> mid(u1.size()), diff(u1.size());
        for (std::size_t i = 0; i < u1.size(); ++i) {
            mid[i] = 0.5 * (u1[i] + u2[i]);
            diff[i] = u1[i] - u2[i];
        }
        double gap = functional_value(*s, u1) + functional_value(*s, u2) - 2 * functional_value(*s, mid);
        worst = std::min(worst, gap - 0.5 * lambda * dirichlet_energy(s->field(), diff));
    }
    report(5, worst >= -1e-10, fmt("min slack %.3g over 100 pairs (lambda %.4g)", worst, lambda));
}

void derivative_checks() {
    auto s = make_setup(make_mesh(kLobed, 5.2, 0.25), 0.4, 0.3, 0.1);
    std::mt19937_64 rng(13);
    std::normal_distribution<double> N;
    const double d = 1e-6;
    double gworst = 0, hworst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u = random_state(*s, rng, 0.05);
        Assembly a = assemble_functional(*s, u);
        Eigen::VectorXd x = s->dofs_from_nodal(u), fd(s->n_dofs()), v(s->n_dofs());
        for (int i = 0; i < s->n_dofs(); ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += d;
            xm[i] -= d;
            fd[i] = (functional_value(*s, s->nodal_from_dofs(xp)) - functional_value(*s, s->nodal_from_dofs(xm))) / (2 * d);
        }
        gworst = std::max(gworst, (fd - a.gradient).norm() / a.gradient.norm());
        for (int i = 0; i < v.size(); ++i) v[i] = N(rng);
        Eigen::VectorXd hfd = (assemble_functional(*s, s->nodal_from_dofs(x + d * v), false).gradient -
                               assemble_functional(*s, s->nodal_from_dofs(x - d * v), false).gradient) / (2 * d);
        Eigen::VectorXd hv = a.hessian * v;
        hworst = std::max(hworst, (hfd - hv).norm() / hv.norm());
    }
    report(6, gworst <= 1e-5 && hworst <= 1e-4,
           fmt("gradient rel error %.3g, Hessian-vector rel error %.3g over 20 states", gworst, hworst));
}

void truncation_removal() {
    ContinuationOptions opt;
    opt.verify_next = true;
    auto mesh = make_mesh(kLobed, 16 * kLobed.scale(), 0.1);
    double worst = 0;
    int checked = 0;
    for (auto [k1, k2] : {std::pair{0.3, 0.2}, {0.4, 0.6}, {0.6, 0.6}, {0.2, 0.8}}) {
        auto res = solve_with_truncation_removal(k1, k2, mesh, opt);
        if (!res.record.removed || !std::isfinite(res.record.next_eps_difference)) continue;
        worst = std::max(worst, res.record.next_eps_difference);
        ++checked;
    }
    report(7, checked > 0 && worst <= 1e-7,
           fmt("max energy-norm difference %.3g between consecutive removed levels (%d cases)", worst, checked));
}

void sonic_limit() {
    ContinuationOptions opt;
    double delta[2];
    double hs[2] = {0.1, 0.05};
    bool increasing = true, residuals = true;
    double final_q = 0, worst_res = 0;
    for (int i = 0; i < 2; ++i) {
        auto mesh = make_mesh(BodyCurve::circle(1), 16, hs[i]);
        CriticalResult c = find_critical_parameter(SweepAxis::Kappa2, 0.6, 0.02, mesh, opt);
        LimitStudy st = sonic_limit_study(SweepAxis::Kappa2, 0.6, c.lo, c.hi, 6, mesh, opt);
        delta[i] = 0;
        for (std::size_t j = 0; j < st.points.size(); ++j) {
            const LadderPoint& p = st.points[j];
            delta[i] = std::max(delta[i], p.delta_h);
            if (j > 0 && !(p.record.q_max > st.points[j - 1].record.q_max)) increasing = false;
            worst_res = std::max({worst_res, p.mass_residual, p.irrotational_residual});
            if (!(p.mass_residual <= 1e-6 && p.irrotational_residual <= 1e-6)) residuals = false;
        }
        if (i == 0) final_q = st.points.back().record.q_max;
    }
    bool halving = delta[1] <= 0.5 * delta[0];
    bool pass = increasing && final_q >= 0.97 && halving && residuals;
    report(8, pass,
           fmt("q_max increasing %s, final %.5f; delta_h %.3g (h=0.1) -> %.3g (h=0.05); max weak residual %.3g",
               increasing ? "yes" : "no", final_q, delta[0], delta[1], worst_res));
}

void conservation() {
    double worst = 0;
    std::string detail;
    for (const BodyCurve& c : {BodyCurve::circle(1), kLobed}) {
        StreamSolution sol = solve(make_setup(make_mesh(c, 16 * c.scale(), 0.05), 0.3, 0.2, 0.2));
        const RadialBackground& bg = sol.setup->background();
        double expected = 2 * std::numbers::pi * bg.rho0() * bg.kappa1();
        double flux = boundary_flux(sol);
        double rel = std::abs(flux - expected) / expected;
        worst = std::max(worst, rel);
        detail += fmt("%s%.6g vs %.6g", detail.empty() ? "flux " : "; ", flux, expected);
    }
    report(9, worst <= 0.02, detail + fmt(" (max rel deviation %.3g)", worst));
}

} // namespace

int main() {
    void (*criteria[])() = {radial_exactness, critical_anchor, decay_exponent, ode_oracle, convexity,
                            derivative_checks, truncation_removal, sonic_limit, conservation};
    int n = 1;
    for (auto* fn : criteria) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(n, false, std::string("exception: ") + e.what());
        }
        ++n;
    }
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
