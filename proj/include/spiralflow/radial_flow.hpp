#pragma once

// Radially symmetric spiral flows outside the unit disk.
//
// Mass and angular momentum give r rho_b U1 = rho0 kappa1 and r U2 = kappa2;
// rho_b then follows from Bernoulli on the branch with radial Mach number below one.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"
#include "gas_model.hpp"
#include "types.hpp"

namespace spiralflow {

struct RadialState {
    double r;
    double rho_b;
    double U1;
    double U2;
    double M1sq;
    double M2sq;
};

struct MachRates {
    double dM1sq;
    double dM2sq;
    double dMsq;
};

/// Right-hand sides of the squared-Mach-number system along r.
inline MachRates mach_rhs(double gamma, double r, double M1sq, double M2sq) {
    double denom = 1 - M1sq;
    if (std::abs(denom) < 1e-12) throw DomainError("mach_rhs: sonic singularity M1^2 = 1");
    double Msq = M1sq + M2sq;
    double rd = r * denom;
    return {
        -(2 * (1 + M2sq) + (gamma - 1) * Msq) * M1sq / rd,
        -(2 * (1 - M1sq) + (gamma - 1) * Msq) * M2sq / rd,
        -((gamma - 1) * Msq + 2) * Msq / rd,
    };
}

class RadialBackground {
public:
    RadialBackground(const GasModel& gas, double kappa1, double kappa2)
        : gas_(gas), kappa1_(kappa1), kappa2_(kappa2) {
        if (!(kappa1 > 0)) throw DomainError("RadialBackground: kappa1 must be > 0");
        rho0_ = gas_.density_from_speed(kappa1 * kappa1 + kappa2 * kappa2);
        mass_flux_ = rho0_ * kappa1_;
    }

    const GasModel& gas() const { return gas_; }
    double kappa1() const { return kappa1_; }
    double kappa2() const { return kappa2_; }
    double rho0() const { return rho0_; }
    double boundary_speed_sq() const { return kappa1_ * kappa1_ + kappa2_ * kappa2_; }
    bool uniformly_subsonic() const { return boundary_speed_sq() < 1; }

    RadialState radial_state(double r) const {
        if (r < 1 - 1e-12) throw DomainError("radial_state: r must be >= 1");
        double g = gas_.gamma();
        double m = mass_flux_ / r;
        double rhs = (g + 1) / (2 * (g - 1)) - kappa2_ * kappa2_ / (2 * r * r);
        auto residual = [&](double rho) {
            return m * m / (2 * rho * rho) + std::pow(rho, g - 1) / (g - 1) - rhs;
        };

        // Sonic radial point rho^(gamma+1) = m^2 minimizes the residual.
        double lo = std::pow(m, 2 / (g + 1));
        if (rhs <= 0 || residual(lo) > 0) {
            std::ostringstream msg;
            msg << "radial_state: no subsonic root at r = " << r << " (kappa1^2+kappa2^2 = "
                << boundary_speed_sq() << ")";
            throw RegimeError(msg.str());
        }
        double hi = std::pow(rhs * (g - 1), 1 / (g - 1));
        if (hi > lo && r == 1.0 && !(rho0_ > lo)) {
            throw RegimeError("radial_state: boundary state is radially supersonic");
        }

        double rho = hi;
        for (int it = 0; it < 200; ++it) {
            double f = residual(rho);
            if (f == 0) break;
            if (f < 0) lo = rho; else hi = rho;
            double df = std::pow(rho, g - 2) - m * m / (rho * rho * rho);
            double next = rho - f / df;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - rho) <= 4 * std::numeric_limits<double>::epsilon() * rho) {
                rho = next;
                break;
            }
            rho = next;
        }

        double c2 = gas_.sound_speed_sq(rho);
        double U1 = m / rho, U2 = kappa2_ / r;
        return {r, rho, U1, U2, U1 * U1 / c2, U2 * U2 / c2};
    }

    double density(double r) const { return radial_state(r).rho_b; }

    /// psi20(r) = -kappa2 int_1^r rho_b(s)/s ds, integrated in t = log s.
    double psi20(double r) const {
        if (r < 1 - 1e-12) throw DomainError("psi20: r must be >= 1");
        if (kappa2_ == 0 || r <= 1) return 0;
        using boost::math::quadrature::gauss_kronrod;
        auto f = [&](double t) { return density(std::exp(t)); };
        double err = 0;
        double integral = gauss_kronrod<double, 15>::integrate(f, 0.0, std::log(r), 15, 1e-12, &err);
        return -kappa2_ * integral;
    }

    /// Background velocity u0 at x.
    Vec2 velocity(const Vec2& x) const {
        double r2 = x.squaredNorm();
        double r = std::sqrt(r2);
        if (r < 1 - 1e-12) throw DomainError("velocity: |x| must be >= 1");
        double rho = density(std::max(r, 1.0));
        double a = mass_flux_ / rho;
        return Vec2((a * x.x() - kappa2_ * x.y()) / r2, (a * x.y() + kappa2_ * x.x()) / r2);
    }

    /// grad psi0 = (-rho_b u02, rho_b u01); single valued although psi10 is not.
    Vec2 grad_psi0(const Vec2& x) const {
        double r2 = x.squaredNorm();
        double r = std::sqrt(r2);
        if (r < 1 - 1e-12) throw DomainError("grad_psi0: |x| must be >= 1");
        double rho = density(std::max(r, 1.0));
        return Vec2(-(mass_flux_ * x.y() + rho * kappa2_ * x.x()) / r2,
                    (mass_flux_ * x.x() - rho * kappa2_ * x.y()) / r2);
    }

private:
    GasModel gas_;
    double kappa1_;
    double kappa2_;
    double rho0_;
    double mass_flux_;
};

enum class RadialRegime { UniformlySubsonic, SmoothTransonic, OutsideScope };

inline const char* to_string(RadialRegime r) {
    switch (r) {
    case RadialRegime::UniformlySubsonic: return "UniformlySubsonic";
    case RadialRegime::SmoothTransonic: return "SmoothTransonic";
    default: return "OutsideScope";
    }
}

struct MachSample {
    double r;
    double Msq_ode;
    double Msq_algebraic;
};

struct RadialReport {
    RadialRegime regime;
    double kappa_sq;
    double M1sq_boundary = 0;
    double max_Msq = 0;
    double argmax_r = 1;
    double max_rel_error = 0;
    std::string note;
    std::vector<MachSample> samples;
};

/// Classify the radial flow and integrate the Mach system as evidence, checking
/// every RK4 step against the algebraic state.
inline RadialReport classify_radial(const RadialBackground& bg, double r_max) {
    if (!(r_max > 1)) throw DomainError("classify_radial: r_max must be > 1");
    RadialReport rep{};
    double k1sq = bg.kappa1() * bg.kappa1();
    rep.kappa_sq = bg.boundary_speed_sq();

    if (k1sq >= 1 || std::abs(rep.kappa_sq - 1) <= 1e-12) {
        rep.regime = RadialRegime::OutsideScope;
        rep.note = k1sq >= 1 ? "kappa1^2 >= 1 is not covered" : "sonic at the boundary";
        return rep;
    }
    rep.regime = rep.kappa_sq < 1 ? RadialRegime::UniformlySubsonic : RadialRegime::SmoothTransonic;

    double c2 = bg.gas().sound_speed_sq(bg.rho0());
    rep.M1sq_boundary = k1sq / c2;
    if (rep.M1sq_boundary >= 1) {
        rep.regime = RadialRegime::OutsideScope;
        rep.note = "radially supersonic at the boundary";
        return rep;
    }

    double gamma = bg.gas().gamma();
    double r = 1;
    double a = rep.M1sq_boundary;
    double b = bg.kappa2() * bg.kappa2() / c2;

    auto record = [&](double rr, double m1, double m2) {
        RadialState st = bg.radial_state(rr);
        double alg = st.M1sq + st.M2sq;
        double ode = m1 + m2;
        double rel = std::abs(ode - alg) / std::max(alg, std::numeric_limits<double>::min());
        rep.max_rel_error = std::max(rep.max_rel_error, rel);
        if (rel > 1e-6) {
            std::ostringstream msg;
            msg << "classify_radial: ODE and algebraic M^2 disagree at r = " << rr
                << " (rel " << rel << ")";
            throw ConsistencyError(msg.str());
        }
        if (alg > rep.max_Msq) {
            rep.max_Msq = alg;
            rep.argmax_r = rr;
        }
        rep.samples.push_back({rr, ode, alg});
    };
    record(r, a, b);

    auto f = [&](double rr, double m1, double m2) {
        MachRates d = mach_rhs(gamma, rr, m1, m2);
        return std::pair{d.dM1sq, d.dM2sq};
    };
    while (r < r_max) {
        double h = std::min(1e-3 * r, r_max - r);
        auto [k1a, k1b] = f(r, a, b);
        auto [k2a, k2b] = f(r + h / 2, a + h / 2 * k1a, b + h / 2 * k1b);
        auto [k3a, k3b] = f(r + h / 2, a + h / 2 * k2a, b + h / 2 * k2b);
        auto [k4a, k4b] = f(r + h, a + h * k3a, b + h * k3b);
        a += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
        b += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
        r = (r_max - r <= h) ? r_max : r + h;
        record(r, a, b);
    }
    return rep;
}

} // namespace spiralflow
