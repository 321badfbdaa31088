#pragma once

// Thermodynamic closures for a normalized polytropic gas, p = rho^gamma / gamma.
//
// Bernoulli:  q^2/2 + rho^(gamma-1)/(gamma-1) = (gamma+1)/(2(gamma-1)).
// With s = |grad psi|^2 = (rho q)^2 the subsonic branch rho = H(s) is the root
// in [1, rho_max] of  s/(2 rho^2) + rho^(gamma-1)/(gamma-1) = (gamma+1)/(2(gamma-1)).

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "types.hpp"

namespace spiralflow {

/// Value, first and second derivative of a scalar function of s.
struct Jet {
    double value;
    double d1;
    double d2;
};

struct FluxPotential {
    double F;   ///< F(s) = int_0^s dt / H~(t)
    double dF;  ///< F'(s) = 1 / H~(s)
    double d2F; ///< F''(s) = -H~'(s) / H~(s)^2
};

struct EllipticityBounds {
    double lambda;
    double Lambda;
};

enum class BlendKind { Quintic, MonotoneCubic };

class GasModel {
public:
    static constexpr double s_cap = 2.0;

    GasModel(double gamma, double eps) : gamma_(gamma), eps_(eps) {
        if (!(gamma > 1.0) || !std::isfinite(gamma))
            throw DomainError("GasModel: gamma must be > 1");
        if (!(eps > 0.0 && eps < 0.25))
            throw DomainError("GasModel: eps must lie in (0, 1/4)");

        bernoulli_ = (gamma_ + 1) / (2 * (gamma_ - 1));
        rho_max_ = std::pow((gamma_ + 1) / 2, 1 / (gamma_ - 1));

        s0_ = 1 - 2 * eps_;
        s1_ = 1 - eps_;
        build_blend();

        flux_s0_ = flux_untruncated(density_from_mass_flux(s0_));
        flux_s1_ = flux_s0_ + blend_integral(s1_);
        bounds_ = sample_bounds();
    }

    double gamma() const { return gamma_; }
    double eps() const { return eps_; }
    double stagnation_density() const { return rho_max_; }
    double blend_start() const { return s0_; }
    double blend_end() const { return s1_; }
    BlendKind blend_kind() const { return blend_kind_; }

    /// rho = g(q^2) from the closed-form Bernoulli law.
    double density_from_speed(double q2) const {
        double radicand = (gamma_ + 1 - (gamma_ - 1) * q2) / 2;
        if (q2 < 0 || radicand < 0) {
            std::ostringstream msg;
            msg << "density_from_speed: q^2 = " << q2 << " outside [0, "
                << (gamma_ + 1) / (gamma_ - 1) << "]";
            throw DomainError(msg.str());
        }
        return std::pow(radicand, 1 / (gamma_ - 1));
    }

    /// Sound speed squared c^2 = rho^(gamma-1).
    double sound_speed_sq(double rho) const { return std::pow(rho, gamma_ - 1); }

    /// H(s) on the subsonic branch, s in [0, 1].
    double density_from_mass_flux(double s) const {
        if (!(s >= 0.0) || s > 1.0) {
            std::ostringstream msg;
            msg << "density_from_mass_flux: s = " << s
                << " outside [0, 1]; use truncated_density";
            throw DomainError(msg.str());
        }
        if (s == 1.0) return 1.0;
        if (s == 0.0) return rho_max_;

        auto residual = [&](double rho) {
            return s / (2 * rho * rho) + std::pow(rho, gamma_ - 1) / (gamma_ - 1) - bernoulli_;
        };

        // residual(1) = (s - 1)/2 < 0 and residual(rho_max) > 0; residual increases on the bracket.
        double lo = 1.0, hi = rho_max_;
        double rho = rho_max_;
        for (int it = 0; it < 200; ++it) {
            double f = residual(rho);
            if (f == 0.0) return rho;
            if (f < 0) lo = rho; else hi = rho;

            double df = std::pow(rho, gamma_ - 2) - s / (rho * rho * rho);
            double next = rho - f / df;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);

            if (std::abs(next - rho) <= 4 * std::numeric_limits<double>::epsilon() * rho) {
                rho = next;
                break;
            }
            rho = next;
        }
        if (std::abs(residual(rho)) > 1e-12)
            throw ConsistencyError("density_from_mass_flux: root solve did not reach 1e-12");
        return rho;
    }

    /// H, H', H'' for s in [0, 1).
    Jet mass_flux_density_jet(double s) const {
        double rho = density_from_mass_flux(s);
        double D = std::pow(rho, gamma_ + 1) - s;
        double d1 = -rho / (2 * D);
        double dD = (gamma_ + 1) * std::pow(rho, gamma_) * d1 - 1;
        double d2 = -(d1 * D - rho * dD) / (2 * D * D);
        return {rho, d1, d2};
    }

    /// H~(s) and its first two derivatives; total on s >= 0.
    Jet truncated_density_jet(double s) const {
        if (s < 0) throw DomainError("truncated_density: s must be >= 0");
        if (s <= s0_) return mass_flux_density_jet(s);
        if (s >= s1_) return {density_end_, 0.0, 0.0};

        double w = s1_ - s0_;
        double t = (s - s0_) / w;
        double p = 0, dp = 0, d2p = 0;
        for (int k = 5; k >= 0; --k) {
            d2p = d2p * t + 2 * dp;
            dp = dp * t + p;
            p = p * t + blend_[k];
        }
        return {p, dp / w, d2p / (w * w)};
    }

    double truncated_density(double s) const { return truncated_density_jet(s).value; }

    FluxPotential flux_potential(double s) const {
        if (s < 0) throw DomainError("flux_potential: s must be >= 0");
        Jet h = truncated_density_jet(s);
        double F;
        if (s <= s0_)
            F = flux_untruncated(h.value);
        else if (s < s1_)
            F = flux_s0_ + blend_integral(s);
        else
            F = flux_s1_ + (s - s1_) / h.value;
        return {F, 1 / h.value, -h.d1 / (h.value * h.value)};
    }

    /// a_ij = (H~ delta_ij - 2 H~' p_i p_j) / H~^2, the principal part of div(grad psi / H~).
    Mat2 coefficient_matrix(const Vec2& grad) const {
        Jet h = truncated_density_jet(grad.squaredNorm());
        double inv = 1 / (h.value * h.value);
        double off = -2 * h.d1 * grad.x() * grad.y() * inv;
        Mat2 a;
        a << (h.value - 2 * h.d1 * grad.x() * grad.x()) * inv, off,
             off, (h.value - 2 * h.d1 * grad.y() * grad.y()) * inv;
        return a;
    }

    EllipticityBounds ellipticity_bounds() const { return bounds_; }

private:
    // F(s) for s <= 1-2eps, written in terms of rho = H(s).
    // Substituting t = s(rho) turns int dt/H into a polynomial in rho.
    double flux_untruncated(double rho) const {
        double k = 2 * (gamma_ + 1) / (gamma_ - 1);
        double drho = rho - rho_max_;
        double pow_diff = std::pow(rho_max_, gamma_) * std::expm1(gamma_ * std::log1p(drho / rho_max_));
        return k * (drho - pow_diff / gamma_);
    }

    double blend_integral(double s) const {
        using boost::math::quadrature::gauss;
        auto inv = [&](double x) { return 1 / truncated_density_jet(x).value; };
        return gauss<double, 30>::integrate(inv, s0_, s);
    }

    void build_blend() {
        Jet h0 = mass_flux_density_jet(s0_);
        double z0 = density_from_mass_flux(s1_);
        density_end_ = z0;
        double w = s1_ - s0_;
        double y0 = h0.value, m = h0.d1 * w, a = h0.d2 * w * w;

        double A = z0 - y0 - m - a / 2;
        double B = -m - a;
        double C = -a;
        blend_ = {y0, m, a / 2, 10 * A - 4 * B + C / 2, -15 * A + 7 * B - C, 6 * A - 3 * B + C / 2};
        blend_kind_ = BlendKind::Quintic;
        if (blend_monotone()) return;

        // Fritsch-Carlson limited cubic Hermite, C^1 at the junctions.
        double delta = z0 - y0;
        if (m / delta > 3) m = 3 * delta;
        blend_ = {y0, m, -3 * y0 - 2 * m + 3 * z0, 2 * y0 + m - 2 * z0, 0, 0};
        blend_kind_ = BlendKind::MonotoneCubic;
    }

    bool blend_monotone() const {
        constexpr int n = 4000;
        for (int i = 0; i < n; ++i) {
            double t = double(i) / n;
            double dp = 0;
            for (int k = 5; k >= 1; --k) dp = dp * t + k * blend_[k];
            if (!(dp < 0)) return false;
        }
        return true;
    }

    // Eigenvalues of a_ij depend on |grad|^2 only: 1/H~ across the gradient,
    // (H~ - 2 H~' s)/H~^2 along it.
    EllipticityBounds sample_bounds() const {
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        auto visit = [&](double s) {
            Jet h = truncated_density_jet(s);
            double across = 1 / h.value;
            double along = (h.value - 2 * h.d1 * s) / (h.value * h.value);
            lo = std::min({lo, across, along});
            hi = std::max({hi, across, along});
        };
        constexpr int n_plain = 10000, n_blend = 4000;
        for (int i = 0; i <= n_plain; ++i) visit(s0_ * i / n_plain);
        for (int i = 0; i <= n_blend; ++i) visit(s0_ + (s1_ - s0_) * i / n_blend);
        visit(s_cap);
        return {0.99 * lo, 1.01 * hi};
    }

    double gamma_;
    double eps_;
    double bernoulli_;
    double rho_max_;
    double s0_, s1_;
    double density_end_ = 1;
    std::array<double, 6> blend_{};
    BlendKind blend_kind_ = BlendKind::Quintic;
    double flux_s0_ = 0, flux_s1_ = 0;
    EllipticityBounds bounds_{};
};

} // namespace spiralflow
