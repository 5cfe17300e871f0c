#pragma once
/**
 * @file kernel.hpp
 * @brief Kernel equation solver and propagation-speed upper bound.
 *
 * The kernel set is the zero set of
 *
 *     K_D(rho, theta) = 1/Y_D(rho, theta) - A(rho),
 *     A(rho)          = tau + 2 v nu Xi_D(rho) / (1 - nu Psi_D(rho)).
 *
 * For each rho left of the pole (nu Psi_D(rho) = 1) there is exactly one
 * theta on the kernel, and the speed bound is the minimum of theta/rho over
 * that curve. Below nu < 1/V_D the minimum is finite; at and above it the
 * bound is infinite.
 */

#include "dtnspeed/specfun.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace dtnspeed {

/// Raised when nu >= 1/V_D where a finite pole is required.
class ThresholdExceeded : public DomainError {
  public:
    using DomainError::DomainError;
};

struct ModelParams {
    Dim d{2};
    double nu = 0.0;  ///< nodes per unit D-volume
    double v = 1.0;   ///< node speed
    double tau = 0.0; ///< direction-change rate

    void validate() const
    {
        if (!(nu >= 0.0) || !std::isfinite(nu))
            throw DomainError("model: density nu must be finite and >= 0");
        if (!(v > 0.0) || !std::isfinite(v))
            throw DomainError("model: speed v must be finite and > 0");
        if (!(tau >= 0.0) || !std::isfinite(tau))
            throw DomainError("model: direction-change rate tau must be finite and >= 0");
    }
};

struct KernelPoint {
    double rho = 0.0;   ///< inverse distance
    double theta = 0.0; ///< inverse time
};

enum class BoundStatus { Finite, Unbounded, DegenerateZeroDensity };

constexpr std::string_view to_string(BoundStatus s) noexcept
{
    switch (s) {
    case BoundStatus::Finite: return "Finite";
    case BoundStatus::Unbounded: return "Unbounded";
    default: return "DegenerateZeroDensity";
    }
}

/**
 * Result of the min theta/rho search.
 *
 * Finite: speed == argmin.theta / argmin.rho.
 * Unbounded: nu >= 1/V_D, slowness reported as 0.
 * DegenerateZeroDensity: nu == 0, the infimum is a limit. With tau == 0 the
 * speed is v (rho -> infinity); with tau > 0 it is 0 (rho -> 0).
 */
struct SpeedBound {
    BoundStatus status = BoundStatus::Unbounded;
    std::optional<double> speed;
    std::optional<KernelPoint> argmin;
    double slowness = 0.0;

    bool finite() const noexcept { return status == BoundStatus::Finite; }
};

// ---------------------------------------------------------------------------

/// Excess coupling 2 v nu Xi_D / (1 - nu Psi_D), i.e. A(rho) - tau.
inline double coupling_excess(const ModelParams& p, double rho)
{
    if (p.nu == 0.0)
        return 0.0;
    const double denom = 1.0 - p.nu * psi(p.d, rho);
    if (!(denom > 0.0))
        throw DomainError("coupling: rho is beyond the kernel pole (1 - nu Psi_D(rho) <= 0)");
    return 2.0 * p.v * p.nu * xi(p.d, rho) / denom;
}

/// A(rho) = tau + 2 v nu Xi_D(rho) / (1 - nu Psi_D(rho)); the kernel reads 1/Y_D = A.
inline double coupling(const ModelParams& p, double rho)
{
    p.validate();
    if (!(rho >= 0.0))
        throw DomainError("coupling: rho must be >= 0");
    return p.tau + coupling_excess(p, rho);
}

/**
 * The unique rho* > 0 with nu Psi_D(rho*) = 1, found by bisection to relative
 * 1e-15. The lower bracket end is returned, so nu Psi_D < 1 there. Returns
 * +infinity when nu == 0.
 */
inline double pole_rho(const ModelParams& p)
{
    p.validate();
    if (p.nu == 0.0)
        return std::numeric_limits<double>::infinity();
    if (p.nu >= density_threshold(p.d))
        throw ThresholdExceeded("pole_rho: density at or above the threshold 1/V_D");

    double lo = 0.0;
    double hi = 1.0;
    while (p.nu * psi(p.d, hi) < 1.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > detail::kMaxArgument)
            throw DomainError("pole_rho: pole lies beyond the special-function range");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (p.nu * psi(p.d, mid) < 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

namespace detail {

// t coth(t) - 1, accurate for small t.
inline double t_coth_t_minus_one(double t)
{
    if (t < 1e-2) {
        const double t2 = t * t;
        return t2 / 3.0 - t2 * t2 / 45.0 + 2.0 * t2 * t2 * t2 / 945.0;
    }
    if (t > 20.0)
        return t - 1.0;
    return t / std::tanh(t) - 1.0;
}

} // namespace detail

/**
 * theta on the kernel for a given rho in (0, pole_rho).
 *
 * With x = tau + theta the kernel 1/Y_D(x) = A inverts in closed form:
 *   D=1: x^2 - A x - (rho v)^2 = 0;  D=2: x^2 = A^2 + (rho v)^2;
 *   D=3: x = rho v coth(rho v / A).
 * Each branch is rearranged so that theta = x - tau is formed without
 * cancelling against tau.
 */
inline double theta_of_rho(const ModelParams& p, double rho)
{
    p.validate();
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw DomainError("theta_of_rho: rho must be finite and > 0");
    const double excess = coupling_excess(p, rho);
    const double a = p.tau + excess;
    const double rv = rho * p.v;
    switch (p.d.value()) {
    case 1: {
        const double root = std::sqrt(a * a + 4.0 * rv * rv);
        // x - tau = (excess + root - tau) / 2
        const double root_minus_tau = (excess * (2.0 * p.tau + excess) + 4.0 * rv * rv) / (root + p.tau);
        return 0.5 * (excess + root_minus_tau);
    }
    case 2: {
        const double root = std::sqrt(a * a + rv * rv);
        return (excess * (2.0 * p.tau + excess) + rv * rv) / (root + p.tau);
    }
    default: {
        if (a == 0.0)
            return rv; // nu = 0, tau = 0: x -> rho v from above
        // x = A t coth(t), t = rho v / A
        const double t = rv / a;
        return excess + a * detail::t_coth_t_minus_one(t);
    }
    }
}

/// K_D(rho, theta) = 1/Y_D(rho, theta) - A(rho); zero on the kernel.
inline double kernel_residual(const ModelParams& p, KernelPoint pt)
{
    p.validate();
    if (!(pt.rho > 0.0))
        throw DomainError("kernel_residual: rho must be > 0");
    return inverse_y(p.d, pt.rho, pt.theta, p.v, p.tau) - coupling(p, pt.rho);
}

namespace detail {

struct Minimum {
    double arg;
    double value;
};

/**
 * Minimizes f over [lo, hi] by a log-spaced scan followed by golden-section
 * refinement of the bracketing triple. While the scan minimum sits on the
 * left edge the window is extended downwards.
 */
template <typename F>
Minimum log_scan_golden(F&& f, double lo, double hi, int points = 2000, double rel_tol = 1e-10)
{
    std::vector<double> grid(static_cast<std::size_t>(points));
    std::vector<double> vals(grid.size());
    std::size_t best = 0;
    for (int shift = 0; shift < 8; ++shift) {
        const double llo = std::log(lo);
        const double lhi = std::log(hi);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double frac = static_cast<double>(i) / static_cast<double>(points - 1);
            grid[i] = i + 1 == grid.size() ? hi : std::exp(llo + frac * (lhi - llo));
            vals[i] = f(grid[i]);
        }
        best = 0;
        for (std::size_t i = 1; i < vals.size(); ++i)
            if (vals[i] < vals[best])
                best = i;
        if (best != 0)
            break;
        lo *= 1e-3;
    }

    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[best + 1 == grid.size() ? best : best + 1];
    constexpr double invphi = 0.6180339887498948482;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && (b - a) > rel_tol * 0.5 * (a + b); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    Minimum m{0.5 * (a + b), 0.0};
    m.value = f(m.arg);
    if (vals[best] < m.value) {
        m.arg = grid[best];
        m.value = vals[best];
    }
    return m;
}

} // namespace detail

/// min over the kernel of theta/rho.
inline SpeedBound speed_bound(const ModelParams& p)
{
    p.validate();
    SpeedBound out;
    if (p.nu >= density_threshold(p.d)) {
        out.status = BoundStatus::Unbounded;
        out.slowness = 0.0;
        return out;
    }
    if (p.nu == 0.0) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        out.status = BoundStatus::DegenerateZeroDensity;
        if (p.tau == 0.0) {
            out.speed = p.v;
            out.argmin = KernelPoint{inf, inf};
            out.slowness = 1.0 / p.v;
        } else {
            out.speed = 0.0;
            out.argmin = KernelPoint{0.0, 0.0};
            out.slowness = inf;
        }
        return out;
    }

    const double pole = pole_rho(p);
    // within a few ulps of the pole 1 - nu Psi_D rounds to <= 0; theta is +inf there
    auto ratio = [&](double rho) {
        if (!(p.nu * psi(p.d, rho) < 1.0))
            return std::numeric_limits<double>::infinity();
        return theta_of_rho(p, rho) / rho;
    };
    const auto m = detail::log_scan_golden(ratio, 1e-6 * pole, (1.0 - 1e-9) * pole);

    const KernelPoint at{m.arg, theta_of_rho(p, m.arg)};
    out.status = BoundStatus::Finite;
    out.argmin = at;
    out.speed = at.theta / at.rho;
    out.slowness = 1.0 / *out.speed;
    return out;
}

/// (nu, slowness) per density; slowness is 0 where the bound is unbounded.
inline std::vector<std::pair<double, double>> slowness_sweep(Dim d, double v, double tau,
                                                             const std::vector<double>& nu_grid)
{
    std::vector<std::pair<double, double>> out;
    out.reserve(nu_grid.size());
    for (double nu : nu_grid)
        out.emplace_back(nu, speed_bound(ModelParams{d, nu, v, tau}).slowness);
    return out;
}

/**
 * Sparse random-walk estimate v sqrt(2 nu H(0) / tau), H(0) = 4 pi v / (1 - pi nu).
 * Two-dimensional, tau > 0.
 */
inline double asymptotic_speed_random_walk(const ModelParams& p)
{
    p.validate();
    if (p.d.value() != 2)
        throw DomainError("asymptotic_speed_random_walk: only defined for D = 2");
    if (!(p.tau > 0.0))
        throw DomainError("asymptotic_speed_random_walk: requires tau > 0");
    if (p.nu >= density_threshold(p.d))
        throw ThresholdExceeded("asymptotic_speed_random_walk: density at or above 1/pi");
    const double h0 = 4.0 * std::numbers::pi * p.v / (1.0 - std::numbers::pi * p.nu);
    return p.v * std::sqrt(2.0 * p.nu * h0 / p.tau);
}

/**
 * Billiard (tau = 0) form: v sqrt(1 + (H1(rho0)/rho0)^2) where
 * H1(rho) = 4 pi nu I0(rho) / (1 - 2 pi nu I1(rho)/rho) and rho0 minimizes H1/rho.
 */
inline double asymptotic_speed_billiard(const ModelParams& p)
{
    p.validate();
    if (p.d.value() != 2)
        throw DomainError("asymptotic_speed_billiard: only defined for D = 2");
    if (p.tau != 0.0)
        throw DomainError("asymptotic_speed_billiard: requires tau = 0");
    if (p.nu >= density_threshold(p.d))
        throw ThresholdExceeded("asymptotic_speed_billiard: density at or above 1/pi");
    if (p.nu == 0.0)
        return p.v;

    constexpr double pi = std::numbers::pi;
    auto h1_over_rho = [&](double rho) {
        const double h1 = 4.0 * pi * p.nu * bessel_i0(rho) / (1.0 - 2.0 * pi * p.nu * bessel_i1_over_x(rho));
        return h1 / rho;
    };
    const double pole = pole_rho(p);
    const auto m = detail::log_scan_golden(h1_over_rho, 1e-6 * pole, (1.0 - 1e-9) * pole);
    return p.v * std::sqrt(1.0 + m.value * m.value);
}

} // namespace dtnspeed
