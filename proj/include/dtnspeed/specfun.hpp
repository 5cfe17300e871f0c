#pragma once
/**
 * @file specfun.hpp
 * @brief Special functions of the journey Laplace transforms.
 *
 * Modified Bessel functions I0/I1 by power series, and the dimension-indexed
 * transforms Xi_D (unit sphere), Psi_D (unit ball) and Y_D (motion segment)
 * for D = 1, 2, 3. Everything here is a pure function.
 */

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dtnspeed {

/// Raised when an argument lies outside the domain of a numerical routine.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Spatial dimension of the network domain; only 1, 2 and 3 exist.
class Dim {
  public:
    constexpr explicit Dim(int value) : value_(value)
    {
        if (value < 1 || value > 3)
            throw DomainError("dimension must be 1, 2 or 3, got " + std::to_string(value));
    }

    constexpr int value() const noexcept { return value_; }

    friend constexpr bool operator==(Dim, Dim) = default;

  private:
    int value_;
};

/// Volume of the unit communication ball: 2, pi, 4pi/3.
constexpr double unit_ball_volume(Dim d) noexcept
{
    switch (d.value()) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    default: return 4.0 * std::numbers::pi / 3.0;
    }
}

/// Density at which the propagation-speed bound diverges.
constexpr double density_threshold(Dim d) noexcept { return 1.0 / unit_ball_volume(d); }

namespace detail {

inline constexpr double kMaxArgument = 700.0;
inline constexpr int kMaxSeriesTerms = 1000;

inline void check_argument(double x, const char* what)
{
    if (!(x >= 0.0) || x > kMaxArgument)
        throw DomainError(std::string(what) + ": argument must lie in [0, 700], got " +
                          std::to_string(x));
}

// Sum_{k>=0} (x/2)^{2k} / (k! (k+order)!) scaled by (x/2)^order, positive terms only.
inline double bessel_series(double x, int order)
{
    const double q = 0.25 * x * x;
    double term = 1.0;
    for (int j = 1; j <= order; ++j)
        term *= 0.5 * x / j;
    double sum = term;
    for (int k = 1; k < kMaxSeriesTerms; ++k) {
        term *= q / (static_cast<double>(k) * (k + order));
        sum += term;
        if (term < 1e-16 * sum)
            break;
    }
    return sum;
}

} // namespace detail

/// Modified Bessel function I0 on [0, 700].
inline double bessel_i0(double x)
{
    detail::check_argument(x, "bessel_i0");
    return detail::bessel_series(x, 0);
}

/// Modified Bessel function I1 on [0, 700].
inline double bessel_i1(double x)
{
    detail::check_argument(x, "bessel_i1");
    return detail::bessel_series(x, 1);
}

/// I1(x)/x without the division, so x = 0 is regular.
inline double bessel_i1_over_x(double x)
{
    detail::check_argument(x, "bessel_i1_over_x");
    const double q = 0.25 * x * x;
    double term = 0.5;
    double sum = term;
    for (int k = 1; k < detail::kMaxSeriesTerms; ++k) {
        term *= q / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (term < 1e-16 * sum)
            break;
    }
    return sum;
}

/**
 * Xi_D(rho): Laplace transform of a uniform unit vector, per unit density.
 *   D=1: 2 cosh(rho);  D=2: 2 pi I0(rho);  D=3: 4 pi sinh(rho)/rho.
 */
inline double xi(Dim d, double rho)
{
    detail::check_argument(rho, "xi");
    constexpr double pi = std::numbers::pi;
    switch (d.value()) {
    case 1: return 2.0 * std::cosh(rho);
    case 2: return 2.0 * pi * detail::bessel_series(rho, 0);
    default:
        if (rho < 1e-4)
            return 4.0 * pi * (1.0 + rho * rho / 6.0 + rho * rho * rho * rho / 120.0);
        return 4.0 * pi * std::sinh(rho) / rho;
    }
}

/**
 * Psi_D(rho): Laplace transform of a point uniform in the unit ball.
 *   D=1: 2 sinh(rho)/rho;  D=2: (2 pi/rho) I1(rho);
 *   D=3: (4 pi/rho^3)(rho cosh(rho) - sinh(rho)).
 * Psi_D(0) = V_D.
 */
inline double psi(Dim d, double rho)
{
    detail::check_argument(rho, "psi");
    constexpr double pi = std::numbers::pi;
    const double r2 = rho * rho;
    switch (d.value()) {
    case 1:
        if (rho < 1e-4)
            return 2.0 * (1.0 + r2 / 6.0 + r2 * r2 / 120.0);
        return 2.0 * std::sinh(rho) / rho;
    case 2: return 2.0 * pi * bessel_i1_over_x(rho);
    default: {
        if (rho >= 1.0)
            return 4.0 * pi / (r2 * rho) * (rho * std::cosh(rho) - std::sinh(rho));
        // Sum_{k>=1} 2k rho^{2k-2} / (2k+1)!
        double power = 1.0;
        double factorial = 6.0;
        double sum = 0.0;
        for (int k = 1; k < 40; ++k) {
            const double term = 2.0 * k * power / factorial;
            sum += term;
            if (term < 1e-17 * sum)
                break;
            power *= r2;
            factorial *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
        }
        return 4.0 * pi * sum;
    }
    }
}

/**
 * Y_D(rho, theta): Laplace transform of a motion segment at speed v with
 * direction-change rate tau. Requires tau + theta > rho v.
 */
inline double y(Dim d, double rho, double theta, double v, double tau)
{
    const double x = tau + theta;
    const double rv = rho * v;
    if (!(rho >= 0.0) || !(x > rv))
        throw DomainError("y: requires tau + theta > rho v (outside the convergence region)");
    switch (d.value()) {
    case 1: return x / ((x - rv) * (x + rv));
    case 2: return 1.0 / std::sqrt((x - rv) * (x + rv));
    default:
        if (rv < 1e-8)
            return 1.0 / x;
        // (1/(2 rv)) log((x+rv)/(x-rv)) == atanh(rv/x)/rv
        return std::atanh(rv / x) / rv;
    }
}

/// 1/Y_D(rho, theta), evaluated without forming Y_D first.
inline double inverse_y(Dim d, double rho, double theta, double v, double tau)
{
    const double x = tau + theta;
    const double rv = rho * v;
    if (!(rho >= 0.0) || !(x > rv))
        throw DomainError("inverse_y: requires tau + theta > rho v (outside the convergence region)");
    switch (d.value()) {
    case 1: return (x - rv) * (x + rv) / x;
    case 2: return std::sqrt((x - rv) * (x + rv));
    default:
        if (rv < 1e-8)
            return x;
        return rv / std::atanh(rv / x);
    }
}

} // namespace dtnspeed
