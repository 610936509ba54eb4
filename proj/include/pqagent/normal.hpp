#pragma once

#include <cmath>
#include <numbers>

#include "pqagent/error.hpp"

namespace pqagent {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

/// Upper tail P(N > z) of the standard normal.
inline double q_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

namespace detail {

// Acklam's rational approximation, relative error about 1.2e-9.
inline double acklam_quantile(double u) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (u < p_low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Inverse of normal_cdf on (0, 1).
///
/// The rational starting point is polished with Halley steps against erfc, which
/// brings the result to full double precision away from the extreme tails.
inline double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("normal_quantile: argument must lie in (0, 1)");
    }
    double x = detail::acklam_quantile(u);
    for (int it = 0; it < 2; ++it) {
        // Residual in whichever tail keeps relative precision.
        const double e = (x < 0.0) ? normal_cdf(x) - u : (1.0 - u) - q_tail(x);
        const double t = e / normal_pdf(x);
        x -= t / (1.0 + 0.5 * x * t);
    }
    return x;
}

}  // namespace pqagent
