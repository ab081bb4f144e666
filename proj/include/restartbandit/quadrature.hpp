#pragma once

#include <cmath>
#include <string>

#include "restartbandit/core.hpp"

namespace restartbandit {

namespace detail {

// Subdivision levels always taken before the error estimate is trusted.
inline constexpr int kForcedLevels = 4;

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, double root_tol, int level, int max_level, bool& failed) {
    if (failed) return 0.0;
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    if (!std::isfinite(flm) || !std::isfinite(frm)) {
        failed = true;
        return NAN;
    }
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (level >= kForcedLevels && std::fabs(diff) <= 15.0 * tol) {
        return left + right + diff / 15.0;
    }
    if (level >= max_level) {
        // A segment this narrow sits on an integrable endpoint singularity;
        // it only fails when its own error exceeds the global budget.
        if (std::fabs(diff) > 15.0 * root_tol) failed = true;
        return left + right + diff / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, root_tol, level + 1, max_level, failed) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, root_tol, level + 1, max_level, failed);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
/// Throws QuadratureError if the integrand is not finite or the recursion
/// limit is hit before the tolerance is met.
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-9, int max_level = 48) {
    if (!(a < b)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) {
        throw QuadratureError("integrand is not finite on [" + format_double(a) + ", " + format_double(b) + "]");
    }
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    bool failed = false;
    const double result = detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, tol, 0, max_level, failed);
    if (!std::isfinite(result)) {
        throw QuadratureError("integrand is not finite on [" + format_double(a) + ", " + format_double(b) + "]");
    }
    if (failed) {
        throw QuadratureError("adaptive Simpson did not converge on [" + format_double(a) + ", " +
                              format_double(b) + "]");
    }
    return result;
}

} // namespace restartbandit
