#pragma once

#include <cmath>
#include <functional>

#include "varsolve/common.hpp"

namespace varsolve {

namespace detail {

template <class F>
double simpson(const F& f, double a, double fa, double fm, double fb, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth,
                            int forced, double& worst) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, fa, flm, fm, m);
    const double right = simpson(f, m, fm, frm, fb, b);
    const double err = (left + right - whole) / 15.0;
    // the first `forced` levels always split: a 5-point estimate of a long
    // oscillatory interval can agree with its refinement by accident
    if (forced <= 0 && (std::abs(err) <= tol || depth <= 0)) {
        if (depth <= 0) worst = std::max(worst, std::abs(err));
        return left + right + err;
    }
    if (depth <= 0) {
        worst = std::max(worst, std::abs(err));
        return left + right + err;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1,
                                forced - 1, worst) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1,
                                forced - 1, worst);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with interval bisection.
/// Throws NumericalError (carrying the achieved error estimate) when the
/// depth cap is hit before the local tolerance is met.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol = 1e-10,
                        int max_depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = detail::simpson(f, a, fa, fm, fb, b);
    double worst = 0.0;
    const double result = detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole,
                                                       abs_tol, max_depth, 8, worst);
    if (worst > abs_tol) {
        throw NumericalError("adaptive quadrature hit the depth cap; achieved error "
                             "estimate " + fmt17(worst),
                             worst);
    }
    return result;
}

} // namespace varsolve
