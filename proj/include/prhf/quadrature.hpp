#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace prhf {

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth, int& evals, int max_evals) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    evals += 2;
    const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || evals > max_evals || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, evals, max_evals) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, evals, max_evals);
}

} // namespace detail

inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol, int max_evals = 200000) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    int evals = 3;
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    return detail::adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48, evals, max_evals);
}

/// Numerical check of 1/sqrt(x) = (1/pi) Int_0^inf dt / ((x+t) sqrt(t)):
/// substitution t = u^2 gives (2/pi) Int_0^inf du / (x + u^2), evaluated by
/// adaptive quadrature on [0, U] plus the analytic tail atan(sqrt(x)/U)/sqrt(x).
inline double sqrt_integral_formula(double x, int quad_points = 200000) {
    if (!(x > 0)) throw std::invalid_argument("sqrt_integral_formula: x > 0 required");
    const double U = 1e4 * std::sqrt(x);
    const double core = integrate_adaptive([x](double u) { return 1.0 / (x + u * u); }, 0.0, U,
                                           1e-12 / std::sqrt(x), quad_points);
    const double tail = std::atan(std::sqrt(x) / U) / std::sqrt(x);
    const double pi = 3.14159265358979323846;
    return 2.0 / pi * (core + tail);
}

} // namespace prhf
