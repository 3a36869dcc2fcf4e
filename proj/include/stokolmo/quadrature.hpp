#pragma once

#include <algorithm>
#include <cmath>

namespace stokolmo {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // accumulated |S2 - S1| / 15 over accepted intervals
};

namespace detail {

template <class F>
void simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth,
                  QuadratureResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error += std::abs(delta) / 15.0;
        return;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// Adaptive Simpson quadrature with Richardson correction. Stops refining an
/// interval when its estimated error is below max(abs_tol, rel_tol * |first estimate|)
/// split proportionally to the interval length.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0, int max_depth = 40) {
    QuadratureResult out;
    if (a == b) return out;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
    detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, out);
    return out;
}

}  // namespace stokolmo
