#pragma once

#include <cmath>
#include <functional>

namespace sbalc {

namespace detail {

inline double adaptive_simpson_step(const std::function<double(double)>& f,
                                    double a, double b, double fa, double fm,
                                    double fb, double whole, double tol,
                                    int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature with an initial uniform split so that
/// narrow peaks inside a wide interval are not missed.
inline double adaptive_quadrature(const std::function<double(double)>& f, double a,
                                  double b, double rel_tol = 1e-8,
                                  int initial_panels = 64, int max_depth = 48) {
    double h = (b - a) / initial_panels;
    // first pass: crude total to set the absolute tolerance scale
    double crude = 0.0;
    for (int i = 0; i < initial_panels; ++i) {
        double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        crude += h / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1));
    }
    double abs_tol = rel_tol * std::max(std::abs(crude), 1e-300);
    double total = 0.0;
    for (int i = 0; i < initial_panels; ++i) {
        double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        double f0 = f(x0), fm = f(xm), f1 = f(x1);
        double whole = h / 6.0 * (f0 + 4.0 * fm + f1);
        total += detail::adaptive_simpson_step(f, x0, x1, f0, fm, f1, whole,
                                               abs_tol / initial_panels, max_depth);
    }
    return total;
}

} // namespace sbalc
