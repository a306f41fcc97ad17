#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace entroport {

namespace detail {

inline double simpson_panel(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double& fm) {
    const double m = 0.5 * (a + b);
    fm = f(m);
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double fa, double b, double fb,
                                   double whole, double fm, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    double flm = 0.0, frm = 0.0;
    const double left = simpson_panel(f, a, fa, m, fm, flm);
    const double right = simpson_panel(f, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, left, flm, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, right, frm, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson on [a, b].
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-11, int max_depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    double fm = 0.0;
    const double whole = detail::simpson_panel(f, a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, whole, fm, tol, max_depth);
}

// Integrate piecewise, splitting at the given interior breakpoints.
inline double integrate_piecewise(const std::function<double(double)>& f,
                                  double a, double b,
                                  const std::vector<double>& breakpoints,
                                  double tol = 1e-11) {
    std::vector<double> cuts;
    cuts.push_back(a);
    for (double c : breakpoints) {
        if (c > a && c < b) cuts.push_back(c);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += integrate(f, cuts[i], cuts[i + 1], tol);
    }
    return total;
}

} // namespace entroport
