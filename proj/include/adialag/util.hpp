#ifndef ADIALAG_UTIL_HPP
#define ADIALAG_UTIL_HPP

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "adialag/types.hpp"

namespace adialag {

// Central difference with one Richardson step, O(h^4). Works for any type with
// +,-,* double (VecX, MatX, Complex, Tensor3, ...).
template <class F>
auto richardson_d1(F&& f, double h) {
    auto coarse = (f(h) - f(-h)) * (1.0 / (2.0 * h));
    auto fine = (f(h / 2) - f(-h / 2)) * (1.0 / h);
    return (4.0 * fine - coarse) * (1.0 / 3.0);
}

template <class F>
auto central_d1(F&& f, double h) {
    return (f(h) - f(-h)) * (1.0 / (2.0 * h));
}

// Second derivative along one direction, Richardson-extrapolated, O(h^4).
template <class F>
auto richardson_d2(F&& f, double h) {
    auto c0 = f(0.0);
    auto coarse = (f(h) - 2.0 * c0 + f(-h)) * (1.0 / (h * h));
    auto fine = (f(h / 2) - 2.0 * c0 + f(-h / 2)) * (4.0 / (h * h));
    return (4.0 * fine - coarse) * (1.0 / 3.0);
}

// Mixed second derivative d^2/dxdy from corner stencil, O(h^2) + Richardson.
template <class F>
auto richardson_d2_cross(F&& f, double h) {
    auto corner = [&](double a) {
        return (f(a, a) - f(a, -a) - f(-a, a) + f(-a, -a)) * (1.0 / (4.0 * a * a));
    };
    auto coarse = corner(h);
    auto fine = corner(h / 2);
    return (4.0 * fine - coarse) * (1.0 / 3.0);
}

// Third derivative, 4-point antisymmetric stencil with one Richardson step.
template <class F>
auto richardson_d3(F&& f, double h) {
    auto stencil = [&](double a) {
        return (f(2 * a) - 2.0 * f(a) + 2.0 * f(-a) - f(-2 * a)) * (1.0 / (2.0 * a * a * a));
    };
    auto coarse = stencil(h);
    auto fine = stencil(h / 2);
    return (4.0 * fine - coarse) * (1.0 / 3.0);
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

// Cumulative composite trapezoid on a uniform grid.
template <class T>
std::vector<T> cumulative_trapezoid(const std::vector<T>& f, double dx, T zero) {
    std::vector<T> out(f.size(), zero);
    for (size_t i = 1; i < f.size(); ++i)
        out[i] = out[i - 1] + 0.5 * dx * (f[i] + f[i - 1]);
    return out;
}

// Least-squares line fit, returns (slope, intercept).
inline std::pair<double, double> linear_fit(const std::vector<double>& x,
                                            const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

// C-infinity ramp: 0 for x<=0, 1 for x>=1, all derivatives vanish at both ends.
inline double smooth_ramp(double x) {
    if (x <= 1e-9) return 0.0;
    if (x >= 1.0 - 1e-9) return 1.0;
    const double u = std::exp(-1.0 / x);
    const double v = std::exp(-1.0 / (1.0 - x));
    return u / (u + v);
}

}  // namespace adialag

#endif
