#include "adialag/ode.hpp"

#include <algorithm>
#include <cmath>

namespace adialag {

namespace {

// Dormand-Prince RK5(4)7M coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeStats integrate_ode(const OdeRhs& rhs, double t0, double t1, VecX y,
                       const std::function<void(double, const VecX&)>& on_sample,
                       double sample_dt, const OdeOptions& opts) {
    const int n = static_cast<int>(y.size());
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    if (span == 0.0) {
        if (on_sample) on_sample(t0, y);
        return {};
    }

    VecX k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n), err(n);
    double t = t0;
    double h = opts.h_init > 0 ? opts.h_init : std::min(span / 100.0, opts.h_max);
    h = std::min(h, span);

    if (on_sample) on_sample(t, y);
    long sample_idx = 1;
    auto sample_time = [&](long k) { return t0 + dir * k * sample_dt; };
    double next_sample = sample_dt > 0 ? sample_time(sample_idx) : t1;

    rhs(t, y, k1);
    OdeStats stats;

    while (dir * (t1 - t) > 1e-14 * std::max(1.0, std::abs(t1))) {
        if (stats.steps + stats.rejected > opts.max_steps)
            throw NumericalError("ODE integration exceeded max step count at t = " +
                                 std::to_string(t));
        double h_eff = std::min({h, opts.h_max, dir * (t1 - t)});
        bool hit_sample = false;
        if (sample_dt > 0 && dir * (next_sample - t) <= h_eff + 1e-14) {
            h_eff = dir * (next_sample - t);
            hit_sample = true;
        }
        const double hs = dir * h_eff;

        ytmp = y + hs * (a21 * k1);
        rhs(t + c2 * hs, ytmp, k2);
        ytmp = y + hs * (a31 * k1 + a32 * k2);
        rhs(t + c3 * hs, ytmp, k3);
        ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * hs, ytmp, k4);
        ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * hs, ytmp, k5);
        ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + hs, ytmp, k6);
        y5 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + hs, y5, k7);
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err_norm = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double r = err[i] / sc;
            err_norm += r * r;
        }
        err_norm = std::sqrt(err_norm / n);

        if (err_norm <= 1.0 || h_eff <= 1e-14 * std::max(1.0, std::abs(t))) {
            t += hs;
            y.swap(y5);
            k1.swap(k7);  // FSAL
            ++stats.steps;
            if (hit_sample) {
                t = next_sample;  // keep the sample grid free of rounding drift
                if (on_sample) on_sample(t, y);
                next_sample = sample_time(++sample_idx);
            }
        } else {
            ++stats.rejected;
        }
        const double factor =
            err_norm > 0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h = h_eff * std::clamp(factor, 0.2, 5.0);
        if (!(h > 0) || !std::isfinite(h))
            throw NumericalError("ODE step size collapsed at t = " + std::to_string(t));
    }
    // Final state fires when t1 is not itself a sample point.
    if (on_sample && (sample_dt <= 0 || std::abs((sample_time(sample_idx - 1)) - t) >
                                            1e-12 * std::max(1.0, std::abs(t))))
        on_sample(t, y);
    return stats;
}

VecX integrate_ode_to(const OdeRhs& rhs, double t0, double t1, VecX y0, const OdeOptions& opts) {
    VecX out = y0;
    integrate_ode(
        rhs, t0, t1, std::move(y0), [&](double, const VecX& y) { out = y; }, -1.0, opts);
    return out;
}

}  // namespace adialag
