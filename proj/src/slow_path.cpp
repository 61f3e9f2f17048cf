#include "adialag/slow_path.hpp"

#include <cmath>

#include "adialag/util.hpp"

namespace adialag {

AnalyticPath AnalyticPath::from_position(std::function<VecX(double)> q, double h) {
    AnalyticPath p;
    p.q = q;
    p.qdot = [q, h](double s) { return VecX(richardson_d1([&](double d) { return q(s + d); }, h)); };
    auto qdot = p.qdot;
    p.qddot = [qdot, h](double s) {
        return VecX(richardson_d1([&](double d) { return qdot(s + d); }, h));
    };
    auto qddot = p.qddot;
    p.q3 = [qddot, h](double s) {
        return VecX(richardson_d1([&](double d) { return qddot(s + d); }, h));
    };
    return p;
}

AnalyticPath AnalyticPath::circle(VecX center, double radius, double omega, double phase) {
    AnalyticPath p;
    auto at = [center, radius, omega, phase](double s, int deriv) {
        const double th = omega * s + phase;
        VecX v = VecX::Zero(center.size());
        const double w = std::pow(omega, deriv);
        // successive derivatives rotate (cos, sin) by 90 degrees each
        const double c = std::cos(th + deriv * M_PI / 2.0);
        const double sn = std::sin(th + deriv * M_PI / 2.0);
        v[0] = radius * w * c;
        v[1] = radius * w * sn;
        if (deriv == 0) v += center;
        return v;
    };
    p.q = [at](double s) { return at(s, 0); };
    p.qdot = [at](double s) { return at(s, 1); };
    p.qddot = [at](double s) { return at(s, 2); };
    p.q3 = [at](double s) { return at(s, 3); };
    return p;
}

AnalyticPath AnalyticPath::ramped_arc(VecX center, double radius, double theta0, double rate,
                                      double ramp_time) {
    // theta(s) = theta0 + rate * integral_0^s ramp(u/ramp_time) du
    auto theta = [theta0, rate, ramp_time](double s) {
        // exact integral of the ramp is not closed form; integrate numerically
        // with a fine fixed Simpson rule (s stays small in practice)
        const int n = 200;
        double acc = 0.0;
        const double h = s / n;
        for (int i = 0; i < n; ++i) {
            const double a = i * h, b = (i + 1) * h;
            acc += h / 6.0 *
                   (smooth_ramp(a / ramp_time) + 4.0 * smooth_ramp((a + b) / 2.0 / ramp_time) +
                    smooth_ramp(b / ramp_time));
        }
        return theta0 + rate * acc;
    };
    auto pos = [center, radius, theta](double s) {
        const double th = theta(s);
        VecX v = center;
        v[0] += radius * std::cos(th);
        v[1] += radius * std::sin(th);
        return v;
    };
    return AnalyticPath::from_position(pos, 1e-4);
}

AnalyticPath AnalyticPath::fixed_point(VecX q0) {
    AnalyticPath p;
    const VecX zero = VecX::Zero(q0.size());
    p.q = [q0](double) { return q0; };
    p.qdot = [zero](double) { return zero; };
    p.qddot = [zero](double) { return zero; };
    p.q3 = [zero](double) { return zero; };
    return p;
}

SlowPath SlowPath::sample(const AnalyticPath& path, double s0, double s1, int n) {
    SlowPath sp;
    sp.s = linspace(s0, s1, n);
    sp.q.reserve(n);
    for (double s : sp.s) {
        sp.q.push_back(path.q(s));
        sp.qd.push_back(path.qdot(s));
        sp.qdd.push_back(path.qddot(s));
        sp.qd3.push_back(path.q3(s));
    }
    return sp;
}

SlowPath SlowPath::from_samples(std::vector<double> s, std::vector<VecX> q, std::vector<VecX> qd,
                                std::vector<VecX> qdd, std::vector<VecX> qd3) {
    if (s.size() < 3) throw ValidationError("slow path needs at least 3 samples");
    if (q.size() != s.size()) throw ValidationError("path sample count mismatch");
    const double ds = s[1] - s[0];
    for (size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i + 1] <= s[i]) throw ValidationError("path grid must be strictly increasing");
        if (std::abs((s[i + 1] - s[i]) - ds) > 1e-9 * std::max(1.0, std::abs(ds)))
            throw ValidationError("path grid must be uniform");
    }

    auto fd = [&](const std::vector<VecX>& f) {
        std::vector<VecX> out(f.size());
        const size_t n = f.size();
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * ds);
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * ds);
        for (size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * ds);
        return out;
    };

    SlowPath sp;
    sp.s = std::move(s);
    sp.q = std::move(q);
    sp.qd = qd.empty() ? fd(sp.q) : std::move(qd);
    sp.qdd = qdd.empty() ? fd(sp.qd) : std::move(qdd);
    sp.qd3 = qd3.empty() ? fd(sp.qdd) : std::move(qd3);

    // Consistency of supplied derivatives with O(ds^2) differences of q.
    if (!qd.empty()) {
        const auto ref = fd(sp.q);
        double scale = 0.0;
        for (const auto& v : sp.qd) scale = std::max(scale, v.cwiseAbs().maxCoeff());
        for (size_t i = 1; i + 1 < sp.q.size(); ++i) {
            const double err = (sp.qd[i] - ref[i]).cwiseAbs().maxCoeff();
            if (err > 10.0 * ds * ds * std::max(1.0, scale) + 1e-9)
                throw ValidationError("supplied path derivatives inconsistent with samples");
        }
    }
    return sp;
}

}  // namespace adialag
