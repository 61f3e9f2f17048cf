#ifndef ADIALAG_SLOW_PATH_HPP
#define ADIALAG_SLOW_PATH_HPP

#include <functional>
#include <vector>

#include "adialag/types.hpp"

namespace adialag {

// Continuous prescribed path q(s) with derivatives up to third order.
struct AnalyticPath {
    std::function<VecX(double)> q;
    std::function<VecX(double)> qdot;
    std::function<VecX(double)> qddot;
    std::function<VecX(double)> q3;

    // Derivatives filled by Richardson differences of q when not supplied.
    static AnalyticPath from_position(std::function<VecX(double)> q, double h = 1e-4);

    // q(s) = center + r (cos(w s + phi), sin(w s + phi)).
    static AnalyticPath circle(VecX center, double radius, double omega, double phase);

    // Circular arc whose angle follows a C-infinity ramp: all path derivatives
    // vanish at s = 0, so adiabatic series built on it start clean.
    static AnalyticPath ramped_arc(VecX center, double radius, double theta0, double rate,
                                   double ramp_time);

    static AnalyticPath fixed_point(VecX q0);
};

// Uniformly sampled path with derivative tables.
struct SlowPath {
    std::vector<double> s;
    std::vector<VecX> q, qd, qdd, qd3;

    double ds() const { return s.size() > 1 ? s[1] - s[0] : 0.0; }
    int size() const { return static_cast<int>(s.size()); }
    int coords() const { return s.empty() ? 0 : static_cast<int>(q[0].size()); }

    static SlowPath sample(const AnalyticPath& path, double s0, double s1, int n);

    // Derivatives from O(ds^2) differences when not given; supplied derivative
    // samples are cross-checked against differences of q.
    static SlowPath from_samples(std::vector<double> s, std::vector<VecX> q,
                                 std::vector<VecX> qd = {}, std::vector<VecX> qdd = {},
                                 std::vector<VecX> qd3 = {});
};

}  // namespace adialag

#endif
