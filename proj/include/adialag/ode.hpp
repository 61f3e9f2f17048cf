#ifndef ADIALAG_ODE_HPP
#define ADIALAG_ODE_HPP

#include <functional>
#include <limits>

#include "adialag/types.hpp"

namespace adialag {

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-10;
    double h_init = 0.0;  // 0: pick from span
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 50'000'000;
};

struct OdeStats {
    long steps = 0;
    long rejected = 0;
};

using OdeRhs = std::function<void(double, const VecX&, VecX&)>;

// Adaptive Dormand-Prince 5(4). Steps are clamped to land exactly on the
// requested sample times, so recorded states need no interpolation; step
// acceptance is deterministic.
//
// on_sample(t, y) fires at t0, every sample time, and t1.
OdeStats integrate_ode(const OdeRhs& rhs, double t0, double t1, VecX y,
                       const std::function<void(double, const VecX&)>& on_sample,
                       double sample_dt, const OdeOptions& opts = {});

// Single end-state convenience wrapper.
VecX integrate_ode_to(const OdeRhs& rhs, double t0, double t1, VecX y0,
                      const OdeOptions& opts = {});

}  // namespace adialag

#endif
