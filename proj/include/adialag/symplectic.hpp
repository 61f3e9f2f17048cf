#ifndef ADIALAG_SYMPLECTIC_HPP
#define ADIALAG_SYMPLECTIC_HPP

#include <functional>

#include "adialag/dynamics.hpp"
#include "adialag/model.hpp"

namespace adialag {

// Extended coordinates Q = (q, v, pi) of the first-order description of the
// third-order dynamics.
struct ExtendedState {
    VecX q, v, pi;

    VecX packed() const;
    static ExtendedState unpack(const VecX& y, int K);
};

struct Observable {
    std::function<double(const ExtendedState&)> value;
    // gradient with respect to (q, v, pi) stacked; finite differences when absent
    std::function<VecX(const ExtendedState&)> gradient;
};

// pi chosen so the extended Euler-Lagrange equations are consistent with
// qdot = v at the initial time (pi equals the physical momentum).
ExtendedState build_extended(const ModelField& model, const VecX& q, const VecX& v,
                             const VecX& vdot);

// Symplectic two-form Omega_ab = dA_a/dQ_b - dA_b/dQ_a of the extended
// one-form (pi, eps^3 z_{ba} v_b, 0), in block layout.
MatX omega(const ModelField& model, const ExtendedState& state);
MatX omega_inverse(const ModelField& model, const ExtendedState& state);

double hamiltonian_value(const ModelField& model, const ExtendedState& state);
VecX hamiltonian_gradient(const ModelField& model, const ExtendedState& state);

double poisson_bracket(const ModelField& model, const ExtendedState& state, const Observable& C,
                       const Observable& D, double fd_step = 1e-6);

struct ExtendedTrajectory {
    std::vector<double> s;
    std::vector<ExtendedState> state;
    std::vector<double> hamiltonian;
};

ExtendedTrajectory integrate_hamiltonian(const ModelField& model, const ExtendedState& state0,
                                         double s_end, const OdeOptions& opts = {},
                                         double sample_ds = 0.01);

}  // namespace adialag

#endif
