#ifndef ADIALAG_DYNAMICS_HPP
#define ADIALAG_DYNAMICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "adialag/adiabatic.hpp"
#include "adialag/model.hpp"
#include "adialag/ode.hpp"

namespace adialag {

enum class Order { O0, O1, O2, O3, O4 };

Order order_from_string(const std::string& s);
std::string order_to_string(Order o);

// Time series of an exact or effective run. Exact runs are tagged fast (grid
// in t); effective runs are slow (grid in s = eps t).
struct Trajectory {
    bool fast_time = false;
    double epsilon = 0.0;
    std::vector<double> t;
    std::vector<VecX> q, qd, qdd, q3;
    std::vector<VecC> psi;               // exact runs
    std::vector<double> psi_norm;        // exact runs
    std::vector<double> total_energy;    // exact runs: kinetic + V + <H>
    std::vector<double> energy;          // effective runs: conserved functional
    std::vector<double> constraint_residual;  // odd-K order-3 runs

    int size() const { return static_cast<int>(t.size()); }
};

// Coupled Schrodinger + Newton integration in fast time t:
//   i dPsi/dt = H[q] Psi,   M d2q/dt2 = -dV - <Psi|dH|Psi>.
Trajectory integrate_exact(const HamiltonianField& field, const Polynomial& V, double mass,
                           const VecC& psi0, const VecX& q0, const VecX& qdot0_fast,
                           double t_end, const OdeOptions& opts = {}, double sample_dt = 0.1);

// Schrodinger equation along a prescribed slow path: i eps dPsi/ds = H(q(s)) Psi.
std::vector<VecC> schrodinger_on_path(const HamiltonianField& field, const AnalyticPath& path,
                                      double eps, const VecC& psi0,
                                      const std::vector<double>& s_out,
                                      const OdeOptions& opts = {});

// <Psi|dH|Psi> at a point.
VecX mean_force(const HamiltonianField& field, const VecX& q, const VecC& psi);

// Initial data for effective runs.
struct EffInit {
    VecX q, qd;
    std::optional<VecX> qdd;  // required from O3 up (defaults to the order-2 value)
    std::optional<VecX> q3;   // required for O4 (defaults to the order-3 solve)
};

// Acceleration from the order-2 equations of motion.
VecX accel_order2(const ModelField& model, const VecX& q, const VecX& qd);

// Acceleration refined onto the order-3 slow manifold (suppresses the fast
// ripple carried by the extra initial data).
VecX accel_order3_consistent(const ModelField& model, const VecX& q, const VecX& qd,
                             int iterations = 3);

// Third derivative from 2 eps^3 z q3 = phi(q, qd, qdd); even K with
// invertible z only.
VecX q3_solve_order3(const ModelField& model, const VecX& q, const VecX& qd, const VecX& qdd);

// Odd-K branch: null-direction constraint residual and the projected solve.
struct OddKSolve {
    double residual = 0.0;  // y0 . phi
    VecX q3;
    VecX null_direction;
};
OddKSolve odd_k_constraint(const ModelField& model, const VecX& q, const VecX& qd,
                           const VecX& qdd);

Trajectory integrate_effective(const ModelField& model, Order order, const EffInit& init,
                               double s_begin, double s_end, const OdeOptions& opts = {},
                               double sample_ds = 0.01);

// Canonical momentum of the third-order Lagrangian (connection term included
// only when the model carries a smooth gauge).
VecX momentum(const ModelField& model, const LocalTensors& lt, const VecX& qd, const VecX& qdd);

// Conserved energy of the third-order dynamics.
double energy_order3(const LocalTensors& lt, double eps, double mass, const VecX& qd,
                     const VecX& qdd);

// Conserved functional of the K = 1 fourth-order dynamics.
double energy_order4(const ModelField& model, const VecX& q, const VecX& qd, const VecX& qdd,
                     const VecX& q3);

struct AngularMomentum {
    MatX orbital, spin, total;
};
AngularMomentum angular_momentum(const ModelField& model, const LocalTensors& lt, const VecX& q,
                                 const VecX& qd, const VecX& qdd);

MatX spin_tensor(const LocalTensors& lt, double eps, const VecX& qd);

// Residual of p_mu = dL/dqd_mu + d/ds [S_am qd_a / qd^2] along a stored
// trajectory, with d/ds by central differences on the grid.
struct ZitterResult {
    std::vector<double> s;
    std::vector<VecX> residual;
    std::vector<bool> defined;  // false where |qd|^2 is too small
    double max_residual = 0.0;
};
ZitterResult zitterbewegung_residual(const ModelField& model, const Trajectory& traj);

// Max-norm residual of the order-k equations of motion evaluated on stored
// samples (consistency of the integrated trajectory).
double el_residual(const ModelField& model, Order order, const Trajectory& traj, int index);

// Adiabatically dressed state at a phase-space point: the truncated expansion
// evaluated on a local Taylor path, so exact runs can start on the slow
// manifold.
VecC dressed_initial_state(const ModelField& model, const HamiltonianField& field, const VecX& q,
                           const VecX& qd, double eps, int order);

}  // namespace adialag

#endif
