#ifndef ADIALAG_ADIABATIC_HPP
#define ADIALAG_ADIABATIC_HPP

#include <optional>
#include <vector>

#include "adialag/slow_path.hpp"
#include "adialag/spectrum.hpp"

namespace adialag {

// Gauge-aligned frames along a slow path plus the <k|dl/ds> tables used by the
// perturbation recursion. Time derivatives are central differences on the
// grid, one-sided at the endpoints.
struct FrameSeries {
    SlowPath path;
    std::vector<GaugeFrame> frames;
    std::vector<MatC> ddt;  // ddt[i](k,l) = <k(s_i)|d/ds l(s_i)>

    int size() const { return static_cast<int>(frames.size()); }
    int dim() const { return frames.empty() ? 0 : frames.front().dim(); }

    static FrameSeries build(const HamiltonianField& field, SlowPath path, GaugePolicy policy,
                             double gap_tol = -1.0);

    // |k> -> e^{i alpha_k(q)} |k> at every grid point (covariance tests).
    FrameSeries rephased(const GaugeShift& shift) const;
};

// Tables of the expansion coefficients c^{[j]}_{kn}(s) for j = 1..order, plus
// the accumulated Berry phase and the slow-time integral of E_n.
struct CoefficientTables {
    int level = 0;
    int order = 1;
    // c[j-1][i] is the length-d coefficient vector of order j at grid point i.
    std::vector<std::vector<VecC>> c;
    std::vector<double> berry_phase;     // gamma_n(s_i)
    std::vector<double> energy_integral; // int_0^{s_i} E_n du
    bool endpoint_one_sided = true;      // endpoint stencils are lower order

    // delta_{kn} + sum_j eps^j c^{[j]}(s_i), truncated at `order`.
    VecC total(int i, double eps, int order_limit = -1) const;
};

CoefficientTables adiabatic_coefficients(const FrameSeries& series, int level, int order);

// First-order pieces in closed form (base case of the recursion).
VecC c1_offdiagonal(const FrameSeries& series, int level, int grid_index);
Complex c1_diagonal(const CoefficientTables& tables, int grid_index);

// Second order straight from the worked-out expression (independent of the
// generic recursion; used as its cross-check).
VecC c2_offdiagonal_explicit(const FrameSeries& series, int level, int grid_index);

// |N_mu> = sum_k' <k|d_mu n>/Delta_nk |k>, orthogonal to |n>.
std::vector<VecC> n_vectors(const HamiltonianField& field, const GaugeFrame& frame, int level);

// |Psi(s_i)> = e^{-(i/eps) int E_n} e^{i gamma_n} sum_k c_kn |k>.
VecC reconstruct_wavefunction(const FrameSeries& series, const CoefficientTables& tables,
                              double eps, int order, int grid_index);

struct ActionAngle {
    VecX action;              // I_n = |<gamma_n|Psi>|^2
    VecX angle;               // phi_n = arg<gamma_n|Psi>, NaN when undefined
    std::vector<bool> defined;
};

ActionAngle action_angle_map(const VecC& psi, const MatC& basis);

}  // namespace adialag

#endif
