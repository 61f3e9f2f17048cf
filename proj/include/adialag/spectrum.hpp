#ifndef ADIALAG_SPECTRUM_HPP
#define ADIALAG_SPECTRUM_HPP

#include <functional>
#include <optional>

#include "adialag/hamiltonian.hpp"
#include "adialag/types.hpp"

namespace adialag {

// Eigen-resolution of H(q) at a point: ascending energies, orthonormal
// eigenvectors (columns), full gap table Delta_kl = E_k - E_l.
struct Spectrum {
    VecX q;
    VecX energies;
    MatC vectors;
    MatX gaps;
    double gap_min = 0.0;
    double h_norm = 0.0;

    int dim() const { return static_cast<int>(energies.size()); }
    VecC vec(int k) const { return vectors.col(k); }
    double gap(int k, int l) const { return gaps(k, l); }
};

enum class GaugePolicy {
    OverlapAligned,  // unit phases chosen so Re<k_prev|k_curr> >= 0 along a path
    RealForced,      // real-symmetric H only; eigenvectors kept real
    Raw,             // deterministic phase fix only
};

struct GaugeFrame {
    Spectrum spec;
    GaugePolicy policy = GaugePolicy::Raw;

    int dim() const { return spec.dim(); }
    VecC vec(int k) const { return spec.vec(k); }
};

// Optional smooth per-level re-phasing |k> -> e^{i alpha_k(q)} |k>, used by the
// gauge-covariance checks.
struct GaugeShift {
    std::function<double(int level, const VecX& q)> alpha;
};

// Dense Hermitian solve with deterministic phase convention (largest-magnitude
// entry of each eigenvector made real positive). gap_tol <= 0 selects the
// default 1e-8*||H||.
Spectrum spectrum(const HamiltonianField& field, const VecX& q, double gap_tol = -1.0);

GaugeFrame initial_frame(const HamiltonianField& field, const VecX& q, GaugePolicy policy,
                         double gap_tol = -1.0);

// Phase/association alignment of `raw` against `prev`; levels associated by
// maximal overlap, error if the association is ambiguous within 1e-6.
GaugeFrame smooth_gauge(const GaugeFrame& prev, const Spectrum& raw);

GaugeFrame apply_shift(const GaugeFrame& frame, const GaugeShift& shift);

// d_mu |n>: off-diagonal part sum_k' |k><k|d_mu H|n>/Delta_nk, diagonal part
// i*diag_phase |n> (zero under the default parallel-transport-like policy).
VecC eigvec_derivative(const HamiltonianField& field, const GaugeFrame& frame, int n, int mu,
                       double diag_phase_rate = 0.0);

// Matrix C with C(k, mu) = <k|d_mu n> for k != n (row n left zero).
MatC offdiag_derivative_coefficients(const HamiltonianField& field, const GaugeFrame& frame,
                                     int n);

// <n|d_mu H|n> for all mu; equals the gradient of E_n.
VecX hellmann_feynman(const HamiltonianField& field, const GaugeFrame& frame, int n);

}  // namespace adialag

#endif
