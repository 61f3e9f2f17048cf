#ifndef ADIALAG_HAMILTONIAN_HPP
#define ADIALAG_HAMILTONIAN_HPP

#include <functional>
#include <vector>

#include "adialag/types.hpp"

namespace adialag {

// Parametrized Hermitian operator field H(q). Canonical form is the linear
// pencil H(q) = H0 + sum_a q_a * H_a with exact coordinate derivatives; an
// opaque evaluator with finite-difference derivatives is the escape hatch for
// anything else.
class HamiltonianField {
  public:
    using Evaluator = std::function<MatC(const VecX&)>;

    static HamiltonianField pencil(MatC h0, std::vector<MatC> hlin);
    static HamiltonianField evaluator(int dim, int coords, Evaluator eval, double fd_step = 1e-5);

    int dim() const { return dim_; }
    int coords() const { return coords_; }
    bool is_linear_pencil() const { return static_cast<bool>(!eval_); }
    // True when every matrix entry is real (real-symmetric field).
    bool is_real() const { return real_; }

    MatC operator()(const VecX& q) const;
    // dH/dq_mu; exact for the pencil form.
    MatC derivative(const VecX& q, int mu) const;

    // Scale used for tolerance defaults; Frobenius norm of H at q.
    double norm_at(const VecX& q) const;

    // Field with every matrix multiplied by s (gap scaling tests).
    HamiltonianField scaled(double s) const;

    const MatC& h0() const { return h0_; }
    const std::vector<MatC>& hlin() const { return hlin_; }

  private:
    HamiltonianField() = default;
    static void require_hermitian(const MatC& m, const std::string& label);

    int dim_ = 0;
    int coords_ = 0;
    bool real_ = false;
    MatC h0_;
    std::vector<MatC> hlin_;
    Evaluator eval_;
    double fd_step_ = 1e-5;
};

// Common two-level building blocks.
MatC pauli_x();
MatC pauli_y();
MatC pauli_z();

}  // namespace adialag

#endif
