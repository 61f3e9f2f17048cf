#include "adialag/hamiltonian.hpp"

#include <cmath>
#include <sstream>

namespace adialag {

namespace {

double max_asymmetry(const MatC& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool matrix_is_real(const MatC& m) {
    return m.imag().cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

void HamiltonianField::require_hermitian(const MatC& m, const std::string& label) {
    const double asym = max_asymmetry(m);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asym > 1e-12 * scale) {
        std::ostringstream os;
        os << "non-Hermitian matrix in " << label << ": max |H - H^dagger| entry = " << asym;
        throw ValidationError(os.str());
    }
}

HamiltonianField HamiltonianField::pencil(MatC h0, std::vector<MatC> hlin) {
    HamiltonianField f;
    f.dim_ = static_cast<int>(h0.rows());
    f.coords_ = static_cast<int>(hlin.size());
    if (f.dim_ < 2) throw ValidationError("hamiltonian dimension must be >= 2");
    if (f.coords_ < 1) throw ValidationError("hamiltonian needs at least one coordinate coupling");
    if (h0.cols() != f.dim_) throw ValidationError("H0 must be square");
    require_hermitian(h0, "H0");
    f.real_ = matrix_is_real(h0);
    for (size_t a = 0; a < hlin.size(); ++a) {
        if (hlin[a].rows() != f.dim_ || hlin[a].cols() != f.dim_)
            throw ValidationError("Hlin[" + std::to_string(a) + "] has wrong shape");
        require_hermitian(hlin[a], "Hlin[" + std::to_string(a) + "]");
        f.real_ = f.real_ && matrix_is_real(hlin[a]);
    }
    f.h0_ = std::move(h0);
    f.hlin_ = std::move(hlin);
    return f;
}

HamiltonianField HamiltonianField::evaluator(int dim, int coords, Evaluator eval, double fd_step) {
    HamiltonianField f;
    f.dim_ = dim;
    f.coords_ = coords;
    f.eval_ = std::move(eval);
    f.fd_step_ = fd_step;
    f.real_ = false;
    if (dim < 2 || coords < 1) throw ValidationError("evaluator field needs d >= 2 and K >= 1");
    if (fd_step <= 0) throw ValidationError("evaluator differentiation step must be positive");
    return f;
}

MatC HamiltonianField::operator()(const VecX& q) const {
    if (q.size() != coords_) throw ValidationError("coordinate count mismatch in H(q)");
    if (!q.allFinite()) throw ValidationError("non-finite coordinates passed to H(q)");
    if (eval_) {
        MatC h = eval_(q);
        require_hermitian(h, "evaluator H(q)");
        return h;
    }
    MatC h = h0_;
    for (int a = 0; a < coords_; ++a) h += q[a] * hlin_[a];
    return h;
}

MatC HamiltonianField::derivative(const VecX& q, int mu) const {
    if (!eval_) return hlin_[mu];
    VecX qp = q, qm = q;
    qp[mu] += fd_step_;
    qm[mu] -= fd_step_;
    return ((*this)(qp) - (*this)(qm)) / (2.0 * fd_step_);
}

double HamiltonianField::norm_at(const VecX& q) const { return (*this)(q).norm(); }

HamiltonianField HamiltonianField::scaled(double s) const {
    if (eval_) {
        Evaluator base = eval_;
        return evaluator(dim_, coords_, [base, s](const VecX& q) { return MatC(s * base(q)); },
                         fd_step_);
    }
    std::vector<MatC> hl = hlin_;
    for (auto& m : hl) m *= s;
    return pencil(s * h0_, std::move(hl));
}

MatC pauli_x() {
    MatC m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

MatC pauli_y() {
    MatC m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

MatC pauli_z() {
    MatC m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

}  // namespace adialag
