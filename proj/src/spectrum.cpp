#include "adialag/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace adialag {

namespace {

// Phase convention: largest-magnitude entry made real positive, ties broken by
// lowest index. Keeps repeated solves bit-stable.
void fix_phases(MatC& vectors) {
    for (int k = 0; k < vectors.cols(); ++k) {
        int best = 0;
        double best_mag = -1.0;
        for (int i = 0; i < vectors.rows(); ++i) {
            const double m = std::abs(vectors(i, k));
            if (m > best_mag + 1e-14) {
                best_mag = m;
                best = i;
            }
        }
        const Complex pivot = vectors(best, k);
        if (std::abs(pivot) > 0) vectors.col(k) *= std::conj(pivot) / std::abs(pivot);
    }
}

void fill_gaps(Spectrum& s) {
    const int d = s.dim();
    s.gaps.resize(d, d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s.gaps(k, l) = s.energies[k] - s.energies[l];
    s.gap_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < d; ++k)
        s.gap_min = std::min(s.gap_min, s.energies[k + 1] - s.energies[k]);
}

}  // namespace

Spectrum spectrum(const HamiltonianField& field, const VecX& q, double gap_tol) {
    Spectrum s;
    s.q = q;
    const MatC h = field(q);
    s.h_norm = h.norm();

    if (field.is_real()) {
        Eigen::SelfAdjointEigenSolver<MatX> solver(h.real());
        if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed");
        s.energies = solver.eigenvalues();
        s.vectors = solver.eigenvectors().cast<Complex>();
    } else {
        Eigen::SelfAdjointEigenSolver<MatC> solver(h);
        if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed");
        s.energies = solver.eigenvalues();
        s.vectors = solver.eigenvectors();
    }
    fix_phases(s.vectors);
    fill_gaps(s);

    const double tol = gap_tol > 0 ? gap_tol : 1e-8 * std::max(s.h_norm, 1e-300);
    if (s.gap_min <= tol) {
        int ka = 0;
        for (int k = 0; k + 1 < s.dim(); ++k)
            if (s.energies[k + 1] - s.energies[k] <= tol) ka = k;
        std::ostringstream os;
        os << "degenerate adiabatic levels (" << ka << ", " << ka + 1 << ") at q = [";
        for (int i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
        os << "], gap " << s.energies[ka + 1] - s.energies[ka] << " <= tol " << tol;
        throw DegeneracyError(q, ka, ka + 1, s.energies[ka + 1] - s.energies[ka], os.str());
    }
    return s;
}

GaugeFrame initial_frame(const HamiltonianField& field, const VecX& q, GaugePolicy policy,
                         double gap_tol) {
    if (policy == GaugePolicy::RealForced && !field.is_real())
        throw ValidationError("real-forced gauge requires a real-symmetric Hamiltonian field");
    GaugeFrame f{spectrum(field, q, gap_tol), policy};
    if (policy == GaugePolicy::RealForced) {
        // The real solver path already produced real vectors; pin the sign.
        const double max_imag = f.spec.vectors.imag().cwiseAbs().maxCoeff();
        if (max_imag > 1e-12)
            throw NumericalError("real-forced gauge produced complex eigenvectors");
        f.spec.vectors = f.spec.vectors.real().cast<Complex>();
    }
    return f;
}

GaugeFrame smooth_gauge(const GaugeFrame& prev, const Spectrum& raw) {
    const int d = prev.dim();
    if (raw.dim() != d) throw ValidationError("smooth_gauge: dimension mismatch");
    MatC overlaps = prev.spec.vectors.adjoint() * raw.vectors;

    GaugeFrame out{raw, prev.policy};
    for (int l = 0; l < d; ++l) {
        // Associate by maximal overlap magnitude; non-degenerate levels along a
        // short displacement must associate to themselves.
        int best = 0;
        double best_mag = -1.0, second = -1.0;
        for (int k = 0; k < d; ++k) {
            const double m = std::abs(overlaps(k, l));
            if (m > best_mag) {
                second = best_mag;
                best_mag = m;
                best = k;
            } else if (m > second) {
                second = m;
            }
        }
        if (best_mag - second < 1e-6) {
            std::ostringstream os;
            os << "ambiguous level association for raw level " << l << ": overlaps with levels "
               << best << " and next-best differ by " << best_mag - second;
            throw ValidationError(os.str());
        }
        if (best != l) {
            std::ostringstream os;
            os << "level association permuted (raw level " << l << " matches previous level "
               << best << "); frames too far apart";
            throw NumericalError(os.str());
        }
        const Complex o = overlaps(l, l);
        if (prev.policy == GaugePolicy::RealForced) {
            if (o.real() < 0) out.spec.vectors.col(l) *= -1.0;
            out.spec.vectors.col(l) = out.spec.vectors.col(l).real().cast<Complex>();
        } else {
            if (std::abs(o) > 0) out.spec.vectors.col(l) *= std::conj(o) / std::abs(o);
        }
    }
    return out;
}

GaugeFrame apply_shift(const GaugeFrame& frame, const GaugeShift& shift) {
    GaugeFrame out = frame;
    for (int k = 0; k < frame.dim(); ++k) {
        const double a = shift.alpha(k, frame.spec.q);
        out.spec.vectors.col(k) *= Complex(std::cos(a), std::sin(a));
    }
    return out;
}

MatC offdiag_derivative_coefficients(const HamiltonianField& field, const GaugeFrame& frame,
                                     int n) {
    const int d = frame.dim();
    const int K = field.coords();
    MatC c = MatC::Zero(d, K);
    const VecC vn = frame.vec(n);
    for (int mu = 0; mu < K; ++mu) {
        const MatC dh = field.derivative(frame.spec.q, mu);
        const VecC dh_n = dh * vn;
        for (int k = 0; k < d; ++k) {
            if (k == n) continue;
            c(k, mu) = frame.vec(k).dot(dh_n) / frame.spec.gap(n, k);
        }
    }
    return c;
}

VecC eigvec_derivative(const HamiltonianField& field, const GaugeFrame& frame, int n, int mu,
                       double diag_phase_rate) {
    const MatC c = offdiag_derivative_coefficients(field, frame, n);
    VecC out = VecC::Zero(frame.dim());
    for (int k = 0; k < frame.dim(); ++k) {
        if (k == n) continue;
        out += c(k, mu) * frame.vec(k);
    }
    out += Complex(0.0, diag_phase_rate) * frame.vec(n);
    return out;
}

VecX hellmann_feynman(const HamiltonianField& field, const GaugeFrame& frame, int n) {
    const int K = field.coords();
    VecX g(K);
    const VecC vn = frame.vec(n);
    for (int mu = 0; mu < K; ++mu)
        g[mu] = vn.dot(field.derivative(frame.spec.q, mu) * vn).real();
    return g;
}

}  // namespace adialag
