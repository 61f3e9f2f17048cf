#include "adialag/model.hpp"

#include <cmath>

#include "adialag/util.hpp"

namespace adialag {

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(int coords, std::vector<PolynomialTerm> terms)
    : coords_(coords), terms_(std::move(terms)) {
    for (const auto& t : terms_)
        if (static_cast<int>(t.powers.size()) != coords_)
            throw ValidationError("polynomial term power list length must equal K");
}

double Polynomial::value(const VecX& q) const {
    double v = 0.0;
    for (const auto& t : terms_) {
        double m = t.coeff;
        for (int a = 0; a < coords_; ++a)
            for (int p = 0; p < t.powers[a]; ++p) m *= q[a];
        v += m;
    }
    return v;
}

VecX Polynomial::gradient(const VecX& q) const {
    VecX g = VecX::Zero(coords_);
    for (const auto& t : terms_) {
        for (int a = 0; a < coords_; ++a) {
            if (t.powers[a] == 0) continue;
            double m = t.coeff * t.powers[a];
            for (int b = 0; b < coords_; ++b) {
                const int p = t.powers[b] - (b == a ? 1 : 0);
                for (int i = 0; i < p; ++i) m *= q[b];
            }
            g[a] += m;
        }
    }
    return g;
}

Order4Coefficients ModelField::order4(const VecX&) const {
    throw UnsupportedError("fourth-order coefficients need K = 1 and a real Hamiltonian field");
}

Tensor3 symmetrize(const Tensor3& f) {
    const int n = f.dim();
    Tensor3 out(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                out(a, b, c) = (f(a, b, c) + f(a, c, b) + f(b, a, c) + f(b, c, a) + f(c, a, b) +
                                f(c, b, a)) /
                               6.0;
    return out;
}

// ---------------------------------------------------------------------------
// SpectralModelField

struct SpectralModelField::PointData {
    GaugeFrame frame;
    MatC C;                  // C(k, mu) = <k|d_mu n>
    std::vector<VecC> N;     // response vectors
};

SpectralModelField::SpectralModelField(HamiltonianField field, Polynomial v, int level,
                                       double epsilon, double mass, SpectralOptions opts)
    : ModelField(field.coords(), level, epsilon, mass, std::move(v)),
      field_(std::move(field)),
      options_(std::move(opts)) {
    if (level_ < 0 || level_ >= field_.dim()) throw ValidationError("level out of range");
    if (V_.coords() != coords_) throw ValidationError("potential coordinate count mismatch");
    if (field_.is_real() && options_.policy != GaugePolicy::Raw)
        options_.policy = GaugePolicy::RealForced;
    if (options_.anchor) {
        anchor_frame_ = std::make_shared<GaugeFrame>(
            initial_frame(field_, *options_.anchor, options_.policy, options_.gap_tol));
    }
}

SpectralModelField SpectralModelField::with_shift(GaugeShift shift) const {
    SpectralOptions o = options_;
    o.shift = std::move(shift);
    return SpectralModelField(field_, V_, level_, epsilon_, mass_, std::move(o));
}

SpectralModelField SpectralModelField::with_anchor(const VecX& anchor) const {
    SpectralOptions o = options_;
    o.anchor = anchor;
    return SpectralModelField(field_, V_, level_, epsilon_, mass_, std::move(o));
}

GaugeFrame SpectralModelField::aligned(const VecX& q, const GaugeFrame* center) const {
    GaugeFrame out = [&] {
        if (anchor_frame_) {
            if ((q - anchor_frame_->spec.q).norm() < 1e-300) return *anchor_frame_;
            return smooth_gauge(*anchor_frame_, spectrum(field_, q, options_.gap_tol));
        }
        if (center) return smooth_gauge(*center, spectrum(field_, q, options_.gap_tol));
        return initial_frame(field_, q, options_.policy, options_.gap_tol);
    }();
    if (options_.shift) out = apply_shift(out, *options_.shift);
    return out;
}

GaugeFrame SpectralModelField::frame(const VecX& q) const { return aligned(q, nullptr); }

SpectralModelField::PointData SpectralModelField::point(const VecX& q) const {
    PointData p{aligned(q, nullptr), {}, {}};
    p.C = offdiag_derivative_coefficients(field_, p.frame, level_);
    const int d = field_.dim();
    const int K = coords_;
    p.N.assign(K, VecC::Zero(d));
    for (int mu = 0; mu < K; ++mu)
        for (int k = 0; k < d; ++k) {
            if (k == level_) continue;
            p.N[mu] += p.C(k, mu) / p.frame.spec.gap(level_, k) * p.frame.vec(k);
        }
    return p;
}

namespace {

MatX mass_tensor_from(const MatC& C, const Spectrum& sp, int n) {
    const int K = static_cast<int>(C.cols());
    MatX G = MatX::Zero(K, K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b <= a; ++b) {
            double acc = 0.0;
            for (int k = 0; k < C.rows(); ++k) {
                if (k == n) continue;
                acc += (std::conj(C(k, b)) * C(k, a)).real() / sp.gap(n, k);
            }
            G(a, b) = G(b, a) = -2.0 * acc;
        }
    return G;
}

MatX curvature_kernel_from(const MatC& C, int n) {
    const int K = static_cast<int>(C.cols());
    MatX curv = MatX::Zero(K, K);
    for (int m = 0; m < K; ++m)
        for (int a = 0; a < K; ++a) {
            Complex acc(0, 0);
            for (int k = 0; k < C.rows(); ++k) {
                if (k == n) continue;
                acc += std::conj(C(k, m)) * C(k, a);
            }
            curv(m, a) = acc.imag();
        }
    return curv;
}

MatX z_from_nvec(const std::vector<VecC>& N) {
    const int K = static_cast<int>(N.size());
    MatX z = MatX::Zero(K, K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) z(a, b) = N[b].dot(N[a]).imag();
    // exact antisymmetry by construction
    for (int a = 0; a < K; ++a) {
        z(a, a) = 0.0;
        for (int b = 0; b < a; ++b) {
            const double v = 0.5 * (z(a, b) - z(b, a));
            z(a, b) = v;
            z(b, a) = -v;
        }
    }
    return z;
}

}  // namespace

MatX SpectralModelField::z_of_frame(const HamiltonianField& f, const GaugeFrame& fr) const {
    const MatC C = offdiag_derivative_coefficients(f, fr, level_);
    const int d = f.dim();
    std::vector<VecC> N(coords_, VecC::Zero(d));
    for (int mu = 0; mu < coords_; ++mu)
        for (int k = 0; k < d; ++k) {
            if (k == level_) continue;
            N[mu] += C(k, mu) / fr.spec.gap(level_, k) * fr.vec(k);
        }
    return z_from_nvec(N);
}

Tensor3 SpectralModelField::raw_f(const VecX& q, const PointData& p) const {
    const int K = coords_;
    const double h = options_.h_inner * (1.0 + q.norm());
    std::vector<Complex> diag(K);
    std::vector<std::vector<VecC>> dN(K);
    for (int g = 0; g < K; ++g) {
        VecX qp = q, qm = q;
        qp[g] += h;
        qm[g] -= h;
        const GaugeFrame fp = aligned(qp, &p.frame);
        const GaugeFrame fm = aligned(qm, &p.frame);
        diag[g] = p.frame.vec(level_).dot((fp.vec(level_) - fm.vec(level_)) / (2.0 * h));
        const std::vector<VecC> Np = n_vectors(field_, fp, level_);
        const std::vector<VecC> Nm = n_vectors(field_, fm, level_);
        dN[g].resize(K);
        for (int mu = 0; mu < K; ++mu) dN[g][mu] = (Np[mu] - Nm[mu]) / (2.0 * h);
    }
    Tensor3 f(K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            for (int g = 0; g < K; ++g)
                f(a, b, g) = (diag[g] * p.N[b].dot(p.N[a]) + dN[g][b].dot(p.N[a])).imag();
    return f;
}

VecX SpectralModelField::connection(const VecX& q, const PointData& p) const {
    const int K = coords_;
    VecX A = VecX::Zero(K);
    if (anchor_frame_ && !options_.shift) {
        // analytic connection in the anchor-aligned gauge
        const VecC na = anchor_frame_->vec(level_);
        const double w = p.frame.vec(level_).dot(na).real();
        for (int mu = 0; mu < K; ++mu) {
            Complex acc(0, 0);
            for (int k = 0; k < field_.dim(); ++k) {
                if (k == level_) continue;
                acc += std::conj(p.C(k, mu)) * p.frame.vec(k).dot(na);
            }
            A[mu] = -(acc / w).imag();
        }
        return A;
    }
    const double h = options_.h_inner * (1.0 + q.norm());
    for (int mu = 0; mu < K; ++mu) {
        VecX qp = q, qm = q;
        qp[mu] += h;
        qm[mu] -= h;
        const GaugeFrame fp = aligned(qp, &p.frame);
        const GaugeFrame fm = aligned(qm, &p.frame);
        const Complex diag =
            p.frame.vec(level_).dot((fp.vec(level_) - fm.vec(level_)) / (2.0 * h));
        A[mu] = -diag.imag();
    }
    return A;
}

EffectiveModel SpectralModelField::at(const VecX& q) const {
    PointData p = point(q);
    EffectiveModel m;
    m.q = q;
    m.level = level_;
    m.epsilon = epsilon_;
    m.mass = mass_;
    m.E = p.frame.spec.energies[level_];
    m.dE = hellmann_feynman(field_, p.frame, level_);
    m.V = V_.value(q);
    m.dV = V_.gradient(q);
    m.berry_curv = curvature_kernel_from(p.C, level_);
    m.G = mass_tensor_from(p.C, p.frame.spec, level_);
    m.z = z_from_nvec(p.N);
    m.A = connection(q, p);
    m.f = raw_f(q, p);
    m.f_sym = symmetrize(m.f);

    if (coords_ == 1 && field_.is_real()) {
        const Order4Coefficients c = order4(q);
        m.a4 = c.a;
        m.b4 = c.b;
        m.w4 = c.w;
    }
    return m;
}

LocalTensors SpectralModelField::local(const VecX& q, int order, bool with_connection) const {
    const int K = coords_;
    LocalTensors lt;
    lt.order = order;
    lt.has_connection = with_connection;

    PointData p = point(q);
    lt.E = p.frame.spec.energies[level_];
    lt.dE = hellmann_feynman(field_, p.frame, level_);
    lt.V = V_.value(q);
    lt.dV = V_.gradient(q);
    if (order >= 1) lt.curv = curvature_kernel_from(p.C, level_);
    if (order >= 2) lt.G = mass_tensor_from(p.C, p.frame.spec, level_);

    if (order >= 2) {
        // Richardson first derivatives of the pointwise-analytic fields.
        const double h = options_.h_point * (1.0 + q.norm());
        lt.dG = Tensor3(K);
        if (order >= 3) lt.dz = Tensor3(K);
        if (with_connection) lt.dA = MatX::Zero(K, K);
        for (int g = 0; g < K; ++g) {
            auto eval = [&](double off) {
                VecX qq = q;
                qq[g] += off;
                GaugeFrame fr = aligned(qq, &p.frame);
                MatC C = offdiag_derivative_coefficients(field_, fr, level_);
                struct Piece {
                    MatX G, z;
                    VecX A;
                } piece;
                piece.G = mass_tensor_from(C, fr.spec, level_);
                if (order >= 3) piece.z = z_of_frame(field_, fr);
                if (with_connection) piece.A = connection(qq, point(qq));
                return piece;
            };
            const auto pp = eval(h), pm = eval(-h), hp = eval(h / 2), hm = eval(-h / 2);
            const MatX dG_g =
                (4.0 * (hp.G - hm.G) / h - (pp.G - pm.G) / (2.0 * h)) / 3.0;
            for (int a = 0; a < K; ++a)
                for (int b = 0; b < K; ++b) lt.dG(g, a, b) = dG_g(a, b);
            if (order >= 3) {
                const MatX dz_g =
                    (4.0 * (hp.z - hm.z) / h - (pp.z - pm.z) / (2.0 * h)) / 3.0;
                for (int a = 0; a < K; ++a)
                    for (int b = 0; b < K; ++b) lt.dz(g, a, b) = dz_g(a, b);
            }
            if (with_connection)
                lt.dA.row(g) =
                    ((4.0 * (hp.A - hm.A) / h - (pp.A - pm.A) / (2.0 * h)) / 3.0).transpose();
        }
    }

    if (order >= 3) {
        lt.z = z_from_nvec(p.N);
        // fsym at the point and its gradient via nested differences of the
        // gauge-invariant field.
        auto fsym_at = [&](const VecX& qq) { return symmetrize(raw_f(qq, point(qq))); };
        lt.fsym = symmetrize(raw_f(q, p));
        const double hf = options_.h_field * (1.0 + q.norm());
        lt.dfsym = Tensor4(K);
        for (int g = 0; g < K; ++g) {
            auto eval = [&](double off) {
                VecX qq = q;
                qq[g] += off;
                return fsym_at(qq);
            };
            const Tensor3 d =
                (4.0 * (eval(hf / 2) - eval(-hf / 2)) / hf - (eval(hf) - eval(-hf)) / (2.0 * hf)) /
                3.0;
            for (int m = 0; m < K; ++m)
                for (int a = 0; a < K; ++a)
                    for (int b = 0; b < K; ++b) lt.dfsym(g, m, a, b) = d(m, a, b);
        }
    }

    if (with_connection) lt.A = connection(q, p);
    return lt;
}

MatX SpectralModelField::d2z_directional(const VecX& q, const VecX& dir) const {
    const int K = coords_;
    const double dn = dir.norm();
    if (dn < 1e-12) return MatX::Zero(K, K);
    const double h = options_.h_field * (1.0 + q.norm()) / dn;
    auto eval = [&](double off) {
        const VecX qq = q + off * dir;
        return z_of_frame(field_, aligned(qq, nullptr));
    };
    const MatX z0 = eval(0.0);
    const MatX coarse = (eval(h) - 2.0 * z0 + eval(-h)) / (h * h);
    const MatX fine = (eval(h / 2) - 2.0 * z0 + eval(-h / 2)) * (4.0 / (h * h));
    return (4.0 * fine - coarse) / 3.0;
}

Order4Coefficients SpectralModelField::order4(const VecX& q) const {
    if (coords_ != 1 || !field_.is_real())
        throw UnsupportedError(
            "fourth-order coefficients are defined for K = 1 with a real Hamiltonian field");

    const int n = level_;
    auto w_of = [&](const VecX& qq) {
        const GaugeFrame fr = aligned(qq, nullptr);
        const MatC C = offdiag_derivative_coefficients(field_, fr, n);
        double acc = 0.0;
        for (int k = 0; k < field_.dim(); ++k) {
            if (k == n) continue;
            acc += std::norm(C(k, 0)) / std::pow(fr.spec.gap(n, k), 3);
        }
        return -acc;
    };
    auto b_of = [&](const VecX& qq) {
        const GaugeFrame fr = aligned(qq, nullptr);
        const MatC C = offdiag_derivative_coefficients(field_, fr, n);
        double acc = 0.0;
        for (int k = 0; k < field_.dim(); ++k) {
            if (k == n) continue;
            const double dgap =
                hellmann_feynman(field_, fr, n)[0] - hellmann_feynman(field_, fr, k)[0];
            acc += std::norm(C(k, 0)) * dgap / std::pow(fr.spec.gap(n, k), 4);
        }
        return acc;
    };
    auto G_of = [&](const VecX& qq) {
        const GaugeFrame fr = aligned(qq, nullptr);
        const MatC C = offdiag_derivative_coefficients(field_, fr, n);
        return mass_tensor_from(C, fr.spec, n)(0, 0);
    };
    auto a_of = [&](const VecX& qq) {
        PointData p = point(qq);
        const double h = options_.h_inner * (1.0 + qq.norm());
        VecX qp = qq, qm = qq;
        qp[0] += h;
        qm[0] -= h;
        const GaugeFrame fp = aligned(qp, &p.frame);
        const GaugeFrame fm = aligned(qm, &p.frame);
        const VecC dN = (n_vectors(field_, fp, n)[0] - n_vectors(field_, fm, n)[0]) / (2.0 * h);
        double first = 0.0;
        for (int k = 0; k < field_.dim(); ++k) {
            if (k == n) continue;
            first += std::norm(dN.dot(p.frame.vec(k))) / p.frame.spec.gap(n, k);
        }
        VecC dn_vec = VecC::Zero(field_.dim());
        for (int k = 0; k < field_.dim(); ++k) {
            if (k == n) continue;
            dn_vec += p.C(k, 0) * p.frame.vec(k);
        }
        const double second = p.N[0].squaredNorm() * dn_vec.dot(p.N[0]).real();
        return first - second;
    };

    Order4Coefficients c;
    const double hp = options_.h_point * (1.0 + q.norm());
    const double hf = options_.h_field * (1.0 + q.norm());
    const double h3 = 0.02 * (1.0 + q.norm());
    auto shift_eval = [&](auto&& f, double off) {
        VecX qq = q;
        qq[0] += off;
        return f(qq);
    };
    c.G = G_of(q);
    c.dG = richardson_d1([&](double o) { return shift_eval(G_of, o); }, hp);
    c.a = a_of(q);
    c.da = richardson_d1([&](double o) { return shift_eval(a_of, o); }, hf);
    c.b = b_of(q);
    c.db = richardson_d1([&](double o) { return shift_eval(b_of, o); }, hp);
    c.d2b = richardson_d2([&](double o) { return shift_eval(b_of, o); }, hp);
    c.w = w_of(q);
    c.dw = richardson_d1([&](double o) { return shift_eval(w_of, o); }, hp);
    c.d2w = richardson_d2([&](double o) { return shift_eval(w_of, o); }, hp);
    c.d3w = richardson_d3([&](double o) { return shift_eval(w_of, o); }, h3);
    return c;
}

VecX SpectralModelField::force_order2_direct(const VecX& q, const VecX& qd,
                                             const VecX& qdd) const {
    const int K = coords_;
    const int n = level_;

    // pointwise ingredients of the quoted expression
    auto pieces = [&](const VecX& qq) {
        PointData p = point(qq);
        struct Out {
            double D = 0;        // sum' <k|ndot><ndot|k>/Delta_kn
            MatC W;              // W(m, a) = <d_m n|N_a>
            Complex Y{0, 0};     // <n1_perp|ndot>
        } out;
        VecC kdot = VecC::Zero(field_.dim());
        for (int k = 0; k < field_.dim(); ++k) {
            if (k == n) continue;
            Complex c(0, 0);
            for (int a = 0; a < K; ++a) c += p.C(k, a) * qd[a];
            kdot[k] = c;
            out.D += std::norm(c) / (-p.frame.spec.gap(n, k));
        }
        out.W = MatC::Zero(K, K);
        for (int m = 0; m < K; ++m)
            for (int a = 0; a < K; ++a) {
                Complex acc(0, 0);
                for (int k = 0; k < field_.dim(); ++k) {
                    if (k == n) continue;
                    acc += std::conj(p.C(k, m)) * p.C(k, a) / p.frame.spec.gap(n, k);
                }
                out.W(m, a) = acc;
            }
        Complex y(0, 0);
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) {
                Complex acc(0, 0);
                for (int k = 0; k < field_.dim(); ++k) {
                    if (k == n) continue;
                    acc += std::conj(p.C(k, a) / p.frame.spec.gap(n, k)) * p.C(k, b);
                }
                y += Complex(0, 1) * qd[a] * qd[b] * acc;
            }
        out.Y = y;
        return out;
    };

    const auto p0 = pieces(q);
    const double h = options_.h_point * (1.0 + q.norm());

    VecX F = VecX::Zero(K);
    for (int m = 0; m < K; ++m) {
        auto shifted = [&](double off) {
            VecX qq = q;
            qq[m] += off;
            return pieces(qq);
        };
        const auto sp = shifted(h), sm = shifted(-h), sp2 = shifted(h / 2), sm2 = shifted(-h / 2);
        const double dD =
            (4.0 * (sp2.D - sm2.D) / h - (sp.D - sm.D) / (2.0 * h)) / 3.0;
        const Complex dY =
            (4.0 * (sp2.Y - sm2.Y) / h - (sp.Y - sm.Y) / (2.0 * h)) / 3.0;
        F[m] += dD + 2.0 * dY.imag();
    }

    // d/ds of X_m = -i qd_a W(m, a): advective part by differences along each
    // coordinate, velocity part analytic.
    std::vector<MatC> dW(K);  // dW[g](m, a) = d_g W(m, a)
    for (int g = 0; g < K; ++g) {
        auto shifted = [&](double off) {
            VecX qq = q;
            qq[g] += off;
            return pieces(qq).W;
        };
        dW[g] = (4.0 * (shifted(h / 2) - shifted(-h / 2)) / h -
                 (shifted(h) - shifted(-h)) / (2.0 * h)) /
                3.0;
    }
    for (int m = 0; m < K; ++m) {
        Complex dXds(0, 0);
        for (int g = 0; g < K; ++g)
            for (int a = 0; a < K; ++a)
                dXds += Complex(0, -1) * qd[g] * qd[a] * dW[g](m, a);
        for (int a = 0; a < K; ++a) dXds += Complex(0, -1) * qdd[a] * p0.W(m, a);
        F[m] += 2.0 * dXds.imag();
    }
    return F;
}

// ---------------------------------------------------------------------------
// SyntheticModelField

SyntheticModelField::SyntheticModelField(SyntheticSpec spec)
    : ModelField(spec.coords, spec.level, spec.epsilon, spec.mass,
                 spec.V.coords() == spec.coords ? spec.V : Polynomial::zero(spec.coords)),
      spec_(std::move(spec)) {}

EffectiveModel SyntheticModelField::at(const VecX& q) const {
    const int K = coords_;
    EffectiveModel m;
    m.q = q;
    m.level = level_;
    m.epsilon = epsilon_;
    m.mass = mass_;
    m.E = spec_.E ? spec_.E(q) : 0.0;
    m.V = V_.value(q);
    m.dV = V_.gradient(q);
    m.dE = VecX::Zero(K);
    if (spec_.E) {
        const double h = spec_.h * (1.0 + q.norm());
        for (int g = 0; g < K; ++g)
            m.dE[g] = richardson_d1(
                [&](double o) {
                    VecX qq = q;
                    qq[g] += o;
                    return spec_.E(qq);
                },
                h);
    }
    m.A = spec_.A ? spec_.A(q) : VecX::Zero(K);
    m.G = spec_.G ? spec_.G(q) : MatX::Zero(K, K);
    m.z = spec_.z ? spec_.z(q) : MatX::Zero(K, K);
    m.f = spec_.fsym ? spec_.fsym(q) : Tensor3(K);
    m.f_sym = m.f;

    // curvature kernel from the curl of A
    m.berry_curv = MatX::Zero(K, K);
    if (spec_.A) {
        const double h = spec_.h * (1.0 + q.norm());
        MatX dA(K, K);
        for (int g = 0; g < K; ++g) {
            const VecX d = richardson_d1(
                [&](double o) {
                    VecX qq = q;
                    qq[g] += o;
                    return spec_.A(qq);
                },
                h);
            dA.row(g) = d.transpose();
        }
        m.berry_curv = -0.5 * (dA - dA.transpose());
    }
    return m;
}

LocalTensors SyntheticModelField::local(const VecX& q, int order, bool with_connection) const {
    const int K = coords_;
    const double h = spec_.h * (1.0 + q.norm());
    const EffectiveModel m = at(q);

    LocalTensors lt;
    lt.order = order;
    lt.has_connection = with_connection;
    lt.E = m.E;
    lt.V = m.V;
    lt.dE = m.dE;
    lt.dV = m.dV;
    if (order >= 1) lt.curv = m.berry_curv;
    if (order >= 2) {
        lt.G = m.G;
        lt.dG = Tensor3(K);
        if (spec_.G)
            for (int g = 0; g < K; ++g) {
                const MatX d = richardson_d1(
                    [&](double o) {
                        VecX qq = q;
                        qq[g] += o;
                        return spec_.G(qq);
                    },
                    h);
                for (int a = 0; a < K; ++a)
                    for (int b = 0; b < K; ++b) lt.dG(g, a, b) = d(a, b);
            }
    }
    if (order >= 3) {
        lt.z = m.z;
        lt.fsym = m.f_sym;
        lt.dz = Tensor3(K);
        lt.dfsym = Tensor4(K);
        for (int g = 0; g < K; ++g) {
            if (spec_.z) {
                const MatX d = richardson_d1(
                    [&](double o) {
                        VecX qq = q;
                        qq[g] += o;
                        return spec_.z(qq);
                    },
                    h);
                for (int a = 0; a < K; ++a)
                    for (int b = 0; b < K; ++b) lt.dz(g, a, b) = d(a, b);
            }
            if (spec_.fsym) {
                const Tensor3 d = richardson_d1(
                    [&](double o) {
                        VecX qq = q;
                        qq[g] += o;
                        return spec_.fsym(qq);
                    },
                    h);
                for (int mm = 0; mm < K; ++mm)
                    for (int a = 0; a < K; ++a)
                        for (int b = 0; b < K; ++b) lt.dfsym(g, mm, a, b) = d(mm, a, b);
            }
        }
    }
    if (with_connection) {
        lt.A = m.A;
        lt.dA = MatX::Zero(K, K);
        if (spec_.A)
            for (int g = 0; g < K; ++g) {
                const VecX d = richardson_d1(
                    [&](double o) {
                        VecX qq = q;
                        qq[g] += o;
                        return spec_.A(qq);
                    },
                    h);
                lt.dA.row(g) = d.transpose();
            }
    }
    return lt;
}

MatX SyntheticModelField::d2z_directional(const VecX& q, const VecX& dir) const {
    const int K = coords_;
    if (!spec_.z || dir.norm() < 1e-12) return MatX::Zero(K, K);
    const double h = spec_.h * (1.0 + q.norm()) / dir.norm();
    auto eval = [&](double off) { return spec_.z(q + off * dir); };
    const MatX z0 = eval(0.0);
    const MatX coarse = (eval(h) - 2.0 * z0 + eval(-h)) / (h * h);
    const MatX fine = (eval(h / 2) - 2.0 * z0 + eval(-h / 2)) * (4.0 / (h * h));
    return (4.0 * fine - coarse) / 3.0;
}

// ---------------------------------------------------------------------------
// Forces

VecX force_order0(const LocalTensors& lt) { return lt.dE; }

VecX force_order1(const LocalTensors& lt, const VecX& qd) { return 2.0 * lt.curv * qd; }

VecX force_order2_el(const LocalTensors& lt, const VecX& qd, const VecX& qdd) {
    const int K = static_cast<int>(qd.size());
    VecX F = lt.G * qdd;
    for (int m = 0; m < K; ++m) {
        double acc = 0.0;
        for (int g = 0; g < K; ++g)
            for (int a = 0; a < K; ++a)
                acc += lt.dG(g, m, a) * qd[g] * qd[a] - 0.5 * lt.dG(m, g, a) * qd[g] * qd[a];
        F[m] += acc;
    }
    return F;
}

VecX force_order3_terms(const LocalTensors& lt, const MatX& d2z, const VecX& qd, const VecX& qdd,
                        const VecX& q3) {
    const int K = static_cast<int>(qd.size());
    VecX F = VecX::Zero(K);
    for (int m = 0; m < K; ++m) {
        double acc = 0.0;
        for (int a = 0; a < K; ++a) {
            acc += 2.0 * lt.z(m, a) * q3[a];
            for (int b = 0; b < K; ++b) {
                acc += 6.0 * lt.fsym(m, a, b) * qdd[a] * qd[b];
                acc += 3.0 * lt.dz(a, m, b) * qd[a] * qdd[b];
                acc += lt.dz(a, m, b) * qdd[a] * qd[b];
                acc += lt.dz(m, a, b) * qdd[a] * qd[b];
                for (int g = 0; g < K; ++g) {
                    acc += 3.0 * lt.dfsym(g, m, a, b) * qd[g] * qd[a] * qd[b];
                    acc -= lt.dfsym(m, a, b, g) * qd[a] * qd[b] * qd[g];
                }
            }
            acc += d2z(m, a) * qd[a];
        }
        F[m] = acc;
    }
    return F;
}

VecX force_order3_el(const ModelField& model, const LocalTensors& lt, const VecX& q,
                     const VecX& qd, const VecX& qdd, const VecX& q3) {
    return force_order3_terms(lt, model.d2z_directional(q, qd), qd, qdd, q3);
}

}  // namespace adialag
