#include "adialag/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "adialag/util.hpp"

namespace adialag {

MetricField::MetricField(int coords, std::function<MatX(const VecX&)> g, double det_floor,
                         double h)
    : coords_(coords), g_(std::move(g)), det_floor_(det_floor), h_(h) {}

MetricField MetricField::from_model(std::shared_ptr<const ModelField> model) {
    const int K = model->coords();
    const double e2 = model->epsilon() * model->epsilon();
    const double M = model->mass();
    auto g = [model, K, e2, M](const VecX& q) {
        return MatX(e2 * (M * MatX::Identity(K, K) + model->at(q).G));
    };
    // integration halts when |det g| falls below this scale
    const double floor = 1e-10 * e2 * e2 * M * M;
    return MetricField(K, std::move(g), floor);
}

MetricField MetricField::analytic(int coords, std::function<MatX(const VecX&)> g,
                                  double det_floor) {
    return MetricField(coords, std::move(g), det_floor);
}

Tensor3 MetricField::d1(const VecX& q) const {
    const int K = coords_;
    const double h = h_ * (1.0 + q.norm());
    Tensor3 out(K);
    for (int c = 0; c < K; ++c) {
        const MatX d = richardson_d1(
            [&](double off) {
                VecX qq = q;
                qq[c] += off;
                return g_(qq);
            },
            h);
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) out(c, a, b) = d(a, b);
    }
    return out;
}

Tensor4 MetricField::d2(const VecX& q) const {
    const int K = coords_;
    const double h = h_ * (1.0 + q.norm());
    Tensor4 out(K);
    for (int c = 0; c < K; ++c) {
        const MatX d = richardson_d2(
            [&](double off) {
                VecX qq = q;
                qq[c] += off;
                return g_(qq);
            },
            h);
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) out(c, c, a, b) = d(a, b);
    }
    for (int c = 0; c < K; ++c)
        for (int d_ix = c + 1; d_ix < K; ++d_ix) {
            const MatX d = richardson_d2_cross(
                [&](double o1, double o2) {
                    VecX qq = q;
                    qq[c] += o1;
                    qq[d_ix] += o2;
                    return g_(qq);
                },
                h);
            for (int a = 0; a < K; ++a)
                for (int b = 0; b < K; ++b) {
                    out(c, d_ix, a, b) = d(a, b);
                    out(d_ix, c, a, b) = d(a, b);
                }
        }
    return out;
}

namespace {

MatX safe_inverse(const MatX& g, double det_floor, const VecX& q) {
    const double det = g.determinant();
    if (std::abs(det) < det_floor) {
        std::ostringstream os;
        os << "metric signature singularity: |det g| = " << std::abs(det) << " below floor "
           << det_floor << " at q = [";
        for (int i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
        os << "]";
        throw NumericalError(os.str());
    }
    return g.inverse();
}

Tensor3 christoffel_from(const MatX& g_inv, const Tensor3& dg) {
    const int K = dg.dim();
    Tensor3 gamma(K);
    for (int a = 0; a < K; ++a)
        for (int m = 0; m < K; ++m)
            for (int n = 0; n < K; ++n) {
                double acc = 0.0;
                for (int s = 0; s < K; ++s)
                    acc += g_inv(a, s) * (dg(m, s, n) + dg(n, s, m) - dg(s, m, n));
                gamma(a, m, n) = 0.5 * acc;
            }
    return gamma;
}

}  // namespace

Tensor3 christoffel(const MetricField& field, const VecX& q) {
    const MatX g = field.at(q);
    const MatX g_inv = safe_inverse(g, field.det_floor(), q);
    return christoffel_from(g_inv, field.d1(q));
}

MetricData metric_data(const MetricField& field, const VecX& q) {
    const int K = field.coords();
    MetricData md;
    md.q = q;
    md.g = field.at(q);
    md.det_g = md.g.determinant();
    md.tr_g = md.g.trace();
    md.g_inv = safe_inverse(md.g, field.det_floor(), q);

    const Tensor3 dg = field.d1(q);
    const Tensor4 d2g = field.d2(q);
    md.gamma = christoffel_from(md.g_inv, dg);

    // lowered connections Gamma_{m,bc} = g_{ma} Gamma^a_{bc}
    Tensor3 gamma_low(K);
    for (int m = 0; m < K; ++m)
        for (int b = 0; b < K; ++b)
            for (int c = 0; c < K; ++c) {
                double acc = 0.0;
                for (int a = 0; a < K; ++a) acc += md.g(m, a) * md.gamma(a, b, c);
                gamma_low(m, b, c) = acc;
            }

    md.riemann = Tensor4(K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            for (int c = 0; c < K; ++c)
                for (int d = 0; d < K; ++d) {
                    double val = 0.5 * (d2g(b, c, a, d) + d2g(a, d, b, c) - d2g(b, d, a, c) -
                                        d2g(a, c, b, d));
                    for (int m = 0; m < K; ++m)
                        for (int n = 0; n < K; ++n)
                            val += md.g_inv(m, n) * (gamma_low(n, b, c) * gamma_low(m, a, d) -
                                                     gamma_low(n, b, d) * gamma_low(m, a, c));
                    md.riemann(a, b, c, d) = val;
                }

    md.scalar_R = 0.0;
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            for (int c = 0; c < K; ++c)
                for (int d = 0; d < K; ++d)
                    md.scalar_R += md.g_inv(a, c) * md.g_inv(b, d) * md.riemann(a, b, c, d);

    Eigen::SelfAdjointEigenSolver<MatX> es(md.g);
    for (int i = 0; i < K; ++i) {
        if (es.eigenvalues()[i] > 0)
            ++md.n_positive;
        else
            ++md.n_negative;
    }
    return md;
}

double two_level_scalar_R(double rho, double mass, double eps, bool excited) {
    const double r3 = rho * rho * rho;
    if (!excited)
        return -3.0 * (1.0 + 16.0 * mass * r3) /
               (2.0 * eps * eps * mass * rho * rho * std::pow(1.0 + 4.0 * mass * r3, 2));
    return 3.0 * (16.0 * mass * r3 - 1.0) /
           (2.0 * eps * eps * mass * rho * rho * std::pow(1.0 - 4.0 * mass * r3, 2));
}

MetricData two_level_closed_form(const VecX& q, double mass, double eps, bool excited) {
    const double rho = q.norm();
    if (rho <= 0.0) throw NumericalError("two-level closed forms are singular at rho = 0");
    const double e2 = eps * eps;
    const double r5 = std::pow(rho, 5);
    const double r3 = rho * rho * rho;
    const double sgn = excited ? -1.0 : 1.0;

    MetricData md;
    md.q = q;
    md.g = MatX(2, 2);
    md.g(0, 0) = e2 * (mass + sgn * q[1] * q[1] / (4.0 * r5));
    md.g(1, 1) = e2 * (mass + sgn * q[0] * q[0] / (4.0 * r5));
    md.g(0, 1) = md.g(1, 0) = -sgn * e2 * q[0] * q[1] / (4.0 * r5);
    md.det_g = e2 * e2 * mass * (mass + sgn / (4.0 * r3));
    md.tr_g = md.g(0, 0) + md.g(1, 1);
    md.scalar_R = two_level_scalar_R(rho, mass, eps, excited);
    if (std::abs(md.det_g) > 0) md.g_inv = md.g.inverse();

    Eigen::SelfAdjointEigenSolver<MatX> es(md.g);
    for (int i = 0; i < 2; ++i) {
        if (es.eigenvalues()[i] > 0)
            ++md.n_positive;
        else
            ++md.n_negative;
    }
    return md;
}

namespace {

struct GeoRhs {
    const MetricField& field;
    bool with_deviation;

    void operator()(double, const VecX& y, VecX& dy) const {
        const int K = field.coords();
        const VecX q = y.segment(0, K);
        const VecX u = y.segment(K, K);
        const Tensor3 gamma = christoffel(field, q);
        dy.resize(y.size());
        dy.segment(0, K) = u;
        for (int a = 0; a < K; ++a) {
            double acc = 0.0;
            for (int m = 0; m < K; ++m)
                for (int n = 0; n < K; ++n) acc += gamma(a, m, n) * u[m] * u[n];
            dy[K + a] = -acc;
        }
        if (!with_deviation) return;
        const VecX v = y.segment(2 * K, K);
        const VecX w = y.segment(3 * K, K);
        const MetricData md = metric_data(field, q);
        for (int a = 0; a < K; ++a) {
            double gv = 0.0;
            for (int m = 0; m < K; ++m)
                for (int n = 0; n < K; ++n) gv += gamma(a, m, n) * v[m] * u[n];
            dy[2 * K + a] = w[a] - gv;
        }
        for (int a = 0; a < K; ++a) {
            double rr = 0.0;
            for (int b = 0; b < K; ++b)
                for (int c = 0; c < K; ++c)
                    for (int d = 0; d < K; ++d) {
                        double r_up = 0.0;
                        for (int s = 0; s < K; ++s)
                            r_up += md.g_inv(a, s) * md.riemann(s, b, c, d);
                        rr += r_up * u[b] * u[c] * v[d];
                    }
            double gw = 0.0;
            for (int m = 0; m < K; ++m)
                for (int n = 0; n < K; ++n) gw += gamma(a, m, n) * w[m] * u[n];
            dy[3 * K + a] = rr - gw;
        }
    }
};

GeodesicResult run_geodesic(const MetricField& field, VecX y0, bool with_deviation, double s_end,
                            const OdeOptions& opts, double sample_ds) {
    const int K = field.coords();
    GeodesicResult out;
    GeoRhs rhs{field, with_deviation};
    auto record = [&](double s, const VecX& y) {
        out.s.push_back(s);
        out.q.push_back(y.segment(0, K));
        out.u.push_back(y.segment(K, K));
        if (with_deviation) {
            out.v.push_back(y.segment(2 * K, K));
            out.w.push_back(y.segment(3 * K, K));
        }
        const MatX g = field.at(out.q.back());
        out.norm_uu.push_back(out.u.back().dot(g * out.u.back()));
    };
    try {
        integrate_ode([&rhs](double s, const VecX& y, VecX& dy) { rhs(s, y, dy); }, 0.0, s_end,
                      std::move(y0), record, sample_ds, opts);
    } catch (const NumericalError& e) {
        out.completed = false;
        out.message = e.what();
    }
    return out;
}

}  // namespace

GeodesicResult geodesic_integrate(const MetricField& field, const VecX& q0, const VecX& u0,
                                  double s_end, const OdeOptions& opts, double sample_ds) {
    VecX y0(2 * field.coords());
    y0 << q0, u0;
    return run_geodesic(field, std::move(y0), false, s_end, opts, sample_ds);
}

GeodesicResult jacobi_deviation(const MetricField& field, const VecX& q0, const VecX& u0,
                                const VecX& v0, const VecX& w0, double s_end,
                                const OdeOptions& opts, double sample_ds) {
    VecX y0(4 * field.coords());
    y0 << q0, u0, v0, w0;
    return run_geodesic(field, std::move(y0), true, s_end, opts, sample_ds);
}

double signature_change_radius(const MetricField& field, const VecX& dir, double lo, double hi,
                               double tol) {
    auto det_at = [&](double rho) { return field.at(rho * dir).determinant(); };
    double f_lo = det_at(lo), f_hi = det_at(hi);
    if (f_lo * f_hi > 0)
        throw NumericalError("signature bisection bracket does not straddle det g = 0");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = det_at(mid);
        if (f_mid == 0.0) return mid;
        if (f_lo * f_mid < 0) {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace adialag
