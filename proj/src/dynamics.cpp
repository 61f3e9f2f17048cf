#include "adialag/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "adialag/util.hpp"

namespace adialag {

Order order_from_string(const std::string& s) {
    if (s == "O0") return Order::O0;
    if (s == "O1") return Order::O1;
    if (s == "O2") return Order::O2;
    if (s == "O3") return Order::O3;
    if (s == "O4") return Order::O4;
    throw ValidationError("unknown truncation order '" + s + "' (expected O0..O4)");
}

std::string order_to_string(Order o) {
    switch (o) {
        case Order::O0: return "O0";
        case Order::O1: return "O1";
        case Order::O2: return "O2";
        case Order::O3: return "O3";
        case Order::O4: return "O4";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Exact coupled dynamics (fast time)

VecX mean_force(const HamiltonianField& field, const VecX& q, const VecC& psi) {
    VecX f(field.coords());
    for (int mu = 0; mu < field.coords(); ++mu)
        f[mu] = psi.dot(field.derivative(q, mu) * psi).real();
    return f;
}

Trajectory integrate_exact(const HamiltonianField& field, const Polynomial& V, double mass,
                           const VecC& psi0, const VecX& q0, const VecX& qdot0_fast, double t_end,
                           const OdeOptions& opts, double sample_dt) {
    const int d = field.dim();
    const int K = field.coords();
    if (std::abs(psi0.norm() - 1.0) > 1e-9)
        throw ValidationError("exact run needs a normalized initial state");

    VecX y0(2 * d + 2 * K);
    y0.segment(0, d) = psi0.real();
    y0.segment(d, d) = psi0.imag();
    y0.segment(2 * d, K) = q0;
    y0.segment(2 * d + K, K) = qdot0_fast;

    auto unpack_psi = [d](const VecX& y) {
        VecC psi(d);
        psi.real() = y.segment(0, d);
        psi.imag() = y.segment(d, d);
        return psi;
    };

    OdeRhs rhs = [&](double, const VecX& y, VecX& dy) {
        const VecC psi = unpack_psi(y);
        const VecX q = y.segment(2 * d, K);
        const VecX p = y.segment(2 * d + K, K);
        const MatC h = field(q);
        const VecC dpsi = Complex(0, -1) * (h * psi);
        dy.resize(y.size());
        dy.segment(0, d) = dpsi.real();
        dy.segment(d, d) = dpsi.imag();
        dy.segment(2 * d, K) = p;
        dy.segment(2 * d + K, K) = (-V.gradient(q) - mean_force(field, q, psi)) / mass;
    };

    Trajectory traj;
    traj.fast_time = true;
    auto record = [&](double t, const VecX& y) {
        const VecC psi = unpack_psi(y);
        const VecX q = y.segment(2 * d, K);
        const VecX p = y.segment(2 * d + K, K);
        traj.t.push_back(t);
        traj.q.push_back(q);
        traj.qd.push_back(p);
        traj.psi.push_back(psi);
        traj.psi_norm.push_back(psi.norm());
        const double kinetic = 0.5 * mass * p.squaredNorm();
        traj.total_energy.push_back(kinetic + V.value(q) + psi.dot(field(q) * psi).real());
    };
    integrate_ode(rhs, 0.0, t_end, std::move(y0), record, sample_dt, opts);
    return traj;
}

std::vector<VecC> schrodinger_on_path(const HamiltonianField& field, const AnalyticPath& path,
                                      double eps, const VecC& psi0,
                                      const std::vector<double>& s_out, const OdeOptions& opts) {
    const int d = field.dim();
    if (s_out.size() < 2) throw ValidationError("need at least two output times");
    const double ds = s_out[1] - s_out[0];

    VecX y0(2 * d);
    y0.segment(0, d) = psi0.real();
    y0.segment(d, d) = psi0.imag();

    OdeRhs rhs = [&](double s, const VecX& y, VecX& dy) {
        VecC psi(d);
        psi.real() = y.segment(0, d);
        psi.imag() = y.segment(d, d);
        const VecC dpsi = Complex(0, -1.0 / eps) * (field(path.q(s)) * psi);
        dy.resize(2 * d);
        dy.segment(0, d) = dpsi.real();
        dy.segment(d, d) = dpsi.imag();
    };

    std::vector<VecC> out;
    auto record = [&](double, const VecX& y) {
        VecC psi(d);
        psi.real() = y.segment(0, d);
        psi.imag() = y.segment(d, d);
        out.push_back(psi);
    };
    integrate_ode(rhs, s_out.front(), s_out.back(), std::move(y0), record, ds, opts);
    if (out.size() != s_out.size())
        throw NumericalError("prescribed-path integration produced a mismatched sample count");
    return out;
}

// ---------------------------------------------------------------------------
// Effective equations of motion

namespace {

// All forces of the truncated equation of motion except the 2 eps^3 z q3
// term; affine in qdd. d2z is the precomputed directional second derivative
// of z along qd (ignored below order 3).
VecX eom_rest(const ModelField& model, const LocalTensors& lt, Order order, const VecX& qd,
              const VecX& qdd, const MatX& d2z) {
    const double eps = model.epsilon();
    const double e2 = eps * eps;
    const int K = model.coords();

    VecX F = lt.dV + lt.dE + e2 * model.mass() * qdd;
    if (order >= Order::O1) F += eps * force_order1(lt, qd);
    if (order >= Order::O2) F += e2 * force_order2_el(lt, qd, qdd);
    if (order == Order::O3)
        F += e2 * eps * force_order3_terms(lt, d2z, qd, qdd, VecX::Zero(K));
    return F;
}

MatX d2z_for(const ModelField& model, Order order, const VecX& q, const VecX& qd) {
    if (order == Order::O3) return model.d2z_directional(q, qd);
    return MatX::Zero(model.coords(), model.coords());
}

// Acceleration for truncations whose equation stays second order: solve the
// affine-in-qdd system eom_rest = 0.
VecX solve_accel(const ModelField& model, const LocalTensors& lt, Order order, const VecX& qd,
                 const MatX& d2z) {
    const int K = model.coords();
    const VecX zero = VecX::Zero(K);
    const VecX F0 = eom_rest(model, lt, order, qd, zero, d2z);
    MatX A(K, K);
    for (int j = 0; j < K; ++j) {
        VecX ej = VecX::Zero(K);
        ej[j] = 1.0;
        A.col(j) = eom_rest(model, lt, order, qd, ej, d2z) - F0;
    }
    return A.lu().solve(-F0);
}

bool z_negligible(const MatX& z) {
    return z.size() == 0 || z.cwiseAbs().maxCoeff() < 1e-13;
}

}  // namespace

VecX accel_order2(const ModelField& model, const VecX& q, const VecX& qd) {
    const LocalTensors lt = model.local(q, 2);
    return solve_accel(model, lt, Order::O2, qd, MatX());
}

VecX q3_solve_order3(const ModelField& model, const VecX& q, const VecX& qd, const VecX& qdd) {
    const int K = model.coords();
    if (K % 2 != 0) throw UnsupportedError("direct third-derivative solve needs even K");
    const LocalTensors lt = model.local(q, 3);
    const double e3 = std::pow(model.epsilon(), 3);
    const MatX zm = 2.0 * e3 * lt.z;
    if (std::abs(lt.z.determinant()) < 1e-12 * std::pow(std::max(1.0, lt.z.norm()), K))
        throw NumericalError("z tensor nearly degenerate; third-derivative solve ill-posed");
    const VecX phi = -eom_rest(model, lt, Order::O3, qd, qdd, d2z_for(model, Order::O3, q, qd));
    return zm.lu().solve(phi);
}

VecX accel_order3_consistent(const ModelField& model, const VecX& q, const VecX& qd,
                             int iterations) {
    const int K = model.coords();
    VecX a = accel_order2(model, q, qd);
    if (K % 2 != 0) return a;  // constrained branch keeps the order-2 value
    const LocalTensors lt = model.local(q, 3);
    if (z_negligible(lt.z)) return a;
    const double e3 = std::pow(model.epsilon(), 3);
    const double eta = 1e-4;

    const MatX d2z = d2z_for(model, Order::O3, q, qd);
    for (int it = 0; it < iterations; ++it) {
        // slow-manifold estimate of q3 = d/ds(accel) along the flow
        const VecX a_plus = accel_order2(model, q + eta * qd, qd + eta * a);
        const VecX a_minus = accel_order2(model, q - eta * qd, qd - eta * a);
        const VecX adot = (a_plus - a_minus) / (2.0 * eta);
        // solve the full order-3 equation for qdd with q3 held at adot
        const VecX F0 = eom_rest(model, lt, Order::O3, qd, VecX::Zero(K), d2z);
        const VecX rhs0 = F0 + 2.0 * e3 * lt.z * adot;
        MatX A(K, K);
        for (int j = 0; j < K; ++j) {
            VecX ej = VecX::Zero(K);
            ej[j] = 1.0;
            A.col(j) = eom_rest(model, lt, Order::O3, qd, ej, d2z) - F0;
        }
        a = A.lu().solve(-rhs0);
    }
    return a;
}

OddKSolve odd_k_constraint(const ModelField& model, const VecX& q, const VecX& qd,
                           const VecX& qdd) {
    const int K = model.coords();
    if (K % 2 == 0) throw UnsupportedError("constraint branch applies to odd K");
    const double e3 = std::pow(model.epsilon(), 3);

    auto phi_at = [&](const VecX& qq, const VecX& qqd, const VecX& qqdd) {
        const LocalTensors lt = model.local(qq, 3);
        return VecX(
            -eom_rest(model, lt, Order::O3, qqd, qqdd, d2z_for(model, Order::O3, qq, qqd)));
    };
    auto null_dir = [&](const VecX& qq) {
        const LocalTensors lt = model.local(qq, 3);
        Eigen::JacobiSVD<MatX> svd(lt.z, Eigen::ComputeFullV);
        const VecX sv = svd.singularValues();
        if (K >= 3 && sv[K - 2] < 1e-10 * std::max(1.0, sv[0]))
            throw UnsupportedError("z tensor has more than one null direction");
        return VecX(svd.matrixV().col(K - 1));
    };

    OddKSolve out;
    out.null_direction = null_dir(q);
    const VecX phi0 = phi_at(q, qd, qdd);
    out.residual = out.null_direction.dot(phi0);

    const LocalTensors lt = model.local(q, 3);
    const MatX zm = 2.0 * e3 * lt.z;
    // components perpendicular to the null direction via the pseudo-inverse
    const VecX w = zm.completeOrthogonalDecomposition().solve(phi0);

    // scalar constraint Phi = y0(q) . phi(q, qd, qdd); d Phi/ds = 0 fixes the
    // null component of q3
    auto Phi = [&](const VecX& qq, const VecX& qqd, const VecX& qqdd) {
        return null_dir(qq).dot(phi_at(qq, qqd, qqdd));
    };
    const double eta = 1e-5 * (1.0 + qd.norm());
    const double advective =
        (Phi(q + eta * qd, qd + eta * qdd, qdd) - Phi(q - eta * qd, qd - eta * qdd, qdd)) /
        (2.0 * eta);
    // Phi is affine in qdd, so unit probes give the exact gradient
    VecX dPhi_dqdd(K);
    const double phi_base = Phi(q, qd, qdd);
    for (int j = 0; j < K; ++j) {
        VecX ej = VecX::Zero(K);
        ej[j] = 1.0;
        dPhi_dqdd[j] = Phi(q, qd, qdd + ej) - phi_base;
    }
    const double denom = dPhi_dqdd.dot(out.null_direction);
    if (std::abs(denom) < 1e-14)
        throw NumericalError("degenerate null-direction projection in constrained solve");
    const double c = -(advective + dPhi_dqdd.dot(w)) / denom;
    out.q3 = w + c * out.null_direction;
    return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

VecX momentum(const ModelField& model, const LocalTensors& lt, const VecX& qd, const VecX& qdd) {
    const double eps = model.epsilon();
    const double e2 = eps * eps, e3 = e2 * eps;
    const int K = model.coords();
    VecX p = e2 * (model.mass() * qd + lt.G * qd);
    if (lt.has_connection) p += eps * lt.A;
    for (int m = 0; m < K; ++m) {
        double acc = 0.0;
        for (int a = 0; a < K; ++a) {
            acc += 2.0 * lt.z(m, a) * qdd[a];
            for (int b = 0; b < K; ++b) {
                acc += 3.0 * lt.fsym(m, a, b) * qd[a] * qd[b];
                acc += lt.dz(a, m, b) * qd[a] * qd[b];
            }
        }
        p[m] += e3 * acc;
    }
    return p;
}

double energy_order3(const LocalTensors& lt, double eps, double mass, const VecX& qd,
                     const VecX& qdd) {
    const double e2 = eps * eps, e3 = e2 * eps;
    const int K = static_cast<int>(qd.size());
    double E = lt.V + lt.E + 0.5 * e2 * mass * qd.squaredNorm();
    if (lt.order >= 2) E += 0.5 * e2 * qd.dot(lt.G * qd);
    if (lt.order >= 3) {
        double cubic = 0.0;
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                for (int c = 0; c < K; ++c) cubic += lt.fsym(a, b, c) * qd[a] * qd[b] * qd[c];
        E += 2.0 * e3 * cubic + 2.0 * e3 * qd.dot(lt.z * qdd);
    }
    return E;
}

double energy_order4(const ModelField& model, const VecX& q, const VecX& qd, const VecX& qdd,
                     const VecX& q3) {
    const Order4Coefficients c = model.order4(q);
    const double eps = model.epsilon();
    const double e2 = eps * eps, e4 = e2 * e2;
    const double M = model.mass();
    const double v = qd[0], a = qdd[0], j = q3[0];
    const double L = -model.potential(q) - model.at(q).E + 0.5 * e2 * (M + c.G) * v * v +
                     e4 * (c.a * v * v * v * v + c.b * a * v * v + c.w * v * j);
    const double P3 = e4 * c.w * v;
    const double P2 = e4 * (c.b * v * v - c.dw * v * v - c.w * a);
    const double P1 = e2 * (M + c.G) * v +
                      e4 * ((4.0 * c.a - c.db + c.d2w) * v * v * v + 3.0 * c.dw * v * a +
                            2.0 * c.w * j);
    return P1 * v + P2 * a + P3 * j - L;
}

MatX spin_tensor(const LocalTensors& lt, double eps, const VecX& qd) {
    const int K = static_cast<int>(qd.size());
    const double e3 = eps * eps * eps;
    MatX S = MatX::Zero(K, K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            double acc = 0.0;
            for (int g = 0; g < K; ++g)
                acc += lt.z(b, g) * qd[g] * qd[a] - lt.z(a, g) * qd[g] * qd[b];
            S(a, b) = e3 * acc;
        }
    return S;
}

AngularMomentum angular_momentum(const ModelField& model, const LocalTensors& lt, const VecX& q,
                                 const VecX& qd, const VecX& qdd) {
    const int K = model.coords();
    if (K < 2) throw UnsupportedError("angular momentum needs K >= 2");
    const VecX p = momentum(model, lt, qd, qdd);
    AngularMomentum am;
    am.orbital = p * q.transpose() - q * p.transpose();  // L_ab = p_a q_b - p_b q_a
    am.spin = spin_tensor(lt, model.epsilon(), qd);
    am.total = am.orbital + am.spin;
    return am;
}

// ---------------------------------------------------------------------------
// Effective integrators

Trajectory integrate_effective(const ModelField& model, Order order, const EffInit& init,
                               double s_begin, double s_end, const OdeOptions& opts,
                               double sample_ds) {
    const int K = model.coords();
    const double eps = model.epsilon();

    if (order == Order::O4) {
        if (K != 1) throw UnsupportedError("fourth-order truncation is defined for K = 1 only");
        model.order4(init.q);  // validates real field
    }

    Trajectory traj;
    traj.fast_time = false;
    traj.epsilon = eps;

    const bool odd_k = (K % 2 == 1);
    // z == 0 collapses the third-order term; the equation stays second order.
    bool degenerate_z = false;
    if (order == Order::O3) degenerate_z = z_negligible(model.local(init.q, 3).z);

    if (order <= Order::O2 || (order == Order::O3 && degenerate_z)) {
        int lt_order = 0;
        if (order == Order::O1) lt_order = 1;
        if (order == Order::O2) lt_order = 2;
        if (order == Order::O3) lt_order = 3;
        OdeRhs rhs = [&, lt_order](double, const VecX& y, VecX& dy) {
            const VecX q = y.segment(0, K), qd = y.segment(K, K);
            const LocalTensors lt = model.local(q, lt_order);
            const VecX a = solve_accel(model, lt, order, qd, d2z_for(model, order, q, qd));
            dy.resize(2 * K);
            dy.segment(0, K) = qd;
            dy.segment(K, K) = a;
        };
        VecX y0(2 * K);
        y0 << init.q, init.qd;
        auto record = [&](double s, const VecX& y) {
            const VecX q = y.segment(0, K), qd = y.segment(K, K);
            const LocalTensors lt = model.local(q, lt_order);
            traj.t.push_back(s);
            traj.q.push_back(q);
            traj.qd.push_back(qd);
            traj.qdd.push_back(solve_accel(model, lt, order, qd, d2z_for(model, order, q, qd)));
            traj.energy.push_back(energy_order3(lt, eps, model.mass(), qd, traj.qdd.back()));
        };
        integrate_ode(rhs, s_begin, s_end, std::move(y0), record, sample_ds, opts);
        return traj;
    }

    if (order == Order::O3) {
        const VecX qdd0 = init.qdd ? *init.qdd : accel_order2(model, init.q, init.qd);
        if (odd_k) {
            const OddKSolve check = odd_k_constraint(model, init.q, init.qd, qdd0);
            const double scale = std::max(1.0, qdd0.norm());
            if (std::abs(check.residual) > 1e-8 * scale) {
                std::ostringstream os;
                os << "odd-K initial data violates the null-direction constraint: residual = "
                   << check.residual;
                throw ValidationError(os.str());
            }
        }
        OdeRhs rhs = [&](double, const VecX& y, VecX& dy) {
            const VecX q = y.segment(0, K), qd = y.segment(K, K), qdd = y.segment(2 * K, K);
            const VecX q3 =
                odd_k ? odd_k_constraint(model, q, qd, qdd).q3 : q3_solve_order3(model, q, qd, qdd);
            dy.resize(3 * K);
            dy.segment(0, K) = qd;
            dy.segment(K, K) = qdd;
            dy.segment(2 * K, K) = q3;
        };
        VecX y0(3 * K);
        y0 << init.q, init.qd, qdd0;
        auto record = [&](double s, const VecX& y) {
            const VecX q = y.segment(0, K), qd = y.segment(K, K), qdd = y.segment(2 * K, K);
            traj.t.push_back(s);
            traj.q.push_back(q);
            traj.qd.push_back(qd);
            traj.qdd.push_back(qdd);
            const LocalTensors lt = model.local(q, 3);
            traj.energy.push_back(energy_order3(lt, eps, model.mass(), qd, qdd));
            if (odd_k) {
                const OddKSolve sol = odd_k_constraint(model, q, qd, qdd);
                traj.q3.push_back(sol.q3);
                traj.constraint_residual.push_back(sol.residual);
            } else {
                traj.q3.push_back(q3_solve_order3(model, q, qd, qdd));
            }
        };
        integrate_ode(rhs, s_begin, s_end, std::move(y0), record, sample_ds, opts);
        return traj;
    }

    // O4, K = 1 scalar quartic equation
    const double e2 = eps * eps, e4 = e2 * e2;
    const double M = model.mass();
    auto q4_of = [&](const VecX& q, double v, double a, double j) {
        const Order4Coefficients c = model.order4(q);
        const double dVdq = model.potential_gradient(q)[0];
        const double dEdq = model.local(q, 0).dE[0];
        if (std::abs(c.w) < 1e-14)
            throw NumericalError("fourth-order coefficient w vanishes; quartic solve ill-posed");
        const double rhs = -(dVdq + dEdq) - e2 * ((M + c.G) * a + 0.5 * c.dG * v * v) +
                           e4 * ((-3.0 * c.da + c.d2b - c.d3w) * v * v * v * v +
                                 (4.0 * c.db - 12.0 * c.a - 6.0 * c.d2w) * v * v * a -
                                 3.0 * c.dw * a * a - 4.0 * c.dw * v * j);
        return rhs / (2.0 * e4 * c.w);
    };
    VecX qdd0(1), q30(1);
    qdd0 = init.qdd ? *init.qdd : accel_order2(model, init.q, init.qd);
    if (init.q3)
        q30 = *init.q3;
    else {
        const double eta = 1e-4;
        const VecX ap = accel_order2(model, init.q + eta * init.qd, init.qd + eta * qdd0);
        const VecX am = accel_order2(model, init.q - eta * init.qd, init.qd - eta * qdd0);
        q30 = (ap - am) / (2.0 * eta);
    }
    OdeRhs rhs = [&](double, const VecX& y, VecX& dy) {
        VecX q(1);
        q << y[0];
        dy.resize(4);
        dy[0] = y[1];
        dy[1] = y[2];
        dy[2] = y[3];
        dy[3] = q4_of(q, y[1], y[2], y[3]);
    };
    VecX y0(4);
    y0 << init.q[0], init.qd[0], qdd0[0], q30[0];
    auto record = [&](double s, const VecX& y) {
        VecX q(1), v(1), a(1), j(1);
        q << y[0];
        v << y[1];
        a << y[2];
        j << y[3];
        traj.t.push_back(s);
        traj.q.push_back(q);
        traj.qd.push_back(v);
        traj.qdd.push_back(a);
        traj.q3.push_back(j);
        traj.energy.push_back(energy_order4(model, q, v, a, j));
    };
    integrate_ode(rhs, s_begin, s_end, std::move(y0), record, sample_ds, opts);
    return traj;
}

// ---------------------------------------------------------------------------
// Zitterbewegung and equation-of-motion residuals

ZitterResult zitterbewegung_residual(const ModelField& model, const Trajectory& traj) {
    if (traj.fast_time) throw ValidationError("zitterbewegung check expects a slow-time run");
    const int n = traj.size();
    if (n < 3) throw ValidationError("trajectory too short");
    const int K = model.coords();
    const double eps = model.epsilon();
    const double ds = traj.t[1] - traj.t[0];

    // velocity-projected spin at every sample
    std::vector<VecX> proj(n), p_minus_dl(n);
    std::vector<bool> ok(n);
    for (int i = 0; i < n; ++i) {
        const LocalTensors lt = model.local(traj.q[i], 3);
        const VecX& qd = traj.qd[i];
        const VecX& qdd = traj.qdd[i];
        const double v2 = qd.squaredNorm();
        ok[i] = v2 > 1e-12;
        const MatX S = spin_tensor(lt, eps, qd);
        proj[i] = ok[i] ? VecX((S.transpose() * qd) / v2) : VecX::Zero(K);

        // p - dL/dqd, the anomalous part
        const VecX p = momentum(model, lt, qd, qdd);
        VecX dl = eps * eps * (model.mass() * qd + lt.G * qd);
        if (lt.has_connection) dl += eps * lt.A;
        const double e3 = std::pow(eps, 3);
        for (int m = 0; m < K; ++m) {
            double acc = 0.0;
            for (int a = 0; a < K; ++a) {
                acc += lt.z(m, a) * qdd[a];
                for (int b = 0; b < K; ++b) acc += 3.0 * lt.fsym(m, a, b) * qd[a] * qd[b];
            }
            dl[m] += e3 * acc;
        }
        p_minus_dl[i] = p - dl;
    }

    ZitterResult out;
    for (int i = 1; i + 1 < n; ++i) {
        out.s.push_back(traj.t[i]);
        out.defined.push_back(ok[i - 1] && ok[i] && ok[i + 1]);
        if (!out.defined.back()) {
            out.residual.push_back(VecX::Zero(K));
            continue;
        }
        const VecX dproj = (proj[i + 1] - proj[i - 1]) / (2.0 * ds);
        const VecX r = p_minus_dl[i] - dproj;
        out.residual.push_back(r);
        out.max_residual = std::max(out.max_residual, r.cwiseAbs().maxCoeff());
    }
    return out;
}

double el_residual(const ModelField& model, Order order, const Trajectory& traj, int index) {
    if (order == Order::O4) throw UnsupportedError("residual check covers orders O0..O3");
    const VecX& q = traj.q[index];
    const VecX& qd = traj.qd[index];
    const VecX& qdd = traj.qdd[index];
    int lt_order = 0;
    if (order == Order::O1) lt_order = 1;
    if (order == Order::O2) lt_order = 2;
    if (order == Order::O3) lt_order = 3;
    const LocalTensors lt = model.local(q, lt_order);
    VecX r = eom_rest(model, lt, order, qd, qdd, d2z_for(model, order, q, qd));
    if (order == Order::O3 && !traj.q3.empty() && !z_negligible(lt.z))
        r += 2.0 * std::pow(model.epsilon(), 3) * lt.z * traj.q3[index];
    return r.cwiseAbs().maxCoeff();
}

VecC dressed_initial_state(const ModelField& model, const HamiltonianField& field, const VecX& q,
                           const VecX& qd, double eps, int order) {
    const GaugePolicy policy =
        field.is_real() ? GaugePolicy::RealForced : GaugePolicy::OverlapAligned;
    if (order <= 0) {
        return initial_frame(field, q, policy).vec(model.level());
    }
    const VecX qdd = accel_order2(model, q, qd);
    VecX q3 = VecX::Zero(model.coords());
    {
        const double eta = 1e-4;
        const VecX ap = accel_order2(model, q + eta * qd, qd + eta * qdd);
        const VecX am = accel_order2(model, q - eta * qd, qd - eta * qdd);
        q3 = (ap - am) / (2.0 * eta);
    }
    AnalyticPath taylor;
    taylor.q = [=](double s) {
        return VecX(q + s * qd + 0.5 * s * s * qdd + s * s * s / 6.0 * q3);
    };
    taylor.qdot = [=](double s) { return VecX(qd + s * qdd + 0.5 * s * s * q3); };
    taylor.qddot = [=](double s) { return VecX(qdd + s * q3); };
    taylor.q3 = [=](double) { return q3; };

    const double delta = 1e-3;
    const int half = 2 * order + 2;
    const SlowPath path = SlowPath::sample(taylor, -half * delta, half * delta, 2 * half + 1);
    const FrameSeries series = FrameSeries::build(field, path, policy);
    const CoefficientTables tables = adiabatic_coefficients(series, model.level(), order);
    VecC psi = reconstruct_wavefunction(series, tables, eps, order, half);
    return psi / psi.norm();
}

}  // namespace adialag
