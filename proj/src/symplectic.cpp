#include "adialag/symplectic.hpp"

#include <cmath>

namespace adialag {

VecX ExtendedState::packed() const {
    const int K = static_cast<int>(q.size());
    VecX y(3 * K);
    y << q, v, pi;
    return y;
}

ExtendedState ExtendedState::unpack(const VecX& y, int K) {
    return {y.segment(0, K), y.segment(K, K), y.segment(2 * K, K)};
}

namespace {

void require_invertible_branch(const ModelField& model, const MatX& z) {
    if (model.coords() % 2 != 0)
        throw UnsupportedError(
            "odd coordinate count: the constrained Hamiltonian branch is not implemented; use "
            "the Lagrangian constrained integrator");
    if (z.size() == 0 || z.cwiseAbs().maxCoeff() < 1e-13)
        throw UnsupportedError(
            "z tensor vanishes: the extended two-form has no symplectic inverse");
    if (std::abs(z.determinant()) < 1e-12 * std::pow(std::max(1.0, z.norm()), z.rows()))
        throw NumericalError("z tensor nearly singular: symplectic inverse ill-conditioned");
}

// L3(q, v): the third-order Lagrangian with the acceleration term split off.
double l3_value(const ModelField& model, const LocalTensors& lt, const VecX& v) {
    const double eps = model.epsilon();
    const double e2 = eps * eps, e3 = e2 * eps;
    const int K = model.coords();
    double L = -lt.V - lt.E + 0.5 * e2 * (model.mass() * v.squaredNorm() + v.dot(lt.G * v));
    L += eps * lt.A.dot(v);
    double cubic = 0.0;
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            for (int c = 0; c < K; ++c) cubic += lt.fsym(a, b, c) * v[a] * v[b] * v[c];
    return L + e3 * cubic;
}

}  // namespace

ExtendedState build_extended(const ModelField& model, const VecX& q, const VecX& v,
                             const VecX& vdot) {
    if (!model.has_smooth_connection())
        throw ValidationError(
            "extended description needs a model with a fixed smooth gauge (anchored)");
    const LocalTensors lt = model.local(q, 3, true);
    require_invertible_branch(model, lt.z);
    return ExtendedState{q, v, momentum(model, lt, v, vdot)};
}

MatX omega(const ModelField& model, const ExtendedState& state) {
    const int K = model.coords();
    const double e3 = std::pow(model.epsilon(), 3);
    const LocalTensors lt = model.local(state.q, 3, true);
    require_invertible_branch(model, lt.z);

    MatX B = MatX::Zero(K, K);  // Omega_{q_a, v_b}
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            double acc = 0.0;
            for (int g = 0; g < K; ++g) acc += state.v[g] * lt.dz(a, g, b);
            B(a, b) = -e3 * acc;
        }
    const MatX Z = -2.0 * e3 * lt.z;
    const MatX I = MatX::Identity(K, K);

    MatX O = MatX::Zero(3 * K, 3 * K);
    O.block(0, K, K, K) = B;
    O.block(0, 2 * K, K, K) = I;
    O.block(K, 0, K, K) = -B.transpose();
    O.block(K, K, K, K) = Z;
    O.block(2 * K, 0, K, K) = -I;
    return O;
}

MatX omega_inverse(const ModelField& model, const ExtendedState& state) {
    const int K = model.coords();
    const double e3 = std::pow(model.epsilon(), 3);
    const LocalTensors lt = model.local(state.q, 3, true);
    require_invertible_branch(model, lt.z);

    MatX B = MatX::Zero(K, K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            double acc = 0.0;
            for (int g = 0; g < K; ++g) acc += state.v[g] * lt.dz(a, g, b);
            B(a, b) = -e3 * acc;
        }
    const MatX Z = -2.0 * e3 * lt.z;
    const MatX Zi = Z.inverse();
    const MatX I = MatX::Identity(K, K);

    MatX Oi = MatX::Zero(3 * K, 3 * K);
    Oi.block(0, 2 * K, K, K) = -I;
    Oi.block(K, K, K, K) = Zi;
    Oi.block(K, 2 * K, K, K) = -Zi * B.transpose();
    Oi.block(2 * K, 0, K, K) = I;
    Oi.block(2 * K, K, K, K) = -B * Zi;
    Oi.block(2 * K, 2 * K, K, K) = B * Zi * B.transpose();
    return Oi;
}

double hamiltonian_value(const ModelField& model, const ExtendedState& state) {
    const LocalTensors lt = model.local(state.q, 3, true);
    return l3_value(model, lt, state.v) - state.pi.dot(state.v);
}

VecX hamiltonian_gradient(const ModelField& model, const ExtendedState& state) {
    const int K = model.coords();
    const double eps = model.epsilon();
    const double e2 = eps * eps, e3 = e2 * eps;
    const LocalTensors lt = model.local(state.q, 3, true);

    VecX grad(3 * K);
    // d/dq of L3(q, v)
    for (int g = 0; g < K; ++g) {
        double acc = -lt.dV[g] - lt.dE[g] + eps * lt.dA.row(g).dot(state.v);
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) {
                acc += 0.5 * e2 * lt.dG(g, a, b) * state.v[a] * state.v[b];
                for (int c = 0; c < K; ++c)
                    acc += e3 * lt.dfsym(g, a, b, c) * state.v[a] * state.v[b] * state.v[c];
            }
        grad[g] = acc;
    }
    // d/dv
    VecX dv = eps * lt.A + e2 * (model.mass() * state.v + lt.G * state.v) - state.pi;
    for (int m = 0; m < K; ++m) {
        double acc = 0.0;
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) acc += lt.fsym(m, a, b) * state.v[a] * state.v[b];
        dv[m] += 3.0 * e3 * acc;
    }
    grad.segment(K, K) = dv;
    grad.segment(2 * K, K) = -state.v;
    return grad;
}

double poisson_bracket(const ModelField& model, const ExtendedState& state, const Observable& C,
                       const Observable& D, double fd_step) {
    const int K = model.coords();
    auto grad_of = [&](const Observable& obs) {
        if (obs.gradient) return obs.gradient(state);
        VecX g(3 * K);
        const VecX y0 = state.packed();
        for (int i = 0; i < 3 * K; ++i) {
            VecX yp = y0, ym = y0;
            yp[i] += fd_step;
            ym[i] -= fd_step;
            g[i] = (obs.value(ExtendedState::unpack(yp, K)) -
                    obs.value(ExtendedState::unpack(ym, K))) /
                   (2.0 * fd_step);
        }
        return g;
    };
    const VecX gc = grad_of(C);
    const VecX gd = grad_of(D);
    return gc.dot(omega_inverse(model, state) * gd);
}

ExtendedTrajectory integrate_hamiltonian(const ModelField& model, const ExtendedState& state0,
                                         double s_end, const OdeOptions& opts, double sample_ds) {
    const int K = model.coords();
    OdeRhs rhs = [&](double, const VecX& y, VecX& dy) {
        const ExtendedState st = ExtendedState::unpack(y, K);
        dy = omega_inverse(model, st) * hamiltonian_gradient(model, st);
    };
    ExtendedTrajectory out;
    auto record = [&](double s, const VecX& y) {
        const ExtendedState st = ExtendedState::unpack(y, K);
        out.s.push_back(s);
        out.state.push_back(st);
        out.hamiltonian.push_back(hamiltonian_value(model, st));
    };
    integrate_ode(rhs, 0.0, s_end, state0.packed(), record, sample_ds, opts);
    return out;
}

}  // namespace adialag
