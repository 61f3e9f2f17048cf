#include <doctest.h>

#include <random>

#include "adialag/adiabatic.hpp"
#include "adialag/dynamics.hpp"
#include "adialag/util.hpp"

using namespace adialag;

namespace {

HamiltonianField real_two_level() {
    return HamiltonianField::pencil(MatC::Zero(2, 2), {pauli_x(), pauli_z()});
}

HamiltonianField complex_two_level() {
    return HamiltonianField::pencil(pauli_z(), {pauli_x(), pauli_y()});
}

// Unit circle q = (sin s, cos s) in the real model: gap 2, |<+|dn/ds>| = 1/2.
FrameSeries circle_series(int n_grid = 801, double s_end = 2.0) {
    const AnalyticPath path = AnalyticPath::circle(VecX::Zero(2), 1.0, -1.0, M_PI / 2.0);
    // circle() yields (cos(-s + pi/2), sin(-s + pi/2)) = (sin s, cos s)
    const SlowPath sp = SlowPath::sample(path, 0.0, s_end, n_grid);
    return FrameSeries::build(real_two_level(), sp, GaugePolicy::RealForced);
}

FrameSeries static_series(const HamiltonianField& field, const VecX& q0, int n = 41) {
    const SlowPath sp = SlowPath::sample(AnalyticPath::fixed_point(q0), 0.0, 1.0, n);
    return FrameSeries::build(field, sp, GaugePolicy::OverlapAligned);
}

}  // namespace

TEST_CASE("coefficients on a static path vanish") {
    VecX q0(2);
    q0 << 0.6, 0.8;
    const FrameSeries series = static_series(real_two_level(), q0);
    const CoefficientTables t = adiabatic_coefficients(series, 0, 2);
    for (int i = 0; i < series.size(); ++i) {
        CHECK(t.c[0][i].cwiseAbs().maxCoeff() < 1e-10);
        CHECK(t.c[1][i].cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("first-order coefficients on the circular path") {
    const FrameSeries series = circle_series();
    const CoefficientTables t = adiabatic_coefficients(series, 0, 1);
    const int n = series.size();

    SUBCASE("off-diagonal magnitude 1/4 at every grid point") {
        for (int i = 5; i < n - 5; i += 16) {
            const VecC c1 = c1_offdiagonal(series, 0, i);
            CHECK(std::abs(c1[1]) == doctest::Approx(0.25).epsilon(1e-6));
            CHECK(std::abs(t.c[0][i][1] - c1[1]) == 0.0);
        }
    }
    SUBCASE("diagonal is purely imaginary, i/8 at s = 1") {
        for (int i = 0; i < n; i += 10) CHECK(std::abs(t.c[0][i][0].real()) < 1e-10);
        const int i_mid = (n - 1) / 2;  // s = 1 on [0, 2]
        CHECK(series.path.s[i_mid] == doctest::Approx(1.0));
        CHECK(t.c[0][i_mid][0].imag() == doctest::Approx(0.125).epsilon(1e-7));
    }
    SUBCASE("doubling all gaps halves the coefficient") {
        const HamiltonianField doubled = real_two_level().scaled(2.0);
        const FrameSeries series2 =
            FrameSeries::build(doubled, series.path, GaugePolicy::RealForced);
        const VecC a = c1_offdiagonal(series, 0, 100);
        const VecC b = c1_offdiagonal(series2, 0, 100);
        CHECK(std::abs(b[1]) == doctest::Approx(0.5 * std::abs(a[1])).epsilon(1e-9));
    }
    SUBCASE("grid refinement converges at second order") {
        auto diag_at_1 = [](int n_grid) {
            const FrameSeries s = circle_series(n_grid);
            const CoefficientTables t1 = adiabatic_coefficients(s, 0, 1);
            return t1.c[0][(n_grid - 1) / 2][0].imag();
        };
        const double e_coarse = std::abs(diag_at_1(201) - 0.125);
        const double e_fine = std::abs(diag_at_1(401) - 0.125);
        CHECK(e_fine < e_coarse / 3.0);  // ~4x for O(ds^2)
    }
}

TEST_CASE("second-order coefficients") {
    const FrameSeries series = circle_series();
    const CoefficientTables t = adiabatic_coefficients(series, 0, 2);
    const int n = series.size();

    SUBCASE("explicit expression equals the generic recursion") {
        for (int i = 3; i < n - 3; i += 37) {
            const VecC explicit_c2 = c2_offdiagonal_explicit(series, 0, i);
            CHECK(std::abs(explicit_c2[1] - t.c[1][i][1]) < 1e-13);
        }
    }
    SUBCASE("normalization identity 2 Re c2_nn + <n1|n1> = 0") {
        for (int i = 2; i < n - 2; i += 25) {
            const double n1_sq = t.c[0][i].squaredNorm();
            CHECK(std::abs(2.0 * t.c[1][i][0].real() + n1_sq) < 1e-9);
        }
    }
    SUBCASE("matches direct Schrodinger integration on a clean-start arc") {
        // all path derivatives vanish at s = 0, so the series needs no
        // transient correction there
        const AnalyticPath arc = AnalyticPath::ramped_arc(VecX::Zero(2), 1.0, 0.3, 1.2, 0.8);
        const SlowPath sp = SlowPath::sample(arc, 0.0, 1.6, 801);
        const FrameSeries fs = FrameSeries::build(real_two_level(), sp, GaugePolicy::RealForced);
        const CoefficientTables tt = adiabatic_coefficients(fs, 0, 2);

        const int i_probe = 700;
        auto residual_at = [&](double eps) {
            OdeOptions opts;
            opts.rtol = 1e-11;
            opts.atol = 1e-13;
            const VecC psi0 = fs.frames[0].vec(0);
            const auto psi = schrodinger_on_path(real_two_level(), arc, eps, psi0, sp.s, opts);
            const double phase = -tt.energy_integral[i_probe] / eps + tt.berry_phase[i_probe];
            const VecC coeff_exact = fs.frames[i_probe].spec.vectors.adjoint() * psi[i_probe] *
                                     Complex(std::cos(phase), -std::sin(phase));
            const VecC coeff_series = tt.total(i_probe, eps, 2);
            return (coeff_exact - coeff_series).norm();
        };
        const double r1 = residual_at(0.08);
        const double r2 = residual_at(0.04);
        CHECK(r2 < r1 / 5.0);  // O(eps^3) residual
        CHECK(r1 < 1e-2);
    }
}

TEST_CASE("generic recursion sanity") {
    SUBCASE("grid too coarse is reported") {
        VecX q0(2);
        q0 << 1.0, 0.0;
        const FrameSeries series = static_series(real_two_level(), q0, 7);
        CHECK_THROWS_WITH_AS(adiabatic_coefficients(series, 0, 4), doctest::Contains("coarse"),
                             ValidationError);
    }
    SUBCASE("norm identity improves with truncation order") {
        const FrameSeries series = circle_series(1201);
        const int i_probe = 600;
        for (int m = 1; m <= 3; ++m) {
            const CoefficientTables t = adiabatic_coefficients(series, 0, m);
            std::vector<double> log_eps, log_res;
            for (double eps : {0.02, 0.04, 0.08}) {
                const double res = std::abs(t.total(i_probe, eps, m).squaredNorm() - 1.0);
                log_eps.push_back(std::log(eps));
                log_res.push_back(std::log(res));
            }
            const auto fit = linear_fit(log_eps, log_res);
            CHECK(std::abs(fit.first - (m + 1)) < 0.5);
        }
    }
}

TEST_CASE("N vectors") {
    SUBCASE("one-dimensional reference value") {
        auto field = HamiltonianField::pencil(pauli_z(), {pauli_x()});
        const GaugeFrame f = initial_frame(field, VecX::Zero(1), GaugePolicy::RealForced);
        const auto N = n_vectors(field, f, 0);
        CHECK(std::abs(f.vec(1).dot(N[0]) - Complex(0.25, 0)) < 1e-12);
        CHECK(std::abs(f.vec(0).dot(N[0])) < 1e-14);
    }
    SUBCASE("constant field gives zero") {
        auto constant = HamiltonianField::pencil(pauli_z(), {MatC::Zero(2, 2)});
        const GaugeFrame f = initial_frame(constant, VecX::Zero(1), GaugePolicy::Raw);
        CHECK(n_vectors(constant, f, 0)[0].norm() < 1e-14);
    }
    SUBCASE("|n1_perp> = -i qdot_a |N_a> against c1") {
        const FrameSeries series = circle_series();
        const int i = 200;
        const auto N = n_vectors(real_two_level(), series.frames[i], 0);
        const VecX qd = series.path.qd[i];
        VecC n1_perp = VecC::Zero(2);
        for (int a = 0; a < 2; ++a) n1_perp += Complex(0, -1) * qd[a] * N[a];
        const VecC c1 = c1_offdiagonal(series, 0, i);
        VecC n1_from_c = VecC::Zero(2);
        for (int k = 0; k < 2; ++k) n1_from_c += c1[k] * series.frames[i].vec(k);
        CHECK((n1_perp - n1_from_c).norm() < 1e-6);  // grid differences vs analytic
    }
}

TEST_CASE("wavefunction reconstruction") {
    SUBCASE("static field is a stationary state") {
        VecX q0(2);
        q0 << 0.6, 0.8;
        const auto field = real_two_level();
        const FrameSeries series = static_series(field, q0, 101);
        const CoefficientTables t = adiabatic_coefficients(series, 0, 2);
        const double eps = 0.1;
        const int i = 100;
        const VecC psi = reconstruct_wavefunction(series, t, eps, 2, i);
        const double s = series.path.s[i];
        const double phase = -series.frames[0].spec.energies[0] * s / eps;
        const VecC expect = series.frames[0].vec(0) * Complex(std::cos(phase), std::sin(phase));
        CHECK((psi - expect).norm() < 1e-9);
    }
    SUBCASE("order zero is the adiabatic state up to phases") {
        const FrameSeries series = circle_series(401);
        const CoefficientTables t = adiabatic_coefficients(series, 0, 1);
        const int i = 300;
        const VecC psi = reconstruct_wavefunction(series, t, 0.1, 0, i);
        const Complex overlap = series.frames[i].vec(0).dot(psi);
        CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-12);
    }
    SUBCASE("fidelity against exact integration improves with order") {
        const AnalyticPath arc = AnalyticPath::ramped_arc(VecX::Zero(2), 1.0, 0.3, 1.2, 0.8);
        const SlowPath sp = SlowPath::sample(arc, 0.0, 1.6, 801);
        const auto field = complex_two_level();
        const FrameSeries fs = FrameSeries::build(field, sp, GaugePolicy::OverlapAligned);
        const int i_probe = 720;
        OdeOptions opts;
        opts.rtol = 1e-11;
        opts.atol = 1e-13;

        for (int m : {1, 2, 3}) {
            const CoefficientTables t = adiabatic_coefficients(fs, 0, m);
            std::vector<double> log_eps, log_infid;
            for (double eps : {0.02, 0.04, 0.08}) {
                const VecC psi0 = fs.frames[0].vec(0);
                const auto psi = schrodinger_on_path(field, arc, eps, psi0, sp.s, opts);
                const VecC recon = reconstruct_wavefunction(fs, t, eps, m, i_probe);
                const Complex ov = recon.dot(psi[i_probe]);
                const double infid = std::sqrt(std::max(
                    0.0,
                    1.0 - std::norm(ov) / (recon.squaredNorm() * psi[i_probe].squaredNorm())));
                log_eps.push_back(std::log(eps));
                log_infid.push_back(std::log(std::max(infid, 1e-16)));
            }
            const auto fit = linear_fit(log_eps, log_infid);
            CHECK(std::abs(fit.first - (m + 1)) < 0.5);
        }
    }
    SUBCASE("gauge covariance: rephasing changes the state by a constant phase") {
        const AnalyticPath arc = AnalyticPath::ramped_arc(VecX::Zero(2), 1.0, 0.3, 1.2, 0.8);
        const SlowPath sp = SlowPath::sample(arc, 0.0, 1.6, 401);
        const auto field = complex_two_level();
        const FrameSeries fs = FrameSeries::build(field, sp, GaugePolicy::OverlapAligned);

        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const std::vector<double> ck = {u(rng), u(rng)};
        const std::vector<double> dk = {u(rng), u(rng)};
        GaugeShift shift{[ck, dk](int level, const VecX& q) {
            return ck[level] * q[0] + dk[level] * q[1];
        }};
        const FrameSeries fs2 = fs.rephased(shift);

        const CoefficientTables t1 = adiabatic_coefficients(fs, 0, 3);
        const CoefficientTables t2 = adiabatic_coefficients(fs2, 0, 3);
        const int i = 390;
        const VecC a = reconstruct_wavefunction(fs, t1, 0.05, 3, i);
        const VecC b = reconstruct_wavefunction(fs2, t2, 0.05, 3, i);
        CHECK(std::abs(std::abs(a.dot(b)) / (a.norm() * b.norm()) - 1.0) < 1e-9);
    }
}

TEST_CASE("action-angle map") {
    const MatC basis = MatC::Identity(3, 3);
    SUBCASE("basis vector") {
        VecC psi = VecC::Zero(3);
        psi[0] = 1.0;
        const ActionAngle aa = action_angle_map(psi, basis);
        CHECK(aa.action[0] == doctest::Approx(1.0));
        CHECK(aa.angle[0] == doctest::Approx(0.0));
        CHECK_FALSE(aa.defined[1]);
    }
    SUBCASE("balanced superposition") {
        VecC psi = VecC::Zero(3);
        psi[0] = 1.0 / std::sqrt(2.0);
        psi[1] = Complex(0, 1.0 / std::sqrt(2.0));
        const ActionAngle aa = action_angle_map(psi, basis);
        CHECK(aa.action[0] == doctest::Approx(0.5));
        CHECK(aa.action[1] == doctest::Approx(0.5));
        CHECK(aa.angle[0] == doctest::Approx(0.0));
        CHECK(aa.angle[1] == doctest::Approx(M_PI / 2.0));
    }
    SUBCASE("Hamilton equations reproduce the Schrodinger flow") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        MatC h(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j <= i; ++j) {
                const Complex v(u(rng), i == j ? 0.0 : u(rng));
                h(i, j) = v;
                h(j, i) = std::conj(v);
            }
        VecC psi0(3);
        psi0 << Complex(0.6, 0.1), Complex(0.2, -0.5), Complex(0.3, 0.4);
        psi0 /= psi0.norm();

        // Idot_n = dH/dphi_n, phidot_n = -dH/dI_n with H = <psi|h|psi>
        OdeRhs hamilton_rhs = [&](double, const VecX& y, VecX& dy) {
            VecC gamma(3);
            for (int n = 0; n < 3; ++n)
                gamma[n] = std::sqrt(std::max(y[n], 0.0)) *
                           Complex(std::cos(y[3 + n]), std::sin(y[3 + n]));
            const VecC hg = h * gamma;
            dy.resize(6);
            for (int n = 0; n < 3; ++n) {
                dy[n] = 2.0 * (std::conj(gamma[n]) * hg[n]).imag();
                dy[3 + n] = -(hg[n] / gamma[n]).real();
            }
        };
        const ActionAngle aa0 = action_angle_map(psi0, basis);
        VecX y0(6);
        for (int n = 0; n < 3; ++n) {
            y0[n] = aa0.action[n];
            y0[3 + n] = aa0.angle[n];
        }
        OdeOptions opts;
        opts.rtol = 1e-11;
        opts.atol = 1e-13;
        const VecX y1 = integrate_ode_to(hamilton_rhs, 0.0, 2.0, y0, opts);

        OdeRhs schro = [&](double, const VecX& y, VecX& dy) {
            VecC psi(3);
            psi.real() = y.segment(0, 3);
            psi.imag() = y.segment(3, 3);
            const VecC dpsi = Complex(0, -1) * (h * psi);
            dy.resize(6);
            dy.segment(0, 3) = dpsi.real();
            dy.segment(3, 3) = dpsi.imag();
        };
        VecX z0(6);
        z0.segment(0, 3) = psi0.real();
        z0.segment(3, 3) = psi0.imag();
        const VecX z1 = integrate_ode_to(schro, 0.0, 2.0, z0, opts);
        VecC psi1(3);
        psi1.real() = z1.segment(0, 3);
        psi1.imag() = z1.segment(3, 3);

        for (int n = 0; n < 3; ++n) CHECK(std::abs(y1[n] - std::norm(psi1[n])) < 1e-8);
    }
}
