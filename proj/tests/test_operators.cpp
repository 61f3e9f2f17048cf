#include <doctest.h>

#include <random>

#include "adialag/scenario.hpp"
#include "adialag/spectrum.hpp"
#include "adialag/util.hpp"

using namespace adialag;

namespace {

HamiltonianField real_two_level() {
    return HamiltonianField::pencil(MatC::Zero(2, 2), {pauli_x(), pauli_z()});
}

HamiltonianField complex_two_level() {
    return HamiltonianField::pencil(pauli_z(), {pauli_x(), pauli_y()});
}

VecX vec2(double a, double b) {
    VecX v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("linear pencil evaluation") {
    const auto field = real_two_level();
    const MatC h = field(vec2(1.0, 0.0));
    CHECK(std::abs(h(0, 0)) < 1e-15);
    CHECK(std::abs(h(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(h(1, 0) - 1.0) < 1e-15);

    CHECK((field(vec2(0.0, 0.0))).cwiseAbs().maxCoeff() < 1e-15);

    const MatC hz = field(vec2(0.0, 1.0));
    CHECK(std::abs(hz(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(hz(1, 1) + 1.0) < 1e-15);
    CHECK(std::abs(hz(0, 1)) < 1e-15);
}

TEST_CASE("non-Hermitian evaluator is rejected with asymmetry report") {
    auto bad = HamiltonianField::evaluator(2, 1, [](const VecX&) {
        MatC m(2, 2);
        m << 0.0, 1.0, 0.5, 0.0;
        return m;
    });
    CHECK_THROWS_WITH_AS(bad(VecX::Zero(1)), doctest::Contains("non-Hermitian"),
                         ValidationError);
}

TEST_CASE("spectrum of the real two-level model") {
    const auto field = real_two_level();
    const Spectrum s = spectrum(field, vec2(1.0, 0.0));
    CHECK(s.energies[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s.energies[1] == doctest::Approx(1.0).epsilon(1e-12));
    // eigenvectors are (1, -1)/sqrt(2) and (1, 1)/sqrt(2) up to phase
    const double inv = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(s.vectors(0, 0)) - inv) < 1e-12);
    CHECK(std::abs(std::abs(s.vectors(1, 0)) - inv) < 1e-12);
    CHECK(std::abs(s.vec(0).dot(s.vec(1))) < 1e-12);

    const Spectrum sd = spectrum(field, vec2(0.0, 1.0));
    CHECK(std::abs(std::abs(sd.vectors(1, 0)) - 1.0) < 1e-12);  // ground along e2

    CHECK_THROWS_AS(spectrum(field, vec2(0.0, 0.0)), DegeneracyError);
}

TEST_CASE("smooth gauge alignment") {
    const auto field = real_two_level();
    const GaugeFrame f0 = initial_frame(field, vec2(0.0, 1.0), GaugePolicy::OverlapAligned);

    SUBCASE("sign flip undone") {
        Spectrum flipped = f0.spec;
        flipped.vectors.col(0) *= -1.0;
        const GaugeFrame fixed = smooth_gauge(f0, flipped);
        CHECK((fixed.spec.vectors - f0.spec.vectors).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("idempotent") {
        const GaugeFrame once = smooth_gauge(f0, f0.spec);
        const GaugeFrame twice = smooth_gauge(f0, once.spec);
        CHECK((once.spec.vectors - twice.spec.vectors).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((once.spec.vectors - f0.spec.vectors).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("real-symmetric path keeps vectors real") {
        GaugeFrame prev = initial_frame(field, vec2(1.0, 0.2), GaugePolicy::RealForced);
        for (int i = 1; i <= 40; ++i) {
            const double th = 0.05 * i;
            const Spectrum raw = spectrum(field, vec2(std::cos(th), 0.2 + std::sin(th)));
            prev = smooth_gauge(prev, raw);
            CHECK(prev.spec.vectors.imag().cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("ambiguous association reported") {
        // 45-degree rotated raw basis overlaps both previous levels equally
        Spectrum rot = f0.spec;
        const double inv = 1.0 / std::sqrt(2.0);
        rot.vectors << Complex(inv), Complex(-inv), Complex(inv), Complex(inv);
        CHECK_THROWS_WITH_AS(smooth_gauge(f0, rot), doctest::Contains("ambiguous"),
                             ValidationError);
    }
}

TEST_CASE("eigenvector derivative against finite differences") {
    const auto field = real_two_level();
    SUBCASE("closed-form magnitude at (0, 1)") {
        const GaugeFrame f = initial_frame(field, vec2(0.0, 1.0), GaugePolicy::RealForced);
        const VecC d1 = eigvec_derivative(field, f, 0, 0);
        CHECK(std::abs(f.vec(1).dot(d1)) == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("constant field gives zero") {
        auto constant = HamiltonianField::pencil(pauli_z(), {MatC::Zero(2, 2)});
        const GaugeFrame f = initial_frame(constant, VecX::Zero(1), GaugePolicy::Raw);
        CHECK(eigvec_derivative(constant, f, 0, 0).norm() < 1e-14);
    }
    SUBCASE("matches gauge-aligned finite differences") {
        const VecX q = vec2(0.7, -0.4);
        const GaugeFrame f = initial_frame(field, q, GaugePolicy::RealForced);
        const double h = 1e-5;
        for (int mu = 0; mu < 2; ++mu) {
            VecX qp = q, qm = q;
            qp[mu] += h;
            qm[mu] -= h;
            const GaugeFrame fp = smooth_gauge(f, spectrum(field, qp));
            const GaugeFrame fm = smooth_gauge(f, spectrum(field, qm));
            const VecC fd = (fp.vec(0) - fm.vec(0)) / (2.0 * h);
            const VecC an = eigvec_derivative(field, f, 0, mu);
            CHECK((fd - an).norm() < 1e-6);
        }
    }
}

TEST_CASE("Hellmann-Feynman gradient") {
    const auto field = real_two_level();
    SUBCASE("ground state at (1, 0)") {
        const GaugeFrame f = initial_frame(field, vec2(1.0, 0.0), GaugePolicy::RealForced);
        const VecX g = hellmann_feynman(field, f, 0);
        CHECK(g[0] == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(std::abs(g[1]) < 1e-12);
    }
    SUBCASE("coordinate-free spectrum gives zero") {
        auto constant = HamiltonianField::pencil(pauli_z(), {MatC::Zero(2, 2)});
        const GaugeFrame f = initial_frame(constant, VecX::Zero(1), GaugePolicy::Raw);
        CHECK(hellmann_feynman(constant, f, 0).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("matches finite difference of the level") {
        const auto cfield = complex_two_level();
        const VecX q = vec2(0.4, -0.9);
        const GaugeFrame f = initial_frame(cfield, q, GaugePolicy::OverlapAligned);
        const VecX g = hellmann_feynman(cfield, f, 0);
        for (int mu = 0; mu < 2; ++mu) {
            const double fd = richardson_d1(
                [&](double off) {
                    VecX qq = q;
                    qq[mu] += off;
                    return spectrum(cfield, qq).energies[0];
                },
                1e-4);
            CHECK(g[mu] == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("eigen-residual over random points of the bundled fields") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& name : bundled_scenario_names()) {
        const Scenario sc = bundled_scenario(name);
        const int K = sc.field.coords();
        for (int trial = 0; trial < 200; ++trial) {
            VecX q(K);
            for (int i = 0; i < K; ++i) q[i] = u(rng);
            if (name.rfind("two_level_real", 0) == 0 && q.norm() < 0.2) continue;
            Spectrum s;
            try {
                s = spectrum(sc.field, q);
            } catch (const DegeneracyError&) {
                continue;
            }
            const MatC h = sc.field(q);
            for (int k = 0; k < s.dim(); ++k) {
                const double res = (h * s.vec(k) - s.energies[k] * s.vec(k)).norm();
                CHECK(res < 1e-9 * std::max(1.0, s.h_norm));
            }
        }
    }
}

TEST_CASE("gauge covariance of derivative coefficients") {
    const auto field = complex_two_level();
    const VecX q = vec2(0.8, 0.5);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double c1 = u(rng), c2 = u(rng);
    GaugeShift shift{[c1, c2](int, const VecX& qq) { return c1 * qq[0] + c2 * qq[1]; }};

    const GaugeFrame f = initial_frame(field, q, GaugePolicy::OverlapAligned);
    const GaugeFrame fs = apply_shift(f, shift);
    const MatC a = offdiag_derivative_coefficients(field, f, 0);
    const MatC b = offdiag_derivative_coefficients(field, fs, 0);
    // |<k|d_mu n>| is unchanged by the re-phasing
    CHECK((a.cwiseAbs() - b.cwiseAbs()).maxCoeff() < 1e-12);

    // the diagonal <n|d_mu n> picks up exactly i d_mu alpha
    const double h = 1e-5;
    for (int mu = 0; mu < 2; ++mu) {
        VecX qp = q, qm = q;
        qp[mu] += h;
        qm[mu] -= h;
        auto diag_of = [&](bool shifted) {
            GaugeFrame base = f;
            GaugeFrame p = smooth_gauge(base, spectrum(field, qp));
            GaugeFrame m = smooth_gauge(base, spectrum(field, qm));
            if (shifted) {
                base = apply_shift(base, shift);
                p = apply_shift(p, shift);
                m = apply_shift(m, shift);
            }
            return Complex(base.vec(0).dot((p.vec(0) - m.vec(0)) / (2.0 * h)));
        };
        const Complex delta = diag_of(true) - diag_of(false);
        const double dalpha = (mu == 0) ? c1 : c2;
        CHECK(std::abs(delta - Complex(0, dalpha)) < 1e-6);
    }
}
