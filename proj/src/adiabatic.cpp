#include "adialag/adiabatic.hpp"

#include <cmath>

#include "adialag/util.hpp"

namespace adialag {

namespace {

// Central differences of a per-grid table, one-sided at the ends.
template <class T>
std::vector<T> grid_derivative(const std::vector<T>& f, double ds) {
    const size_t n = f.size();
    std::vector<T> out(n);
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * (1.0 / (2.0 * ds));
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * (1.0 / (2.0 * ds));
    for (size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * (1.0 / (2.0 * ds));
    return out;
}

std::vector<MatC> ddt_tables(const std::vector<GaugeFrame>& frames, double ds) {
    const size_t n = frames.size();
    std::vector<MatC> out(n);
    auto dvec = [&](size_t i) -> MatC {
        if (i == 0)
            return (-3.0 * frames[0].spec.vectors + 4.0 * frames[1].spec.vectors -
                    frames[2].spec.vectors) /
                   (2.0 * ds);
        if (i == n - 1)
            return (3.0 * frames[n - 1].spec.vectors - 4.0 * frames[n - 2].spec.vectors +
                    frames[n - 3].spec.vectors) /
                   (2.0 * ds);
        return (frames[i + 1].spec.vectors - frames[i - 1].spec.vectors) / (2.0 * ds);
    };
    for (size_t i = 0; i < n; ++i) out[i] = frames[i].spec.vectors.adjoint() * dvec(i);
    return out;
}

}  // namespace

FrameSeries FrameSeries::build(const HamiltonianField& field, SlowPath path, GaugePolicy policy,
                               double gap_tol) {
    FrameSeries fs;
    fs.frames.reserve(path.size());
    fs.frames.push_back(initial_frame(field, path.q[0], policy, gap_tol));
    for (int i = 1; i < path.size(); ++i) {
        Spectrum raw = spectrum(field, path.q[i], gap_tol);
        if (policy == GaugePolicy::Raw)
            fs.frames.push_back(GaugeFrame{std::move(raw), policy});
        else
            fs.frames.push_back(smooth_gauge(fs.frames.back(), raw));
    }
    fs.ddt = ddt_tables(fs.frames, path.ds());
    fs.path = std::move(path);
    return fs;
}

FrameSeries FrameSeries::rephased(const GaugeShift& shift) const {
    FrameSeries fs;
    fs.path = path;
    fs.frames.reserve(frames.size());
    for (const auto& fr : frames) fs.frames.push_back(apply_shift(fr, shift));
    fs.ddt = ddt_tables(fs.frames, path.ds());
    return fs;
}

VecC CoefficientTables::total(int i, double eps, int order_limit) const {
    const int limit = order_limit < 0 ? order : std::min(order_limit, order);
    VecC out = VecC::Zero(c.empty() ? 0 : c[0][i].size());
    out[level] = 1.0;
    double ej = 1.0;
    for (int j = 1; j <= limit; ++j) {
        ej *= eps;
        out += ej * c[j - 1][i];
    }
    return out;
}

CoefficientTables adiabatic_coefficients(const FrameSeries& series, int level, int order) {
    const int n_grid = series.size();
    const int d = series.dim();
    const double ds = series.path.ds();
    if (order < 1) throw ValidationError("perturbation order must be >= 1");
    const int min_grid = 2 * order + 3;
    if (n_grid < min_grid)
        throw ValidationError("slow-path grid too coarse for order " + std::to_string(order) +
                              " derivatives; need at least " + std::to_string(min_grid) +
                              " samples");

    CoefficientTables t;
    t.level = level;
    t.order = order;
    t.c.resize(order);

    // Order 0 table is constant delta_{kn}.
    std::vector<VecC> prev(n_grid, VecC::Zero(d));
    for (auto& v : prev) v[level] = 1.0;

    for (int j = 1; j <= order; ++j) {
        std::vector<VecC> prev_dot = grid_derivative(prev, ds);
        std::vector<VecC> cur(n_grid, VecC::Zero(d));
        for (int i = 0; i < n_grid; ++i) {
            const MatC& T = series.ddt[i];
            const Spectrum& sp = series.frames[i].spec;
            // <k| d/ds n_{j-1}> over all k
            VecC kdot = prev_dot[i] + T * prev[i];
            const Complex diag = T(level, level);
            for (int k = 0; k < d; ++k) {
                if (k == level) continue;
                cur[i][k] = (Complex(0, 1) * diag * prev[i][k] - Complex(0, 1) * kdot[k]) /
                            sp.gap(level, k);
            }
        }
        // Diagonal from the normalization-preserving integral.
        std::vector<Complex> integrand(n_grid, Complex(0, 0));
        for (int i = 0; i < n_grid; ++i) {
            Complex acc(0, 0);
            for (int k = 0; k < d; ++k) {
                if (k == level) continue;
                acc += cur[i][k] * series.ddt[i](level, k);
            }
            integrand[i] = -acc;
        }
        auto diag_int = cumulative_trapezoid(integrand, ds, Complex(0, 0));
        for (int i = 0; i < n_grid; ++i) cur[i][level] = diag_int[i];

        t.c[j - 1] = cur;
        prev = std::move(cur);
    }

    std::vector<double> berry_integrand(n_grid), energy(n_grid);
    for (int i = 0; i < n_grid; ++i) {
        berry_integrand[i] = -series.ddt[i](level, level).imag();
        energy[i] = series.frames[i].spec.energies[level];
    }
    t.berry_phase = cumulative_trapezoid(berry_integrand, ds, 0.0);
    t.energy_integral = cumulative_trapezoid(energy, ds, 0.0);
    return t;
}

VecC c1_offdiagonal(const FrameSeries& series, int level, int i) {
    const int d = series.dim();
    VecC out = VecC::Zero(d);
    const Spectrum& sp = series.frames[i].spec;
    for (int k = 0; k < d; ++k) {
        if (k == level) continue;
        out[k] = Complex(0, -1) * series.ddt[i](k, level) / sp.gap(level, k);
    }
    return out;
}

Complex c1_diagonal(const CoefficientTables& tables, int i) { return tables.c[0][i][tables.level]; }

VecC c2_offdiagonal_explicit(const FrameSeries& series, int level, int i) {
    const int d = series.dim();
    const int n_grid = series.size();
    const double ds = series.path.ds();

    std::vector<VecC> c1(n_grid);
    for (int j = 0; j < n_grid; ++j) c1[j] = c1_offdiagonal(series, level, j);
    auto c1_tables = adiabatic_coefficients(series, level, 1);
    const Complex c1_nn = c1_tables.c[0][i][level];

    std::vector<VecC> c1_dot = grid_derivative(c1, ds);

    const MatC& T = series.ddt[i];
    const Spectrum& sp = series.frames[i].spec;
    VecC out = VecC::Zero(d);
    for (int k = 0; k < d; ++k) {
        if (k == level) continue;
        Complex mixing(0, 0);
        for (int l = 0; l < d; ++l) {
            if (l == level || l == k) continue;
            // <dk/ds | l> = -<k | dl/ds>
            mixing += c1[i][l] * (-T(k, l));
        }
        out[k] = c1[i][k] * c1_nn +
                 Complex(0, 1) / sp.gap(level, k) *
                     (c1[i][k] * (T(level, level) - T(k, k)) - c1_dot[i][k] + mixing);
    }
    return out;
}

std::vector<VecC> n_vectors(const HamiltonianField& field, const GaugeFrame& frame, int level) {
    const int d = frame.dim();
    const int K = field.coords();
    const MatC c = offdiag_derivative_coefficients(field, frame, level);
    std::vector<VecC> out(K, VecC::Zero(d));
    for (int mu = 0; mu < K; ++mu)
        for (int k = 0; k < d; ++k) {
            if (k == level) continue;
            out[mu] += c(k, mu) / frame.spec.gap(level, k) * frame.vec(k);
        }
    return out;
}

VecC reconstruct_wavefunction(const FrameSeries& series, const CoefficientTables& tables,
                              double eps, int order, int i) {
    const VecC coeff = tables.total(i, eps, order);
    VecC psi = series.frames[i].spec.vectors * coeff;
    const double phase = -tables.energy_integral[i] / eps + tables.berry_phase[i];
    return psi * Complex(std::cos(phase), std::sin(phase));
}

ActionAngle action_angle_map(const VecC& psi, const MatC& basis) {
    if (std::abs(psi.norm() - 1.0) > 1e-9)
        throw ValidationError("action-angle map requires a normalized state");
    const int d = static_cast<int>(basis.cols());
    ActionAngle aa;
    aa.action.resize(d);
    aa.angle.resize(d);
    aa.defined.resize(d);
    for (int k = 0; k < d; ++k) {
        const Complex g = basis.col(k).dot(psi);
        aa.action[k] = std::norm(g);
        if (aa.action[k] < 1e-14) {
            aa.angle[k] = std::numeric_limits<double>::quiet_NaN();
            aa.defined[k] = false;
        } else {
            aa.angle[k] = std::arg(g);
            aa.defined[k] = true;
        }
    }
    return aa;
}

}  // namespace adialag
