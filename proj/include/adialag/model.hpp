#ifndef ADIALAG_MODEL_HPP
#define ADIALAG_MODEL_HPP

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "adialag/adiabatic.hpp"
#include "adialag/hamiltonian.hpp"
#include "adialag/spectrum.hpp"
#include "adialag/types.hpp"

namespace adialag {

struct PolynomialTerm {
    double coeff = 0.0;
    std::vector<int> powers;
};

// Multivariate polynomial potential with analytic gradient.
class Polynomial {
  public:
    Polynomial() = default;
    Polynomial(int coords, std::vector<PolynomialTerm> terms);
    static Polynomial zero(int coords) { return Polynomial(coords, {}); }

    double value(const VecX& q) const;
    VecX gradient(const VecX& q) const;
    int coords() const { return coords_; }
    const std::vector<PolynomialTerm>& terms() const { return terms_; }

  private:
    int coords_ = 0;
    std::vector<PolynomialTerm> terms_;
};

// All expansion tensors at one point q for one reference level.
struct EffectiveModel {
    VecX q;
    int level = 0;
    double epsilon = 0.0;
    double mass = 0.0;

    double E = 0.0;   // Born-Oppenheimer level
    VecX dE;
    double V = 0.0;   // bare potential
    VecX dV;

    VecX A;           // Berry connection in the active gauge
    MatX berry_curv;  // Im<d_mu n|d_a n>, antisymmetric
    MatX G;           // mass correction tensor
    Tensor3 f;        // raw third-order tensor
    Tensor3 f_sym;    // fully symmetrized
    MatX z;           // antisymmetric acceleration coupling

    // Fourth-order block, K = 1 with real field only.
    std::optional<double> a4, b4, w4;
};

// Point evaluation bundle for equation-of-motion assembly. dX(c, ...) holds
// the derivative with respect to q_c of X(...).
struct LocalTensors {
    double E = 0.0, V = 0.0;
    VecX dE, dV;
    MatX curv;      // order >= 1
    MatX G;         // order >= 2
    Tensor3 dG;
    Tensor3 fsym;   // order >= 3
    Tensor4 dfsym;
    MatX z;
    Tensor3 dz;
    VecX A;         // with_connection only
    MatX dA;        // dA(a, b) = d_a A_b
    int order = 0;
    bool has_connection = false;
};

// K = 1 fourth-order coefficient fields and the derivatives the quartic
// equation of motion needs.
struct Order4Coefficients {
    double G = 0, dG = 0;
    double a = 0, da = 0;
    double b = 0, db = 0, d2b = 0;
    double w = 0, dw = 0, d2w = 0, d3w = 0;
};

struct SpectralOptions {
    GaugePolicy policy = GaugePolicy::OverlapAligned;
    // Fixed reference gauge: every frame phase-aligned against the frame at
    // this point. Required when the connection A must be a smooth field
    // (symplectic description); forces are gauge-invariant without it.
    std::optional<VecX> anchor;
    std::optional<GaugeShift> shift;
    double h_inner = 1e-5;  // eigenvector-level differences
    double h_point = 1e-4;  // derivatives of analytic pointwise fields
    double h_field = 1e-3;  // derivatives of FD-backed fields
    double gap_tol = -1.0;
};

class ModelField {
  public:
    virtual ~ModelField() = default;

    int coords() const { return coords_; }
    int level() const { return level_; }
    double epsilon() const { return epsilon_; }
    double mass() const { return mass_; }

    double potential(const VecX& q) const { return V_.value(q); }
    VecX potential_gradient(const VecX& q) const { return V_.gradient(q); }
    const Polynomial& bare_potential() const { return V_; }

    virtual EffectiveModel at(const VecX& q) const = 0;
    virtual LocalTensors local(const VecX& q, int order, bool with_connection = false) const = 0;
    // (d^2 z_{mb} / dq_c dq_d) dir_c dir_d as a K x K matrix.
    virtual MatX d2z_directional(const VecX& q, const VecX& dir) const = 0;
    virtual Order4Coefficients order4(const VecX& q) const;
    virtual bool has_smooth_connection() const { return false; }

  protected:
    ModelField(int coords, int level, double epsilon, double mass, Polynomial v)
        : coords_(coords), level_(level), epsilon_(epsilon), mass_(mass), V_(std::move(v)) {}

    int coords_;
    int level_;
    double epsilon_;
    double mass_;
    Polynomial V_;
};

// Tensor fields evaluated from the spectral decomposition of H(q).
class SpectralModelField : public ModelField {
  public:
    SpectralModelField(HamiltonianField field, Polynomial v, int level, double epsilon,
                       double mass, SpectralOptions opts = {});

    EffectiveModel at(const VecX& q) const override;
    LocalTensors local(const VecX& q, int order, bool with_connection = false) const override;
    MatX d2z_directional(const VecX& q, const VecX& dir) const override;
    Order4Coefficients order4(const VecX& q) const override;
    bool has_smooth_connection() const override { return options_.anchor.has_value(); }

    // Second-order force straight from the perturbation-series expression
    // (independent of the Euler-Lagrange route).
    VecX force_order2_direct(const VecX& q, const VecX& qd, const VecX& qdd) const;

    const HamiltonianField& field() const { return field_; }
    const SpectralOptions& options() const { return options_; }
    GaugeFrame frame(const VecX& q) const;

    // Same field in a different gauge (covariance tests).
    SpectralModelField with_shift(GaugeShift shift) const;
    SpectralModelField with_anchor(const VecX& anchor) const;

  private:
    struct PointData;
    PointData point(const VecX& q) const;
    GaugeFrame aligned(const VecX& q, const GaugeFrame* center) const;
    MatX z_of_frame(const HamiltonianField& f, const GaugeFrame& fr) const;
    Tensor3 raw_f(const VecX& q, const PointData& p) const;
    VecX connection(const VecX& q, const PointData& p) const;

    HamiltonianField field_;
    SpectralOptions options_;
    std::shared_ptr<GaugeFrame> anchor_frame_;  // cached when anchored
};

// Tensor fields supplied directly as callables; lets the integrators and the
// symplectic layer be exercised on models with known closed forms.
struct SyntheticSpec {
    int coords = 0;
    int level = 0;
    double epsilon = 0.1;
    double mass = 1.0;
    Polynomial V;
    std::function<double(const VecX&)> E;        // default 0
    std::function<VecX(const VecX&)> A;          // default 0
    std::function<MatX(const VecX&)> G;          // default 0
    std::function<Tensor3(const VecX&)> fsym;    // default 0
    std::function<MatX(const VecX&)> z;          // default 0
    double h = 1e-4;
};

class SyntheticModelField : public ModelField {
  public:
    explicit SyntheticModelField(SyntheticSpec spec);

    EffectiveModel at(const VecX& q) const override;
    LocalTensors local(const VecX& q, int order, bool with_connection = false) const override;
    MatX d2z_directional(const VecX& q, const VecX& dir) const override;
    bool has_smooth_connection() const override { return true; }

  private:
    SyntheticSpec spec_;
};

Tensor3 symmetrize(const Tensor3& f);

VecX force_order0(const LocalTensors& lt);
VecX force_order1(const LocalTensors& lt, const VecX& qd);
VecX force_order2_el(const LocalTensors& lt, const VecX& qd, const VecX& qdd);
// d2z_dir must be the directional second derivative of z along qd.
VecX force_order3_terms(const LocalTensors& lt, const MatX& d2z_dir, const VecX& qd,
                        const VecX& qdd, const VecX& q3);
VecX force_order3_el(const ModelField& model, const LocalTensors& lt, const VecX& q,
                     const VecX& qd, const VecX& qdd, const VecX& q3);

}  // namespace adialag

#endif
