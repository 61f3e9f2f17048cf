#ifndef ADIALAG_GEOMETRY_HPP
#define ADIALAG_GEOMETRY_HPP

#include <functional>
#include <memory>

#include "adialag/model.hpp"
#include "adialag/ode.hpp"
#include "adialag/types.hpp"

namespace adialag {

// Metric, connections, curvature and signature bookkeeping at a point.
struct MetricData {
    VecX q;
    MatX g, g_inv;
    Tensor3 gamma;     // gamma(a, m, n) = Gamma^a_{mn}
    Tensor4 riemann;   // covariant R_{abcd}
    double scalar_R = 0.0;
    int n_positive = 0, n_negative = 0;
    double det_g = 0.0, tr_g = 0.0;
};

// Smooth metric field g(q) with finite-difference derivatives.
class MetricField {
  public:
    MetricField(int coords, std::function<MatX(const VecX&)> g, double det_floor, double h = 1e-3);

    // eps^2 (M delta + G(q)) built on a model field.
    static MetricField from_model(std::shared_ptr<const ModelField> model);
    static MetricField analytic(int coords, std::function<MatX(const VecX&)> g,
                                double det_floor = 1e-14);

    int coords() const { return coords_; }
    MatX at(const VecX& q) const { return g_(q); }
    Tensor3 d1(const VecX& q) const;   // d1(c, a, b) = d_c g_ab
    Tensor4 d2(const VecX& q) const;   // d2(c, d, a, b) = d^2_{cd} g_ab
    double det_floor() const { return det_floor_; }

  private:
    int coords_;
    std::function<MatX(const VecX&)> g_;
    double det_floor_;
    double h_;
};

Tensor3 christoffel(const MetricField& field, const VecX& q);
MetricData metric_data(const MetricField& field, const VecX& q);

// Closed-form two-level metric/curvature blocks (ground or excited level).
MetricData two_level_closed_form(const VecX& q, double mass, double eps, bool excited);
double two_level_scalar_R(double rho, double mass, double eps, bool excited);

struct GeodesicResult {
    std::vector<double> s;
    std::vector<VecX> q, u;
    std::vector<VecX> v, w;       // deviation field and its covariant rate (when requested)
    std::vector<double> norm_uu;  // g_ab u^a u^b
    bool completed = true;
    std::string message;
};

GeodesicResult geodesic_integrate(const MetricField& field, const VecX& q0, const VecX& u0,
                                  double s_end, const OdeOptions& opts = {},
                                  double sample_ds = 0.01);

// Joint geodesic + Jacobi-Levi-Civita deviation integration.
GeodesicResult jacobi_deviation(const MetricField& field, const VecX& q0, const VecX& u0,
                                const VecX& v0, const VecX& w0, double s_end,
                                const OdeOptions& opts = {}, double sample_ds = 0.01);

// Root of det g along the ray q = dir * rho, bracketed in [lo, hi].
double signature_change_radius(const MetricField& field, const VecX& dir, double lo, double hi,
                               double tol = 1e-6);

}  // namespace adialag

#endif
