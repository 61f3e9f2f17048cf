#ifndef ADIALAG_SCENARIO_HPP
#define ADIALAG_SCENARIO_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adialag/hamiltonian.hpp"
#include "adialag/model.hpp"
#include "adialag/slow_path.hpp"

namespace adialag {

// Declarative run description. Complex numbers are [re, im] pairs; matrices
// are row-major nested arrays.
struct Scenario {
    std::string name;
    int format_version = 1;

    HamiltonianField field = HamiltonianField::pencil(
        (MatC(2, 2) << 1, 0, 0, -1).finished(), {(MatC(2, 2) << 0, 1, 1, 0).finished()});
    Polynomial potential;
    double mass = 1.0;
    // "fixed": mass used verbatim; "inverse_epsilon_squared": mass/eps^2, the
    // scaling that keeps the classical motion slow while eps varies.
    std::string mass_scaling = "fixed";
    std::vector<double> epsilons{0.1};
    int level = 0;
    double gap_tol = -1.0;

    VecX q0, qd0;      // initial data, slow-time velocity
    int dressing = 0;  // adiabatic order of the prepared initial state

    struct PathSpec {
        std::string kind;  // "circle" | "ramped_arc" | "samples" | "fixed"
        VecX center;
        double radius = 1.0, omega = 1.0, phase = 0.0, rate = 1.0, ramp_time = 1.0;
        std::vector<double> s;
        std::vector<VecX> q;
    };
    std::optional<PathSpec> path;

    std::string order = "O2";
    double s_begin = 0.0, s_end = 2.5, s_i = 0.5;
    double rtol = 1e-9, atol = 1e-10;
    double sample_ds = 0.01;

    struct GeometryBlock {
        double rho_min = 0.3, rho_max = 3.0;
        int n = 16;
        std::vector<double> masses{1.0};
        VecX geo_q0, geo_u0;
        double geo_s_end = 5.0;
    };
    GeometryBlock geometry;

    std::string canonical;  // canonical serialization, input to the hash
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);

// FNV-1a over the canonical serialization, 16 hex digits.
std::string scenario_hash(const Scenario& s);

double resolved_mass(const Scenario& s, double eps);

std::shared_ptr<SpectralModelField> make_model(const Scenario& s, double eps,
                                               std::optional<VecX> anchor = std::nullopt);

AnalyticPath make_path(const Scenario::PathSpec& spec);

// Bundled scenarios, keyed by name.
std::vector<std::string> bundled_scenario_names();
Scenario bundled_scenario(const std::string& name);

}  // namespace adialag

#endif
