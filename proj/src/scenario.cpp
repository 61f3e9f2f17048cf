#include "adialag/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace adialag {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ValidationError("scenario error at " + where + ": " + what);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (!allowed.count(k)) fail(where + "/" + k, "unknown key");
    }
}

double get_num(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

Complex get_complex(const json& j, const std::string& where) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2) fail(where, "expected [re, im]");
    return Complex(get_num(j[0], where + "/0"), get_num(j[1], where + "/1"));
}

MatC get_matrix(const json& j, int d, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        fail(where, "expected " + std::to_string(d) + " rows");
    MatC m(d, d);
    for (int r = 0; r < d; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != d)
            fail(where + "/" + std::to_string(r), "expected " + std::to_string(d) + " entries");
        for (int c = 0; c < d; ++c)
            m(r, c) = get_complex(row[c], where + "/" + std::to_string(r) + "/" +
                                              std::to_string(c));
    }
    return m;
}

VecX get_vector(const json& j, const std::string& where, int expected = -1) {
    if (!j.is_array()) fail(where, "expected an array");
    if (expected >= 0 && static_cast<int>(j.size()) != expected)
        fail(where, "expected " + std::to_string(expected) + " entries, got " +
                        std::to_string(j.size()));
    VecX v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[i] = get_num(j[i], where + "/" + std::to_string(i));
    return v;
}

json matrix_to_json(const MatC& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(row);
    }
    return rows;
}

json vec_to_json(const VecX& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
    }
    check_keys(j, "", {"name", "format_version", "hamiltonian", "potential", "mass",
                       "mass_scaling", "epsilon", "epsilons", "level", "gap_tol", "initial",
                       "path", "run", "geometry"});

    Scenario s;
    s.name = j.value("name", "unnamed");
    s.format_version = j.value("format_version", 1);
    if (s.format_version != 1) fail("/format_version", "unsupported format version");

    if (!j.contains("hamiltonian")) fail("/hamiltonian", "missing");
    {
        const json& h = j["hamiltonian"];
        check_keys(h, "/hamiltonian", {"d", "K", "H0", "Hlin"});
        const int d = static_cast<int>(get_num(h.at("d"), "/hamiltonian/d"));
        const int K = static_cast<int>(get_num(h.at("K"), "/hamiltonian/K"));
        const MatC h0 = h.contains("H0") ? get_matrix(h["H0"], d, "/hamiltonian/H0")
                                         : MatC::Zero(d, d);
        if (!h.contains("Hlin")) fail("/hamiltonian/Hlin", "missing");
        const json& hl = h["Hlin"];
        if (!hl.is_array() || static_cast<int>(hl.size()) != K)
            fail("/hamiltonian/Hlin", "length " + std::to_string(hl.size()) +
                                          " does not match K = " + std::to_string(K));
        std::vector<MatC> hlin;
        for (int a = 0; a < K; ++a)
            hlin.push_back(get_matrix(hl[a], d, "/hamiltonian/Hlin/" + std::to_string(a)));
        s.field = HamiltonianField::pencil(h0, std::move(hlin));
    }
    const int K = s.field.coords();

    if (j.contains("potential")) {
        const json& p = j["potential"];
        check_keys(p, "/potential", {"terms"});
        std::vector<PolynomialTerm> terms;
        if (p.contains("terms")) {
            for (size_t i = 0; i < p["terms"].size(); ++i) {
                const json& t = p["terms"][i];
                const std::string where = "/potential/terms/" + std::to_string(i);
                check_keys(t, where, {"c", "powers"});
                PolynomialTerm term;
                term.coeff = get_num(t.at("c"), where + "/c");
                if (!t.contains("powers") || static_cast<int>(t["powers"].size()) != K)
                    fail(where + "/powers", "expected " + std::to_string(K) + " exponents");
                for (const auto& e : t["powers"]) term.powers.push_back(e.get<int>());
                terms.push_back(term);
            }
        }
        s.potential = Polynomial(K, std::move(terms));
    } else {
        s.potential = Polynomial::zero(K);
    }

    s.mass = j.value("mass", 1.0);
    s.mass_scaling = j.value("mass_scaling", std::string("fixed"));
    if (s.mass_scaling != "fixed" && s.mass_scaling != "inverse_epsilon_squared")
        fail("/mass_scaling", "expected 'fixed' or 'inverse_epsilon_squared'");
    if (j.contains("epsilon") && j.contains("epsilons"))
        fail("/epsilon", "give either epsilon or epsilons, not both");
    if (j.contains("epsilon")) s.epsilons = {get_num(j["epsilon"], "/epsilon")};
    if (j.contains("epsilons")) {
        s.epsilons.clear();
        for (size_t i = 0; i < j["epsilons"].size(); ++i)
            s.epsilons.push_back(get_num(j["epsilons"][i], "/epsilons/" + std::to_string(i)));
    }
    for (double e : s.epsilons)
        if (!(e > 0.0 && e < 1.0)) fail("/epsilons", "epsilon must lie in (0, 1)");
    s.level = j.value("level", 0);
    if (s.level < 0 || s.level >= s.field.dim()) fail("/level", "level out of range");
    s.gap_tol = j.value("gap_tol", -1.0);

    s.q0 = VecX::Zero(K);
    s.qd0 = VecX::Zero(K);
    if (j.contains("initial")) {
        const json& in = j["initial"];
        check_keys(in, "/initial", {"q", "qdot", "dressing"});
        if (in.contains("q")) s.q0 = get_vector(in["q"], "/initial/q", K);
        if (in.contains("qdot")) s.qd0 = get_vector(in["qdot"], "/initial/qdot", K);
        s.dressing = in.value("dressing", 0);
    }

    if (j.contains("path")) {
        const json& p = j["path"];
        check_keys(p, "/path",
                   {"kind", "center", "radius", "omega", "phase", "rate", "ramp_time", "s", "q"});
        Scenario::PathSpec spec;
        spec.kind = p.value("kind", std::string("circle"));
        spec.center = p.contains("center") ? get_vector(p["center"], "/path/center", K)
                                           : VecX::Zero(K);
        spec.radius = p.value("radius", 1.0);
        spec.omega = p.value("omega", 1.0);
        spec.phase = p.value("phase", 0.0);
        spec.rate = p.value("rate", 1.0);
        spec.ramp_time = p.value("ramp_time", 1.0);
        if (spec.kind == "samples") {
            if (!p.contains("s") || !p.contains("q")) fail("/path", "samples need s and q");
            for (const auto& v : p["s"]) spec.s.push_back(v.get<double>());
            for (size_t i = 0; i < p["q"].size(); ++i)
                spec.q.push_back(get_vector(p["q"][i], "/path/q/" + std::to_string(i), K));
        } else if (spec.kind != "circle" && spec.kind != "ramped_arc" && spec.kind != "fixed") {
            fail("/path/kind", "expected circle, ramped_arc, samples or fixed");
        }
        s.path = spec;
    }

    if (j.contains("run")) {
        const json& r = j["run"];
        check_keys(r, "/run",
                   {"order", "s_begin", "s_end", "s_i", "sample_ds", "tolerances"});
        s.order = r.value("order", std::string("O2"));
        s.s_begin = r.value("s_begin", 0.0);
        s.s_end = r.value("s_end", 2.5);
        s.s_i = r.value("s_i", 0.5);
        s.sample_ds = r.value("sample_ds", 0.01);
        if (r.contains("tolerances")) {
            check_keys(r["tolerances"], "/run/tolerances", {"rel", "abs"});
            s.rtol = r["tolerances"].value("rel", 1e-9);
            s.atol = r["tolerances"].value("abs", 1e-10);
        }
    }

    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        check_keys(g, "/geometry", {"rho_min", "rho_max", "n", "masses", "geodesic"});
        s.geometry.rho_min = g.value("rho_min", 0.3);
        s.geometry.rho_max = g.value("rho_max", 3.0);
        s.geometry.n = g.value("n", 16);
        if (g.contains("masses")) {
            s.geometry.masses.clear();
            for (const auto& m : g["masses"]) s.geometry.masses.push_back(m.get<double>());
        }
        if (g.contains("geodesic")) {
            const json& gg = g["geodesic"];
            check_keys(gg, "/geometry/geodesic", {"q0", "u0", "s_end"});
            if (gg.contains("q0")) s.geometry.geo_q0 = get_vector(gg["q0"], "/geometry/geodesic/q0", K);
            if (gg.contains("u0")) s.geometry.geo_u0 = get_vector(gg["u0"], "/geometry/geodesic/u0", K);
            s.geometry.geo_s_end = gg.value("s_end", 5.0);
        }
    }

    s.canonical = serialize_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["format_version"] = s.format_version;
    json h;
    h["d"] = s.field.dim();
    h["K"] = s.field.coords();
    h["H0"] = matrix_to_json(s.field.h0());
    json hlin = json::array();
    for (const auto& m : s.field.hlin()) hlin.push_back(matrix_to_json(m));
    h["Hlin"] = hlin;
    j["hamiltonian"] = h;

    json terms = json::array();
    for (const auto& t : s.potential.terms()) {
        json jt;
        jt["c"] = t.coeff;
        jt["powers"] = t.powers;
        terms.push_back(jt);
    }
    j["potential"] = json{{"terms", terms}};
    j["mass"] = s.mass;
    j["mass_scaling"] = s.mass_scaling;
    j["epsilons"] = s.epsilons;
    j["level"] = s.level;
    j["gap_tol"] = s.gap_tol;
    j["initial"] = json{{"q", vec_to_json(s.q0)}, {"qdot", vec_to_json(s.qd0)},
                        {"dressing", s.dressing}};
    if (s.path) {
        json p;
        p["kind"] = s.path->kind;
        p["center"] = vec_to_json(s.path->center);
        p["radius"] = s.path->radius;
        p["omega"] = s.path->omega;
        p["phase"] = s.path->phase;
        p["rate"] = s.path->rate;
        p["ramp_time"] = s.path->ramp_time;
        if (!s.path->s.empty()) {
            p["s"] = s.path->s;
            json qs = json::array();
            for (const auto& q : s.path->q) qs.push_back(vec_to_json(q));
            p["q"] = qs;
        }
        j["path"] = p;
    }
    j["run"] = json{{"order", s.order},
                    {"s_begin", s.s_begin},
                    {"s_end", s.s_end},
                    {"s_i", s.s_i},
                    {"sample_ds", s.sample_ds},
                    {"tolerances", json{{"rel", s.rtol}, {"abs", s.atol}}}};
    json g;
    g["rho_min"] = s.geometry.rho_min;
    g["rho_max"] = s.geometry.rho_max;
    g["n"] = s.geometry.n;
    g["masses"] = s.geometry.masses;
    if (s.geometry.geo_q0.size() > 0)
        g["geodesic"] = json{{"q0", vec_to_json(s.geometry.geo_q0)},
                             {"u0", vec_to_json(s.geometry.geo_u0)},
                             {"s_end", s.geometry.geo_s_end}};
    j["geometry"] = g;
    return j.dump(2);
}

std::string scenario_hash(const Scenario& s) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s.canonical.empty() ? serialize_scenario(s) : s.canonical) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double resolved_mass(const Scenario& s, double eps) {
    if (s.mass_scaling == "inverse_epsilon_squared") return s.mass / (eps * eps);
    return s.mass;
}

std::shared_ptr<SpectralModelField> make_model(const Scenario& s, double eps,
                                               std::optional<VecX> anchor) {
    SpectralOptions opts;
    opts.gap_tol = s.gap_tol;
    if (anchor) opts.anchor = *anchor;
    return std::make_shared<SpectralModelField>(s.field, s.potential, s.level, eps,
                                                resolved_mass(s, eps), opts);
}

AnalyticPath make_path(const Scenario::PathSpec& spec) {
    if (spec.kind == "circle")
        return AnalyticPath::circle(spec.center, spec.radius, spec.omega, spec.phase);
    if (spec.kind == "ramped_arc")
        return AnalyticPath::ramped_arc(spec.center, spec.radius, spec.phase, spec.rate,
                                        spec.ramp_time);
    if (spec.kind == "fixed") return AnalyticPath::fixed_point(spec.center);
    throw ValidationError("sampled paths have no analytic form; use SlowPath::from_samples");
}

// ---------------------------------------------------------------------------
// Bundled scenarios

namespace {

const char* kRealGround = R"json({
  "name": "two_level_real_ground",
  "hamiltonian": {
    "d": 2, "K": 2,
    "H0": [[[0,0],[0,0]],[[0,0],[0,0]]],
    "Hlin": [[[[0,0],[1,0]],[[1,0],[0,0]]], [[[1,0],[0,0]],[[0,0],[-1,0]]]]
  },
  "mass": 1.0,
  "epsilon": 0.1,
  "level": 0,
  "initial": {"q": [1.0, 0.0], "qdot": [0.0, 0.3]},
  "run": {"order": "O2", "s_end": 5.0},
  "geometry": {"rho_min": 0.3, "rho_max": 3.0, "n": 16, "masses": [0.5, 1.0, 2.0],
               "geodesic": {"q0": [1.0, 0.0], "u0": [0.0, 30.0], "s_end": 5.0}}
})json";

const char* kRealExcited = R"json({
  "name": "two_level_real_excited",
  "hamiltonian": {
    "d": 2, "K": 2,
    "H0": [[[0,0],[0,0]],[[0,0],[0,0]]],
    "Hlin": [[[[0,0],[1,0]],[[1,0],[0,0]]], [[[1,0],[0,0]],[[0,0],[-1,0]]]]
  },
  "mass": 1.0,
  "epsilon": 0.1,
  "level": 1,
  "initial": {"q": [1.0, 0.0], "qdot": [0.0, 0.3]},
  "run": {"order": "O2", "s_end": 5.0},
  "geometry": {"rho_min": 0.3, "rho_max": 3.0, "n": 16, "masses": [1.0]}
})json";

const char* kComplexSweep = R"json({
  "name": "two_level_complex_sweep",
  "hamiltonian": {
    "d": 2, "K": 2,
    "H0": [[[1,0],[0,0]],[[0,0],[-1,0]]],
    "Hlin": [[[[0,0],[1,0]],[[1,0],[0,0]]], [[[0,0],[0,-1]],[[0,1],[0,0]]]]
  },
  "mass": 1.0,
  "mass_scaling": "inverse_epsilon_squared",
  "epsilons": [0.05, 0.1, 0.2],
  "level": 0,
  "initial": {"q": [1.0, 0.0], "qdot": [0.0, 0.0], "dressing": 3},
  "run": {"order": "O3", "s_begin": 0.0, "s_end": 2.5, "s_i": 0.5, "sample_ds": 0.01,
          "tolerances": {"rel": 1e-10, "abs": 1e-11}}
})json";

const char* kFourthOrder = R"json({
  "name": "one_dim_fourth_order",
  "hamiltonian": {
    "d": 2, "K": 1,
    "H0": [[[1,0],[0,0]],[[0,0],[-1,0]]],
    "Hlin": [[[[0,0],[1,0]],[[1,0],[0,0]]]]
  },
  "potential": {"terms": [{"c": 0.5, "powers": [2]}]},
  "mass": 1.0,
  "mass_scaling": "inverse_epsilon_squared",
  "epsilon": 0.2,
  "level": 0,
  "initial": {"q": [0.3], "qdot": [0.0]},
  "run": {"order": "O4", "s_end": 5.0, "sample_ds": 0.005}
})json";

const char* kOddConstraint = R"json({
  "name": "three_coord_constraint",
  "hamiltonian": {
    "d": 2, "K": 3,
    "H0": [[[2,0],[0,0]],[[0,0],[-2,0]]],
    "Hlin": [[[[0,0],[1,0]],[[1,0],[0,0]]],
             [[[0,0],[0,-1]],[[0,1],[0,0]]],
             [[[1,0],[0,0]],[[0,0],[-1,0]]]]
  },
  "potential": {"terms": [{"c": 0.5, "powers": [2,0,0]},
                           {"c": 0.5, "powers": [0,2,0]},
                           {"c": 0.5, "powers": [0,0,2]}]},
  "mass": 1.0,
  "mass_scaling": "inverse_epsilon_squared",
  "epsilon": 0.2,
  "level": 0,
  "initial": {"q": [0.5, 0.0, 0.0], "qdot": [0.0, 0.3, 0.1]},
  "run": {"order": "O3", "s_end": 2.0, "sample_ds": 0.002}
})json";

}  // namespace

std::vector<std::string> bundled_scenario_names() {
    return {"two_level_real_ground", "two_level_real_excited", "two_level_complex_sweep",
            "one_dim_fourth_order", "three_coord_constraint"};
}

Scenario bundled_scenario(const std::string& name) {
    if (name == "two_level_real_ground") return parse_scenario(kRealGround);
    if (name == "two_level_real_excited") return parse_scenario(kRealExcited);
    if (name == "two_level_complex_sweep") return parse_scenario(kComplexSweep);
    if (name == "one_dim_fourth_order") return parse_scenario(kFourthOrder);
    if (name == "three_coord_constraint") return parse_scenario(kOddConstraint);
    throw ValidationError("unknown bundled scenario: " + name);
}

}  // namespace adialag
