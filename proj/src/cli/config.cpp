#include "config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace jetlag::cli {

using nlohmann::json;

RunConfig::RunConfig() {
  sim.initial = {1e-3, 0.5, 0.0, -1.0, 0.2};
  sim.t_end = 2e-2;
}

namespace {

// Strict view of one JSON object: every key must be listed, every value must have the right type.
class Section {
 public:
  Section(const json& j, std::string where, std::set<std::string> keys) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
    for (const auto& [k, v] : j.items())
      if (!keys.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  Section sub(const std::string& key, std::set<std::string> keys) const {
    return Section(j_.at(key), where_ + "." + key, std::move(keys));
  }

  template <typename T>
  void get(const std::string& key, T& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path(key) + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(path(key) + ": expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    } else {
      if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
    }
    out = v.get<T>();
  }

  template <typename T>
  void get(const std::string& key, std::optional<T>& out) const {
    if (!has(key)) return;
    T v{};
    get(key, v);
    out = v;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
};

void read_state(const Section& s, TrajectoryState& st) {
  s.get("t", st.t);
  s.get("r", st.r);
  s.get("phi", st.phi);
  s.get("rdot", st.rdot);
  s.get("phidot", st.phidot);
}

const std::set<std::string> kStateKeys{"t", "r", "phi", "rdot", "phidot"};
const std::set<std::string> kIntegratorKeys{"abs_tol", "rel_tol", "max_step", "initial_step", "min_step_rel",
                                            "max_steps", "fixed_step"};

void read_integrator(const Section& parent, const std::string& key, StepControl& c) {
  if (!parent.has(key)) return;
  const Section s = parent.sub(key, kIntegratorKeys);
  s.get("abs_tol", c.abs_tol);
  s.get("rel_tol", c.rel_tol);
  s.get("max_step", c.max_step);
  s.get("initial_step", c.initial_step);
  s.get("min_step_rel", c.min_step_rel);
  s.get("max_steps", c.max_steps);
  s.get("fixed_step", c.fixed_step);
}

void read_grid(const Section& parent, const std::string& key, Grid& g) {
  if (!parent.has(key)) return;
  const Section s = parent.sub(key, {"lo", "hi", "n"});
  s.get("lo", g.lo);
  s.get("hi", g.hi);
  s.get("n", g.n);
  if (g.n == 0) throw ConfigError(parent.path(key) + ".n: must be at least 1");
}

template <typename E>
E read_enum(const Section& s, const std::string& key, E current, std::initializer_list<std::pair<const char*, E>> names) {
  if (!s.has(key)) return current;
  std::string v;
  s.get(key, v);
  for (const auto& [n, e] : names)
    if (v == n) return e;
  std::string all;
  for (const auto& [n, e] : names) all += std::string(all.empty() ? "" : ", ") + n;
  throw ConfigError(s.path(key) + ": '" + v + "' is not one of " + all);
}

void apply_json(const json& j, RunConfig& c) {
  const Section root(j, "config",
                     {"model", "params", "fixture", "initial", "t_end", "integrator", "epsilon", "events",
                      "el_residual", "point", "resonance", "deviation", "validate", "tolerances", "sweep",
                      "output", "seed"});
  root.get("model", c.model);
  if (c.model != "monolayer" && c.model != "free_polar" && c.model != "electrodynamics_fixture")
    throw ConfigError("config.model: '" + c.model + "' is not one of monolayer, free_polar, electrodynamics_fixture");
  if (root.has("params")) {
    const Section s = root.sub("params", {"m", "p", "V_abs", "R0"});
    s.get("m", c.sim.params.m);
    s.get("p", c.sim.params.p);
    s.get("V_abs", c.sim.params.V_abs);
    s.get("R0", c.sim.params.R0);
  }
  if (root.has("fixture")) {
    const Section s = root.sub("fixture", {"m", "c", "e", "a", "b"});
    s.get("m", c.fixture.m);
    s.get("c", c.fixture.c);
    s.get("e", c.fixture.e);
    s.get("a", c.fixture.a);
    s.get("b", c.fixture.b);
  }
  if (root.has("initial")) read_state(root.sub("initial", kStateKeys), c.sim.initial);
  root.get("t_end", c.sim.t_end);
  read_integrator(root, "integrator", c.sim.integrator);
  root.get("epsilon", c.sim.epsilon);
  if (root.has("events")) {
    const Section s = root.sub("events", {"r_min", "g11_rel", "speed_max", "stop_on_einst"});
    s.get("r_min", c.sim.events.r_min);
    s.get("g11_rel", c.sim.events.g11_rel);
    s.get("speed_max", c.sim.events.speed_max);
    s.get("stop_on_einst", c.sim.events.stop_on_einst);
  }
  root.get("el_residual", c.sim.el_residual);
  if (root.has("point")) {
    TrajectoryState st = TrajectoryState::from(JetPoint{});
    read_state(root.sub("point", kStateKeys), st);
    c.point = st.jet();
  }
  if (root.has("resonance")) {
    const Section s = root.sub("resonance", {"t_start", "t_end", "source", "form", "grid_points", "r_min",
                                             "integrator", "plateau_threshold"});
    s.get("t_start", c.resonance.t_start);
    s.get("t_end", c.resonance.t_end);
    c.resonance.source = read_enum(s, "source", c.resonance.source,
                                   {{"ode", ResonanceSource::ode}, {"closed_form", ResonanceSource::closed_form}});
    c.resonance.form =
        read_enum(s, "form", c.resonance.form, {{"large_t", ResonanceForm::large_t}, {"exact", ResonanceForm::exact}});
    s.get("grid_points", c.resonance.grid_points);
    s.get("r_min", c.resonance.r_min);
    read_integrator(s, "integrator", c.resonance.integrator);
    s.get("plateau_threshold", c.plateau_threshold);
  }
  if (root.has("deviation")) {
    const Section s =
        root.sub("deviation", {"C1", "C2", "dr0", "drdot0", "uddot", "interp_tol", "integrator", "reference_form"});
    s.get("C1", c.deviation.C1);
    s.get("C2", c.deviation.C2);
    s.get("dr0", c.deviation.dr0);
    s.get("drdot0", c.deviation.drdot0);
    c.deviation.uddot = read_enum(s, "uddot", c.deviation.uddot,
                                  {{"d2U_dr2", UddotMeaning::d2U_dr2}, {"d2U_dt2", UddotMeaning::d2U_dt2}});
    s.get("interp_tol", c.deviation.interp_tol);
    read_integrator(s, "integrator", c.deviation.integrator);
    c.deviation_reference = read_enum(s, "reference_form", c.deviation_reference,
                                      {{"large_t", ResonanceForm::large_t}, {"exact", ResonanceForm::exact}});
  }
  if (root.has("validate")) {
    const Section s = root.sub("validate", {"samples", "fixture_samples", "dynamics"});
    s.get("samples", c.validate.samples);
    s.get("fixture_samples", c.validate.fixture_samples);
    s.get("dynamics", c.validate.dynamics);
  }
  if (root.has("tolerances")) {
    auto& t = c.validate.tol;
    const Section s = root.sub("tolerances", {"oracle", "approx", "metricity", "maxwell", "antisymmetry", "inverse",
                                              "fixture", "identity", "resonance", "affine", "el_residual", "special"});
    s.get("oracle", t.oracle);
    s.get("approx", t.approx);
    s.get("metricity", t.metricity);
    s.get("maxwell", t.maxwell);
    s.get("antisymmetry", t.antisymmetry);
    s.get("inverse", t.inverse);
    s.get("fixture", t.fixture);
    s.get("identity", t.identity);
    s.get("resonance", t.resonance);
    s.get("affine", t.affine);
    s.get("el_residual", t.el_residual);
    s.get("special", t.special);
  }
  if (root.has("sweep")) {
    const Section s = root.sub("sweep", {"r0", "rdot0", "t_start", "t_end", "threads"});
    read_grid(s, "r0", c.sweep.r0);
    read_grid(s, "rdot0", c.sweep.rdot0);
    s.get("t_start", c.sweep.t_start);
    s.get("t_end", c.sweep.t_end);
    s.get("threads", c.sweep.threads);
  }
  if (root.has("output")) root.sub("output", {"dir"}).get("dir", c.out_dir);
  root.get("seed", c.seed);
}

}  // namespace

RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    apply_json(j, c);
  }
  try {
    c.sim.params.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config.params: ") + e.what());
  }
  c.resonance.params = c.sim.params;
  c.validate.params = c.sim.params;
  return c;
}

}  // namespace jetlag::cli
