#include "phaseflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "phaseflow/error.hpp"
#include "phaseflow/scenarios.hpp"

namespace phaseflow {

std::string to_string(AuditMode m) { return m == AuditMode::Strict ? "strict" : "log"; }

std::string to_string(Shape s) {
  switch (s) {
    case Shape::Ellipse:
      return "ellipse";
    case Shape::Annulus:
      return "annulus";
    case Shape::Cosine:
      return "cosine";
  }
  return "ellipse";
}

namespace {

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError(key + ": invalid value '" + value + "' (expected " + expected + ")");
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(x)) bad_value(key, v, "a finite number");
  return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
  long long x = 0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) bad_value(key, v, "an integer");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  const long long x = parse_integer(key, v);
  if (x < -(1LL << 31) || x >= (1LL << 31)) bad_value(key, v, "a 32-bit integer");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

template <class E>
E parse_enum(const std::string& key, const std::string& v, const std::vector<std::pair<std::string, E>>& options) {
  std::string expected;
  for (const auto& [name, e] : options) {
    if (v == name) return e;
    expected += (expected.empty() ? "" : "|") + name;
  }
  bad_value(key, v, expected);
}

struct KeyDef {
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&, const std::string&)> set;
};

template <class F>
KeyDef real_key(F ref) {
  return {[ref](const Config& c) { return format_double(ref(const_cast<Config&>(c))); },
          [ref](Config& c, const std::string& k, const std::string& v) { ref(c) = parse_double(k, v); }};
}

template <class F>
KeyDef int_key(F ref) {
  return {[ref](const Config& c) { return std::to_string(ref(const_cast<Config&>(c))); },
          [ref](Config& c, const std::string& k, const std::string& v) { ref(c) = parse_int(k, v); }};
}

template <class F>
KeyDef bool_key(F ref) {
  return {[ref](const Config& c) { return std::string(ref(const_cast<Config&>(c)) ? "true" : "false"); },
          [ref](Config& c, const std::string& k, const std::string& v) { ref(c) = parse_bool(k, v); }};
}

template <class E, class F>
KeyDef enum_key(F ref, std::vector<std::pair<std::string, E>> options) {
  return {[ref, options](const Config& c) {
            const E e = ref(const_cast<Config&>(c));
            for (const auto& [name, value] : options) {
              if (value == e) return name;
            }
            return std::string("?");
          },
          [ref, options](Config& c, const std::string& k, const std::string& v) {
            ref(c) = parse_enum<E>(k, v, options);
          }};
}

using Table = std::vector<std::pair<std::string, KeyDef>>;

const Table& table() {
  static const Table t = [] {
    Table t;
    auto add = [&t](const std::string& name, KeyDef def) { t.emplace_back(name, std::move(def)); };
    add("scenario.name", {[](const Config& c) { return c.scenario; },
                          [](Config& c, const std::string&, const std::string& v) { c.scenario = v; }});
    add("scenario.shape", enum_key<Shape>([](Config& c) -> Shape& { return c.interface.shape; },
                                          {{"ellipse", Shape::Ellipse}, {"annulus", Shape::Annulus}, {"cosine", Shape::Cosine}}));
    add("scenario.center_x", real_key([](Config& c) -> double& { return c.interface.center.x(); }));
    add("scenario.center_y", real_key([](Config& c) -> double& { return c.interface.center.y(); }));
    add("scenario.radius_x", real_key([](Config& c) -> double& { return c.interface.radius_x; }));
    add("scenario.radius_y", real_key([](Config& c) -> double& { return c.interface.radius_y; }));
    add("scenario.radius_inner", real_key([](Config& c) -> double& { return c.interface.radius_inner; }));
    add("scenario.radius_outer", real_key([](Config& c) -> double& { return c.interface.radius_outer; }));
    add("scenario.height", real_key([](Config& c) -> double& { return c.interface.height; }));
    add("scenario.amplitude", real_key([](Config& c) -> double& { return c.interface.amplitude; }));
    add("scenario.waves", real_key([](Config& c) -> double& { return c.interface.waves; }));
    add("scenario.seed", {[](const Config& c) { return std::to_string(c.seed); },
                          [](Config& c, const std::string& k, const std::string& v) {
                            const long long x = parse_integer(k, v);
                            if (x < 0) bad_value(k, v, "a nonnegative integer");
                            c.seed = static_cast<std::uint64_t>(x);
                          }});

    add("domain.x0", real_key([](Config& c) -> double& { return c.domain.x0; }));
    add("domain.y0", real_key([](Config& c) -> double& { return c.domain.y0; }));
    add("domain.x1", real_key([](Config& c) -> double& { return c.domain.x1; }));
    add("domain.y1", real_key([](Config& c) -> double& { return c.domain.y1; }));
    add("domain.level", int_key([](Config& c) -> int& { return c.level; }));

    add("physics.rho1", real_key([](Config& c) -> double& { return c.params.rho1; }));
    add("physics.rho2", real_key([](Config& c) -> double& { return c.params.rho2; }));
    add("physics.eta1", real_key([](Config& c) -> double& { return c.params.eta1; }));
    add("physics.eta2", real_key([](Config& c) -> double& { return c.params.eta2; }));
    add("physics.sigma", real_key([](Config& c) -> double& { return c.params.sigma; }));
    add("physics.delta", real_key([](Config& c) -> double& { return c.params.delta; }));
    add("physics.mobility", real_key([](Config& c) -> double& { return c.params.mobility; }));
    add("physics.model", enum_key<Model>([](Config& c) -> Model& { return c.params.model; },
                                         {{"agg", Model::AGG}, {"dss", Model::DSS}}));
    add("physics.force", enum_key<ForceKind>([](Config& c) -> ForceKind& { return c.params.force.kind; },
                                             {{"none", ForceKind::None},
                                              {"constant", ForceKind::Constant},
                                              {"rotating", ForceKind::Rotating}}));
    add("physics.force_weighted", bool_key([](Config& c) -> bool& { return c.params.force.weighted; }));
    add("physics.force_x", real_key([](Config& c) -> double& { return c.params.force.vector.x(); }));
    add("physics.force_y", real_key([](Config& c) -> double& { return c.params.force.vector.y(); }));
    add("physics.rotations", real_key([](Config& c) -> double& { return c.params.force.rotations_per_time; }));
    add("physics.bc", enum_key<VelocityBc>([](Config& c) -> VelocityBc& { return c.params.bc; },
                                           {{"noslip", VelocityBc::NoSlip}, {"freeslip", VelocityBc::FreeSlip}}));

    add("discretization.elements",
        enum_key<Elements>([](Config& c) -> Elements& { return c.params.elements; },
                           {{"th", Elements::TaylorHood}, {"p1p1", Elements::StabilizedP1P1}}));
    add("discretization.convection", enum_key<Convection>([](Config& c) -> Convection& { return c.convection; },
                                                          {{"fv", Convection::FV}, {"fe", Convection::FE}}));
    add("discretization.fv_order", int_key([](Config& c) -> int& { return c.fv_order; }));

    add("solver.t_end", real_key([](Config& c) -> double& { return c.t_end; }));
    add("solver.max_steps", int_key([](Config& c) -> int& { return c.max_steps; }));
    add("solver.eps_v", real_key([](Config& c) -> double& { return c.tols.eps_v; }));
    add("solver.eps_phi", real_key([](Config& c) -> double& { return c.tols.eps_phi; }));
    add("solver.max_inner", int_key([](Config& c) -> int& { return c.tols.max_inner_iterations; }));
    add("solver.fe_tolerance", real_key([](Config& c) -> double& { return c.fe_tolerance; }));
    add("solver.safety", real_key([](Config& c) -> double& { return c.timestep.safety; }));
    add("solver.v_min", real_key([](Config& c) -> double& { return c.timestep.v_min; }));
    add("solver.v_max", real_key([](Config& c) -> double& { return c.timestep.v_max; }));
    add("solver.fixed_tau", real_key([](Config& c) -> double& { return c.timestep.fixed_tau; }));
    add("solver.audit", enum_key<AuditMode>([](Config& c) -> AuditMode& { return c.audit; },
                                            {{"strict", AuditMode::Strict}, {"log", AuditMode::Log}}));
    add("solver.audit_tol", real_key([](Config& c) -> double& { return c.audit_tol; }));

    add("adaptivity.enabled", bool_key([](Config& c) -> bool& { return c.adapt.enabled; }));
    add("adaptivity.min_level", int_key([](Config& c) -> int& { return c.adapt.min_level; }));
    add("adaptivity.max_level", int_key([](Config& c) -> int& { return c.adapt.max_level; }));
    add("adaptivity.c_ref_phi", real_key([](Config& c) -> double& { return c.adapt.c_ref_phi; }));
    add("adaptivity.c_coarse_phi", real_key([](Config& c) -> double& { return c.adapt.c_coarse_phi; }));
    add("adaptivity.c_ref_v", real_key([](Config& c) -> double& { return c.adapt.c_ref_v; }));
    add("adaptivity.c_coarse_v", real_key([](Config& c) -> double& { return c.adapt.c_coarse_v; }));

    add("output.directory", {[](const Config& c) { return c.output.directory; },
                             [](Config& c, const std::string& k, const std::string& v) {
                               if (v.empty()) bad_value(k, v, "a path");
                               c.output.directory = v;
                             }});
    add("output.snapshot_every", int_key([](Config& c) -> int& { return c.output.snapshot_every; }));
    add("output.vtk", bool_key([](Config& c) -> bool& { return c.output.vtk; }));
    add("output.vtk_quadratic", bool_key([](Config& c) -> bool& { return c.output.vtk_quadratic; }));
    return t;
  }();
  return t;
}

const KeyDef* find_key(const std::string& key) {
  for (const auto& [name, def] : table()) {
    if (name == key) return &def;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Line {
  int number;
  std::string key;
  std::string value;
};

std::vector<Line> tokenize(std::istream& in) {
  std::vector<Line> out;
  std::set<std::string> seen;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'section.key = value'", number);
    }
    Line l{number, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    if (l.key.find('.') == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": key '" + l.key + "' has no section", number);
    }
    if (!find_key(l.key)) throw ConfigError("line " + std::to_string(number) + ": unknown key '" + l.key + "'", number);
    if (!seen.insert(l.key).second) {
      throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + l.key + "'", number);
    }
    out.push_back(std::move(l));
  }
  return out;
}

void check(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key + ": " + message);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& entry : table()) k.push_back(entry.first);
    return k;
  }();
  return keys;
}

void set_config_value(Config& c, const std::string& key, const std::string& value) {
  const KeyDef* def = find_key(key);
  if (!def) throw ConfigError("unknown key '" + key + "'");
  def->set(c, key, value);
}

std::string get_config_value(const Config& c, const std::string& key) {
  const KeyDef* def = find_key(key);
  if (!def) throw ConfigError("unknown key '" + key + "'");
  return def->get(c);
}

void Config::validate() const {
  const PhysParams& p = params;
  check(p.rho1 > 0.0, "physics.rho1", "rho1 must be > 0");
  check(p.rho2 > 0.0, "physics.rho2", "rho2 must be > 0");
  check(p.eta1 > 0.0, "physics.eta1", "eta1 must be > 0");
  check(p.eta2 > 0.0, "physics.eta2", "eta2 must be > 0");
  check(p.sigma >= 0.0, "physics.sigma", "sigma must be >= 0");
  check(p.delta > 0.0, "physics.delta", "delta must be > 0");
  check(p.mobility >= 0.0, "physics.mobility", "mobility must be >= 0");
  check(p.force.kind != ForceKind::Rotating || p.force.rotations_per_time >= 0.0, "physics.rotations",
        "rotations must be >= 0");

  check(domain.x1 > domain.x0, "domain.x1", "x1 must be > x0");
  check(domain.y1 > domain.y0, "domain.y1", "y1 must be > y0");
  check(level >= 2 && level % 2 == 0, "domain.level", "level must be even and >= 2");
  if (level >= 2 && level <= 40 && domain.x1 > domain.x0 && domain.y1 > domain.y0) {
    const double h = domain.width() / static_cast<double>(1LL << (level / 2));
    const double ny = domain.height() / h;
    check(std::abs(ny - std::round(ny)) <= 1e-9 * ny && std::round(ny) >= 1.0, "domain.level",
          "domain height must be an integer multiple of the mesh size");
  }
  check(level <= 40, "domain.level", "level must be <= 40");

  check(fv_order == 1 || fv_order == 2, "discretization.fv_order", "fv_order must be 1 or 2");
  check(p.elements == Elements::TaylorHood || p.elements == Elements::StabilizedP1P1, "discretization.elements",
        "unknown element pair");

  check(t_end >= 0.0, "solver.t_end", "t_end must be >= 0");
  check(tols.eps_v > 0.0, "solver.eps_v", "eps_v must be > 0");
  check(tols.eps_phi > 0.0, "solver.eps_phi", "eps_phi must be > 0");
  check(tols.max_inner_iterations >= 1, "solver.max_inner", "max_inner must be >= 1");
  check(fe_tolerance > 0.0, "solver.fe_tolerance", "fe_tolerance must be > 0");
  check(timestep.safety > 0.0, "solver.safety", "safety must be > 0");
  check(timestep.v_min > 0.0, "solver.v_min", "v_min must be > 0");
  check(timestep.v_max > timestep.v_min, "solver.v_max", "v_max must be > v_min");
  check(timestep.fixed_tau >= 0.0, "solver.fixed_tau", "fixed_tau must be >= 0");
  check(audit_tol > 0.0, "solver.audit_tol", "audit_tol must be > 0");

  for (const auto& [key, value] : {std::pair{"adaptivity.c_ref_phi", adapt.c_ref_phi},
                                   std::pair{"adaptivity.c_coarse_phi", adapt.c_coarse_phi},
                                   std::pair{"adaptivity.c_ref_v", adapt.c_ref_v},
                                   std::pair{"adaptivity.c_coarse_v", adapt.c_coarse_v}}) {
    check(value > 0.0 && value < 1.0, key, "constant must lie in (0, 1)");
  }
  if (adapt.enabled) {
    check(adapt.min_level >= 2, "adaptivity.min_level", "min_level must be >= 2");
    check(adapt.max_level >= adapt.min_level, "adaptivity.max_level", "max_level must be >= min_level");
    check(level >= adapt.min_level && level <= adapt.max_level, "domain.level",
          "level must lie in [min_level, max_level]");
  }

  const InterfaceSpec& s = interface;
  if (s.shape == Shape::Ellipse) {
    check(s.radius_x > 0.0, "scenario.radius_x", "radius_x must be > 0");
    check(s.radius_y > 0.0, "scenario.radius_y", "radius_y must be > 0");
  } else if (s.shape == Shape::Annulus) {
    check(s.radius_inner > 0.0, "scenario.radius_inner", "radius_inner must be > 0");
    check(s.radius_outer > s.radius_inner, "scenario.radius_outer", "radius_outer must be > radius_inner");
  } else {
    check(s.waves >= 0.0, "scenario.waves", "waves must be >= 0");
  }
  check(output.snapshot_every >= 0, "output.snapshot_every", "snapshot_every must be >= 0");
}

Config parse_config(std::istream& in, const std::string& base_scenario) {
  const std::vector<Line> lines = tokenize(in);
  std::string name = base_scenario;
  if (name.empty()) {
    for (const Line& l : lines) {
      if (l.key == "scenario.name") name = l.value;
    }
  }
  const bool named = !name.empty() && name != "custom";
  Config base;
  try {
    base = named ? preset(name) : default_config();
  } catch (const ConfigError& e) {
    int number = 0;
    for (const Line& l : lines) {
      if (l.key == "scenario.name") number = l.number;
    }
    throw ConfigError(number ? "line " + std::to_string(number) + ": " + e.what() : e.what(), number);
  }
  Config c = base;
  for (const Line& l : lines) {
    if (l.key == "scenario.name") continue;
    try {
      set_config_value(c, l.key, l.value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(l.number) + ": " + e.what(), l.number);
    }
  }
  std::vector<std::string> still;
  for (const std::string& k : base.defaulted) {
    if (get_config_value(c, k) == get_config_value(base, k)) still.push_back(k);
  }
  c.defaulted = std::move(still);
  c.validate();
  return c;
}

Config parse_config_string(const std::string& text, const std::string& base_scenario) {
  std::istringstream in(text);
  return parse_config(in, base_scenario);
}

Config load_config(const std::string& path, const std::string& base_scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, base_scenario);
}

std::string dump_config(const Config& c) {
  std::ostringstream out;
  std::string section;
  for (const auto& [name, def] : table()) {
    const std::string s = name.substr(0, name.find('.'));
    if (s != section) {
      if (!section.empty()) out << '\n';
      section = s;
    }
    out << name << " = " << def.get(c) << '\n';
  }
  if (!c.defaulted.empty()) {
    out << "\n# defaulted:\n";
    for (const std::string& k : c.defaulted) out << "#   " << k << " = " << get_config_value(c, k) << '\n';
  }
  return out.str();
}

RunOptions to_run_options(const Config& c) {
  c.validate();
  RunOptions o;
  o.domain = c.domain;
  o.level = c.level;
  o.adapt = c.adapt;
  o.params = c.params;
  o.step.tols = c.tols;
  o.step.convection = c.convection;
  o.step.fv_order = c.fv_order;
  o.step.fe_tolerance = c.fe_tolerance;
  o.timestep = c.timestep;
  o.t_end = c.t_end;
  o.max_steps = c.max_steps;
  o.audit_tol = c.audit_tol;
  o.initial_phi = initial_profile(c.interface, c.domain, c.params.delta);
  return o;
}

}  // namespace phaseflow
