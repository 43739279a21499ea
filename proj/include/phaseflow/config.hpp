#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "phaseflow/coupling.hpp"

namespace phaseflow {

enum class AuditMode { Strict, Log };

enum class Shape {
  Ellipse,  // phi = +1 inside the ellipse
  Annulus,  // phi = +1 between the two radii
  Cosine,   // phi = +1 below y = height + amplitude cos(2 pi waves (x - x0) / width)
};

struct InterfaceSpec {
  Shape shape = Shape::Ellipse;
  Vec2 center = Vec2::Zero();
  double radius_x = 0.87;
  double radius_y = 0.29;
  double radius_inner = 0.3;
  double radius_outer = 0.5;
  double height = 0.5;
  double amplitude = 0.0;
  double waves = 1.0;
};

struct OutputConfig {
  std::string directory = "phaseflow_out";
  int snapshot_every = 10;  // steps between VTK files; 0 writes only the first and last state
  bool vtk = true;
  bool vtk_quadratic = false;
};

struct Config {
  std::string scenario = "custom";
  Rect domain{-1.0, -1.0, 1.0, 1.0};
  int level = 6;
  double t_end = 0.1;
  int max_steps = -1;
  PhysParams params;
  SplitTolerances tols;
  TimestepConfig timestep;
  AdaptivityConfig adapt;
  Convection convection = Convection::FV;
  int fv_order = 2;
  double fe_tolerance = 1e-11;
  double audit_tol = 1e-8;
  AuditMode audit = AuditMode::Log;
  InterfaceSpec interface;
  OutputConfig output;
  std::uint64_t seed = 0;  // reserved
  std::vector<std::string> defaulted;  // keys whose values the source experiments leave open

  // Throws ConfigError naming the offending key.
  void validate() const;
};

std::string to_string(AuditMode m);
std::string to_string(Shape s);

// Every key understood by the parser, in dump order.
const std::vector<std::string>& config_keys();

// Reads `section.key = value` lines; '#' starts a comment. A `scenario.name` line selects the
// preset the remaining keys modify; `base_scenario` (if non-empty) takes its place.
// Throws ConfigError with the line number on syntax errors and unknown keys.
Config parse_config(std::istream& in, const std::string& base_scenario = "");
Config parse_config_string(const std::string& text, const std::string& base_scenario = "");
Config load_config(const std::string& path, const std::string& base_scenario = "");

// Sets one key from its text value; throws ConfigError on unknown keys or bad values.
void set_config_value(Config& c, const std::string& key, const std::string& value);
std::string get_config_value(const Config& c, const std::string& key);

// Canonical text form: all keys, one per line, followed by a `# defaulted:` block.
std::string dump_config(const Config& c);

// Core options for the time loop.
RunOptions to_run_options(const Config& c);

}  // namespace phaseflow
