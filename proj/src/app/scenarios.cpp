#include "phaseflow/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phaseflow/error.hpp"

namespace phaseflow {

namespace {

// Root of (r0 z0 / (s + r0))^2 + (z1 / (s + 1))^2 = 1 by bisection to machine precision.
double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double a = n0 / (s + r0), b = z1 / (s + 1.0);
    const double f = a * a + b * b - 1.0;
    if (f > 0.0) {
      s0 = s;
    } else if (f < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

// Unsigned distance from (y0, y1) >= 0 to the ellipse with half-axes e0 >= e1 > 0.
double quadrant_distance(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double s = ellipse_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (s + r0), x1 = y1 / (s + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer = e0 * y0, denom = e0 * e0 - e1 * e1;
  if (numer < denom) {
    const double xd = numer / denom;
    const double x0 = e0 * xd, x1 = e1 * std::sqrt(1.0 - xd * xd);
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

}  // namespace

double ellipse_signed_distance(const Vec2& p, const Vec2& center, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("ellipse half-axes must be > 0");
  double y0 = std::abs(p.x() - center.x()), y1 = std::abs(p.y() - center.y());
  double e0 = a, e1 = b;
  if (e0 < e1) {
    std::swap(e0, e1);
    std::swap(y0, y1);
  }
  const double d = quadrant_distance(e0, e1, y0, y1);
  const double q = (y0 / e0) * (y0 / e0) + (y1 / e1) * (y1 / e1);
  return q < 1.0 ? d : -d;
}

double interface_signed_distance(const InterfaceSpec& s, const Rect& domain, const Vec2& p) {
  switch (s.shape) {
    case Shape::Ellipse:
      return ellipse_signed_distance(p, s.center, s.radius_x, s.radius_y);
    case Shape::Annulus: {
      const double r = (p - s.center).norm();
      return std::min(r - s.radius_inner, s.radius_outer - r);
    }
    case Shape::Cosine: {
      const double arg = 2.0 * std::numbers::pi * s.waves * (p.x() - domain.x0) / domain.width();
      return s.height + s.amplitude * std::cos(arg) - p.y();
    }
  }
  return 0.0;
}

std::function<double(const Vec2&)> initial_profile(const InterfaceSpec& s, const Rect& domain, double delta) {
  if (!(delta > 0.0)) throw ParameterError("delta must be > 0");
  const double scale = 1.0 / (std::sqrt(2.0) * delta);
  return [s, domain, scale](const Vec2& p) { return std::tanh(scale * interface_signed_distance(s, domain, p)); };
}

void set_atwood(PhysParams& p, double rho_avg, double atwood) {
  if (!(rho_avg > 0.0) || !(std::abs(atwood) < 1.0)) throw ParameterError("need rho_avg > 0 and |A| < 1");
  p.rho1 = rho_avg * (1.0 + atwood);
  p.rho2 = rho_avg * (1.0 - atwood);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"ellipse", "rising-droplet", "rising-droplet-r025", "rayleigh-taylor",
                                              "rotating-annulus"};
  return names;
}

Config default_config() {
  Config c;
  c.params.sigma = 1.0;
  c.params.delta = 0.05;
  c.params.mobility = 0.005;
  return c;
}

Config preset(const std::string& name) {
  Config c = default_config();
  c.scenario = name;
  PhysParams& p = c.params;
  if (name == "ellipse") {
    c.domain = Rect{-1.0, -1.0, 1.0, 1.0};
    c.level = 6;
    c.t_end = 2.5;
    p.rho1 = 0.001;
    p.rho2 = 0.019;
    p.eta1 = p.eta2 = 0.01;
    p.mobility = 0.5;
    p.delta = 0.1;
    p.force = ForceSpec{};
    p.elements = Elements::TaylorHood;
    c.interface = InterfaceSpec{};
    c.interface.shape = Shape::Ellipse;
    c.interface.center = Vec2(0.0, 0.0);
    c.interface.radius_x = 0.87;
    c.interface.radius_y = 0.29;
    c.defaulted = {"domain.level", "physics.bc", "discretization.elements"};
  } else if (name == "rising-droplet" || name == "rising-droplet-r025") {
    c.domain = Rect{0.0, 0.0, 1.0, 2.0};
    c.level = 8;
    c.t_end = 0.05;
    set_atwood(p, 0.01, 0.5);
    p.eta1 = 0.001;
    p.eta2 = 0.001;
    p.force = ForceSpec{ForceKind::Constant, Vec2(0.0, -1e4), 0.0, true};
    p.bc = VelocityBc::FreeSlip;
    c.interface = InterfaceSpec{};
    c.interface.shape = Shape::Ellipse;
    c.interface.center = Vec2(0.5, 0.5);
    c.interface.radius_x = c.interface.radius_y = name == "rising-droplet" ? 0.5 : 0.25;
    c.defaulted = {"domain.level", "physics.force_weighted", "physics.bc"};
    if (name != "rising-droplet") {
      c.defaulted.push_back("scenario.radius_x");
      c.defaulted.push_back("scenario.radius_y");
    }
  } else if (name == "rayleigh-taylor") {
    c.domain = Rect{0.0, 0.0, 1.0, 4.0};
    c.level = 8;
    c.t_end = 0.14;
    set_atwood(p, 0.001, 0.25);
    p.eta1 = p.eta2 = 1e-3;
    p.mobility = 0.01;
    p.delta = 0.1;
    p.sigma = 0.1;
    p.force = ForceSpec{ForceKind::Constant, Vec2(0.0, -1e5), 0.0, true};
    c.interface = InterfaceSpec{};
    c.interface.shape = Shape::Cosine;
    c.interface.height = 2.0;
    c.interface.amplitude = 0.1;
    c.interface.waves = 1.0;
    c.defaulted = {"scenario.shape", "scenario.height", "scenario.amplitude", "scenario.waves",
                   "domain.x0",      "domain.y0",       "domain.x1",          "domain.y1",
                   "domain.level",   "physics.force_weighted", "physics.bc"};
  } else if (name == "rotating-annulus") {
    c.domain = Rect{-1.0, -1.0, 1.0, 1.0};
    c.level = 8;
    c.t_end = 0.2;
    p.rho1 = 0.001;
    p.rho2 = 0.019;
    p.eta1 = p.eta2 = 0.01;
    p.force = ForceSpec{ForceKind::Rotating, Vec2(0.0, 100.0), 5.0, true};
    p.elements = Elements::StabilizedP1P1;
    p.model = Model::AGG;
    c.interface = InterfaceSpec{};
    c.interface.shape = Shape::Annulus;
    c.interface.center = Vec2(0.0, 0.0);
    c.interface.radius_inner = 0.3;
    c.interface.radius_outer = 0.5;
    c.defaulted = {"scenario.center_x", "scenario.center_y", "scenario.radius_inner", "scenario.radius_outer",
                   "domain.x0",         "domain.y0",         "domain.x1",             "domain.y1",
                   "domain.level",      "solver.t_end",      "physics.eta1",          "physics.eta2",
                   "physics.force_weighted", "physics.bc"};
  } else {
    std::string known;
    for (const std::string& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + name + "' (known: " + known + ")");
  }
  c.validate();
  return c;
}

}  // namespace phaseflow
