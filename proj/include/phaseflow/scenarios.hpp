#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phaseflow/config.hpp"

namespace phaseflow {

// ellipse, rising-droplet, rising-droplet-r025, rayleigh-taylor, rotating-annulus.
const std::vector<std::string>& preset_names();

// Throws ConfigError for unknown names.
Config preset(const std::string& name);

// Baseline used when no scenario is named: delta = 0.05, M = 0.005, nothing else set.
Config default_config();

// Distance from p to the ellipse with the given center and half-axes; positive inside.
double ellipse_signed_distance(const Vec2& p, const Vec2& center, double a, double b);

// Signed distance to the interface (positive on the phi = +1 side).
double interface_signed_distance(const InterfaceSpec& s, const Rect& domain, const Vec2& p);

// tanh(d / (sqrt(2) delta)) of the signed distance.
std::function<double(const Vec2&)> initial_profile(const InterfaceSpec& s, const Rect& domain, double delta);

// rho1 = rho_avg (1 + A), rho2 = rho_avg (1 - A), so A > 0 makes fluid 2 (phi = +1) lighter.
void set_atwood(PhysParams& p, double rho_avg, double atwood);

}  // namespace phaseflow
