#pragma once

#include <string>

#include "phaseflow/fem.hpp"
#include "phaseflow/geometry.hpp"

namespace phaseflow {

enum class Model { AGG, DSS };
enum class Elements { TaylorHood, StabilizedP1P1 };

enum class ForceKind {
  None,
  Constant,  // fixed vector
  Rotating,  // vector rotated counter-clockwise in time
};

struct ForceSpec {
  ForceKind kind = ForceKind::None;
  Vec2 vector = Vec2::Zero();
  double rotations_per_time = 0.0;
  bool weighted = false;  // the vector is an acceleration multiplied by rho(phi)

  // Force density (or acceleration when weighted) at time t.
  Vec2 at(double t) const;
};

struct PhysParams {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  double sigma = 1.0;
  double delta = 0.05;
  double mobility = 0.005;
  ForceSpec force;
  Model model = Model::AGG;
  Elements elements = Elements::TaylorHood;
  VelocityBc bc = VelocityBc::NoSlip;

  // Affine laws in phi; phi = -1 is fluid 1, phi = +1 fluid 2.
  double density(double phi) const { return 0.5 * (rho2 + rho1) + 0.5 * (rho2 - rho1) * phi; }
  double viscosity(double phi) const { return 0.5 * (eta2 + eta1) + 0.5 * (eta2 - eta1) * phi; }
  double density_slope() const { return 0.5 * (rho2 - rho1); }

  // Throws ParameterError naming the offending parameter.
  void validate() const;
};

std::string to_string(Model m);
std::string to_string(Elements e);
std::string to_string(ForceKind f);

}  // namespace phaseflow
