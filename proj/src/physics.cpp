#include "phaseflow/physics.hpp"

#include <cmath>
#include <numbers>

#include "phaseflow/error.hpp"

namespace phaseflow {

Vec2 ForceSpec::at(double t) const {
  if (kind == ForceKind::None) return Vec2::Zero();
  if (kind != ForceKind::Rotating) return vector;
  const double a = 2.0 * std::numbers::pi * rotations_per_time * t;
  const double c = std::cos(a), s = std::sin(a);
  return Vec2(c * vector.x() - s * vector.y(), s * vector.x() + c * vector.y());
}

void PhysParams::validate() const {
  if (!(rho1 > 0.0)) throw ParameterError("rho1 must be > 0");
  if (!(rho2 > 0.0)) throw ParameterError("rho2 must be > 0");
  if (!(eta1 > 0.0)) throw ParameterError("eta1 must be > 0");
  if (!(eta2 > 0.0)) throw ParameterError("eta2 must be > 0");
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
  if (!(delta > 0.0)) throw ParameterError("delta must be > 0");
  if (!(mobility >= 0.0)) throw ParameterError("mobility must be >= 0");
}

std::string to_string(Model m) { return m == Model::AGG ? "agg" : "dss"; }
std::string to_string(Elements e) { return e == Elements::TaylorHood ? "th" : "p1p1"; }

std::string to_string(ForceKind f) {
  switch (f) {
    case ForceKind::None:
      return "none";
    case ForceKind::Constant:
      return "constant";
    case ForceKind::Rotating:
      return "rotating";
  }
  return "none";
}

}  // namespace phaseflow
