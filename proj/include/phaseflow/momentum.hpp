#pragma once

#include <vector>

#include "phaseflow/fem.hpp"
#include "phaseflow/linalg.hpp"
#include "phaseflow/physics.hpp"

namespace phaseflow {

// Scalar P1 space for phi, mu, p and the velocity space matching the element choice.
struct Discretization {
  MeshPtr mesh;
  SpacePtr scalar;
  SpacePtr velocity;
  Vector hat_integrals;  // integrals of the P1 hat functions
  Elements elements = Elements::TaylorHood;

  Discretization(MeshPtr m, Elements e, VelocityBc bc);
};

Field density_from_phase(const Field& phi, const PhysParams& params);
Field viscosity_from_phase(const Field& phi, const PhysParams& params);

// Nodal difference quotient (rho(new) - rho(old)) / (new - old), falling back to the
// derivative of rho where the two phase values coincide.
Field delta_rho(const Field& phi_old, const Field& phi_new, const PhysParams& params);

// j = -M grad(mu) per element.
std::vector<Vec2> compute_flux_j(const Field& mu, double mobility);

// Skew-symmetric convection matrices.
SparseMatrix assemble_Na(const FeSpace& velocity, const Field& rho, const Field& v_old);
SparseMatrix assemble_Nb(const FeSpace& velocity, const Field& drho, const std::vector<Vec2>& j);

// integral of 2 eta D(v) : D(w).
SparseMatrix assemble_viscous(const FeSpace& velocity, const Field& eta);

// B_ij = integral of w_j . grad psi_i.
SparseMatrix assemble_divergence(const FeSpace& velocity, const FeSpace& pressure);

// Pressure stabilization for the equal-order pair, with 1/eta taken at the element barycenter.
SparseMatrix assemble_stabilization(const FeSpace& pressure, const Field& eta);

// Load vector of the body force at time t. For density-weighted forces rho is used as the
// weight.
Vector assemble_force(const FeSpace& velocity, const ForceSpec& force, double t, const Field& rho);

// K_i = integral of mu grad(phi) . w_i + force load.
Vector assemble_rhs_K(const FeSpace& velocity, const Field& mu, const Field& phi, const Vector& force_load);

struct TimeTerms {
  SparseMatrix matrix;  // (M(rho_old) + M(rho_new)) / (2 tau)
  Vector rhs;           // M(rho_old) v_old / tau
};

TimeTerms assemble_time_terms(const FeSpace& velocity, const Field& rho_old, const Field& rho_new, const Field& v_old,
                              double tau);

struct MomentumInput {
  const Field* phi_old = nullptr;
  const Field* phi_new = nullptr;
  const Field* mu_new = nullptr;
  const Field* v_old = nullptr;
  double tau = 0.0;
  double t = 0.0;  // time at which the force is evaluated
};

struct MomentumSystem {
  SparseMatrix mass_old;
  SparseMatrix mass_new;
  SparseMatrix viscous;
  SparseMatrix Na;
  SparseMatrix Nb;
  SparseMatrix B;
  SparseMatrix C;  // empty for Taylor-Hood
  Vector K;
  Vector force_load;
  SaddleSystem saddle;
};

MomentumSystem assemble_momentum(const Discretization& disc, const PhysParams& params, const MomentumInput& in);

struct MomentumResult {
  Field v;
  Field p;
  double divergence_residual = 0.0;
  double momentum_residual = 0.0;
  Vector force_load;
};

MomentumResult solve_momentum(const Discretization& disc, const PhysParams& params, const MomentumInput& in,
                              double tol = 1e-10, SaddleMethod method = SaddleMethod::Monolithic);

// Zeroes the constrained velocity dofs.
void apply_velocity_constraints(Field& v);

}  // namespace phaseflow
