#pragma once

#include <algorithm>
#include <vector>

#include "phaseflow/dual_grid.hpp"
#include "phaseflow/fem.hpp"
#include "phaseflow/linalg.hpp"

namespace phaseflow {

// F(phi) = (phi^2 - 1)^2 / 4 split into the convex part (phi^4 + 1) / 4 and the concave
// part -phi^2 / 2. sigma scales the interfacial energy, delta is the interface width.
struct DoubleWell {
  double sigma = 1.0;
  double delta = 1.0;
};

struct DoubleWellValues {
  double F = 0.0;
  double dF = 0.0;
  double dF_plus = 0.0;
  double dF_minus = 0.0;
};

DoubleWellValues double_well_eval(double phi, const DoubleWell& dw = {});
inline double double_well(double phi) { return 0.25 * (phi * phi - 1.0) * (phi * phi - 1.0); }
inline double double_well_plus(double phi) { return 0.25 * (phi * phi * phi * phi + 1.0); }
inline double double_well_minus(double phi) { return -0.5 * phi * phi; }
inline double double_well_plus_second(double phi) { return 3.0 * phi * phi; }

// Upwind (Engquist-Osher for a linear flux) numerical flux across a face.
inline double eo_flux(double u_n, double phi_l, double phi_r, double face_measure) {
  return face_measure * (std::max(u_n, 0.0) * phi_l + std::min(u_n, 0.0) * phi_r);
}

// Cell values of the finite-volume function; identical to the P1 nodal values.
struct FvField {
  Vector values;
};

FvField to_fv(const Field& phi);
Field to_fe(const FvField& phi, SpacePtr space);

// Limited linear reconstruction: per face, the trace seen from cell i (left) and from cell
// j (right), evaluated at the primal edge midpoint.
struct FaceTraces {
  std::vector<double> left;
  std::vector<double> right;
};

FaceTraces minmod_reconstruct(const FvField& phi, const Mesh& mesh, const DualGrid& dual);

// Least-squares gradient per cell over the primal edge neighbours.
std::vector<Vec2> cell_gradients(const FvField& phi, const Mesh& mesh, const DualGrid& dual);

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return a > 0.0 ? std::min(a, b) : std::max(a, b);
}

// Integrated normal velocity over each dual face (sum over its pieces of length times the
// velocity at the piece midpoint), and over each boundary face.
struct FaceVelocities {
  std::vector<double> interior;  // oriented from cell i to cell j
  std::vector<double> boundary;  // outward
};

FaceVelocities dual_face_velocities(const Field& v, const DualGrid& dual);

struct TransportOptions {
  int order = 2;
  double cfl_limit = 0.9;
};

// Explicit finite-volume step
//   volume_i (phi_i^new - phi_i) / tau + sum_j F_ij = 0.
// Boundary faces use the cell value as ghost state, which gives zero flux when the velocity
// has no normal component. Throws CflViolation if tau / volume_i times the outflow of any
// cell exceeds the limit.
FvField fv_transport_step(const FvField& phi, const Field& v, double tau, const Mesh& mesh, const DualGrid& dual,
                          const Vector& volumes, const TransportOptions& opt = {});

// Largest admissible step for the CFL limit (infinity for a zero velocity).
double fv_max_timestep(const Field& v, const DualGrid& dual, const Vector& volumes, double cfl_limit = 0.9);

// Vector of integrals of (v . grad phi) psi_i over all P1 hat functions psi_i.
Vector fe_convection_vector(const Field& phi, const Field& v);

// Matrix C(v) with C_ij = integral of (v . grad psi_j) psi_i, so that C(v) phi is the
// convection vector.
SparseMatrix assemble_convection_matrix(const FeSpace& p1, const Field& v);

// P1 operators that stay fixed on a mesh.
struct ChOperators {
  SpacePtr space;
  SparseMatrix mass;
  SparseMatrix stiffness;
  Vector lumped;

  explicit ChOperators(SpacePtr p1);
};

struct ChOptions {
  double newton_tol = 1e-12;  // relative to the largest lumped mass
  int newton_maxit = 30;
  double linear_tol = 1e-13;
  int linear_maxit = 2000;
};

struct ChReport {
  int newton_iterations = 0;
  double residual = 0.0;
  double mass_before = 0.0;
  double mass_after = 0.0;
  double min_phi = 0.0;
  double max_phi = 0.0;
};

struct ChResult {
  Field phi;
  Field mu;
  ChReport report;
};

// Diffusive Cahn-Hilliard step with convex-concave splitting:
//   (phi - phi_half, psi) + tau M (grad mu, grad psi) [+ tau ((v . grad phi), psi)] = 0
//   (mu, psi) = sigma delta (grad phi, grad psi) + sigma/delta I_h((F+'(phi) + F-'(phi_old)) psi)
// The bracketed convection term is present only when `v` is given. Throws NewtonDivergence
// after newton_maxit iterations.
ChResult ch_diffusive_solve(const ChOperators& ops, const Field& phi_half, const Field& phi_old, double tau,
                            double mobility, const DoubleWell& dw, const ChOptions& opt = {},
                            const Field* v = nullptr, const Field* mu_guess = nullptr);

ChResult ch_diffusive_solve(const Field& phi_half, const Field& phi_old, double tau, double mobility,
                            const DoubleWell& dw, const ChOptions& opt = {});

// mu with (mu, psi) = sigma delta (grad phi, grad psi) + sigma/delta I_h(F'(phi) psi).
Field chemical_potential(const ChOperators& ops, const Field& phi, const DoubleWell& dw);

// sigma * integral(delta/2 |grad phi|^2 + I_h F(phi) / delta)
double interfacial_energy(const ChOperators& ops, const Field& phi, const DoubleWell& dw);

}  // namespace phaseflow
