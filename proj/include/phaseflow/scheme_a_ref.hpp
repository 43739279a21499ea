#pragma once

#include <functional>

#include "phaseflow/coupling.hpp"

namespace phaseflow {

// Factorized P1 mass matrix for L2 projections onto a fixed mesh.
struct ProjectionWorkspace {
  SpacePtr p1;
  SparseMatrix mass;
  DirectSolver solver;

  explicit ProjectionWorkspace(SpacePtr p1_space);
};

// Integrand evaluated at barycentric point l of triangle t.
using ElementFunction = std::function<double(int t, const Lambda& l)>;

// Orthogonal L2 projection onto P1; the load vector is exact for f of polynomial degree
// `degree` on each triangle.
// Throws SolverError if the mass-matrix residual exceeds 1e-12 relative.
Field l2_project(const ProjectionWorkspace& ws, const ElementFunction& f, int degree);

// Load vector (integral of f psi_i)_i for the same quadrature.
Vector l2_load(const FeSpace& p1, const ElementFunction& f, int degree);

struct SchemeAOptions {
  double tol = 1e-10;  // sup-norm increment tolerance of the fixed-point iteration
  int max_iterations = 200;
  ChOptions ch;
  double saddle_tol = 1e-10;
};

struct SchemeAResult {
  State state;
  int iterations = 0;
};

// One step of the projection-based scheme with divergence-free velocity test space, solved
// densely. Taylor-Hood only; intended for small meshes. Throws StepRejected if the
// fixed-point iteration does not converge.
SchemeAResult scheme_a_step(const State& s, double tau, const PhysParams& params, const SchemeAOptions& opt = {});

}  // namespace phaseflow
