#pragma once

#include <memory>

#include "phaseflow/cahn_hilliard.hpp"
#include "phaseflow/dual_grid.hpp"
#include "phaseflow/momentum.hpp"

namespace phaseflow {

// Everything that depends only on the mesh: spaces, dual grid and the fixed P1 operators.
struct MeshContext {
  Discretization disc;
  DualGrid dual;
  ChOperators ch;

  MeshContext(MeshPtr mesh, Elements elements, VelocityBc bc);

  const Mesh& mesh() const { return *disc.mesh; }
  // Finite-volume cell volumes; the P1 hat integrals keep FV and FE mass identical.
  const Vector& volumes() const { return disc.hat_integrals; }
};

using ContextPtr = std::shared_ptr<const MeshContext>;

ContextPtr make_context(MeshPtr mesh, Elements elements, VelocityBc bc);

struct State {
  double t = 0.0;
  ContextPtr ctx;
  Field phi;
  Field mu;
  Field v;
  Field p;
  double mass_phi = 0.0;  // integral of phi

  const Mesh& mesh() const { return ctx->mesh(); }
};

// Zero velocity and pressure, mu computed from phi.
State make_state(ContextPtr ctx, const Field& phi, const DoubleWell& dw, double t = 0.0);

}  // namespace phaseflow
