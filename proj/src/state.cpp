#include "phaseflow/state.hpp"

namespace phaseflow {

MeshContext::MeshContext(MeshPtr mesh, Elements elements, VelocityBc bc)
    : disc(mesh, elements, bc), dual(build_dual_grid(*mesh)), ch(disc.scalar) {}

ContextPtr make_context(MeshPtr mesh, Elements elements, VelocityBc bc) {
  return std::make_shared<const MeshContext>(std::move(mesh), elements, bc);
}

State make_state(ContextPtr ctx, const Field& phi, const DoubleWell& dw, double t) {
  State s;
  s.t = t;
  s.ctx = std::move(ctx);
  s.phi = phi;
  s.mu = chemical_potential(s.ctx->ch, phi, dw);
  s.v = Field(s.ctx->disc.velocity);
  s.p = Field(s.ctx->disc.scalar);
  s.mass_phi = s.ctx->volumes().dot(phi.values);
  return s;
}

}  // namespace phaseflow
