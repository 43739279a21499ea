#include "phaseflow/momentum.hpp"

#include "phaseflow/error.hpp"
#include "phaseflow/parallel.hpp"
#include "phaseflow/quadrature.hpp"

namespace phaseflow {

Discretization::Discretization(MeshPtr m, Elements e, VelocityBc bc) : mesh(std::move(m)), elements(e) {
  scalar = make_space(mesh, SpaceKind::P1Scalar);
  velocity = make_space(mesh, e == Elements::TaylorHood ? SpaceKind::P2Vector : SpaceKind::P1Vector, bc);
  hat_integrals = p1_hat_integrals(*mesh);
}

Field density_from_phase(const Field& phi, const PhysParams& params) {
  Field out(phi.space);
  for (int i = 0; i < phi.size(); ++i) out.values[i] = params.density(phi.values[i]);
  return out;
}

Field viscosity_from_phase(const Field& phi, const PhysParams& params) {
  Field out(phi.space);
  for (int i = 0; i < phi.size(); ++i) out.values[i] = params.viscosity(phi.values[i]);
  return out;
}

Field delta_rho(const Field& phi_old, const Field& phi_new, const PhysParams& params) {
  if (phi_old.size() != phi_new.size()) throw ParameterError("delta_rho: fields differ in size");
  Field out(phi_new.space);
  for (int i = 0; i < phi_new.size(); ++i) {
    const double a = phi_old.values[i], b = phi_new.values[i];
    out.values[i] = a == b ? params.density_slope() : (params.density(b) - params.density(a)) / (b - a);
  }
  return out;
}

std::vector<Vec2> compute_flux_j(const Field& mu, double mobility) {
  const Mesh& mesh = mu.mesh();
  std::vector<Vec2> j(mesh.num_triangles(), Vec2::Zero());
  if (mobility == 0.0) return j;
  const Lambda center{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  for (int t = 0; t < mesh.num_triangles(); ++t) j[t] = -mobility * mu.gradient(t, center);
  return j;
}

namespace {

void require_velocity(const FeSpace& v) {
  if (!v.is_vector()) throw ParameterError("expected a velocity space");
}

int p1_value_order(const Field& f) { return f.fe().order(); }

// Skew part of the scalar block T_nm = integral of weight * (a . grad phi_m) phi_n, placed on
// both velocity components. `advect(t, l)` returns weight * a at the quadrature point.
SparseMatrix skew_convection(const FeSpace& velocity, int degree,
                             const std::function<Vec2(int, const Lambda&)>& advect) {
  const Mesh& mesh = velocity.mesh();
  const int npe = velocity.nodes_per_element();
  const int order = velocity.order();
  const Quadrature& q = Quadrature::triangle(degree);
  const int n = velocity.num_dofs();
  return assemble_matrix(n, n, mesh.num_triangles(), [&](int t, std::vector<Triplet>& out) {
    const ElementGeometry g = element_geometry(mesh, t);
    double tm[6][6] = {};
    double phi[6];
    Vec2 grad[6];
    for (int k = 0; k < q.size(); ++k) {
      const Vec2 a = advect(t, q.points[k]);
      if (a.x() == 0.0 && a.y() == 0.0) continue;
      basis_values(order, q.points[k], phi);
      basis_gradients(order, q.points[k], g, grad);
      const double w = 2.0 * g.area * q.weights[k];
      for (int r = 0; r < npe; ++r) {
        for (int c = 0; c < npe; ++c) tm[r][c] += w * a.dot(grad[c]) * phi[r];
      }
    }
    for (int r = 0; r < npe; ++r) {
      const int nr = velocity.element_node(t, r);
      for (int c = r + 1; c < npe; ++c) {
        const int nc = velocity.element_node(t, c);
        const double s = 0.5 * (tm[r][c] - tm[c][r]);
        for (int comp = 0; comp < 2; ++comp) {
          out.emplace_back(velocity.dof(nr, comp), velocity.dof(nc, comp), s);
          out.emplace_back(velocity.dof(nc, comp), velocity.dof(nr, comp), -s);
        }
      }
    }
  });
}

}  // namespace

SparseMatrix assemble_Na(const FeSpace& velocity, const Field& rho, const Field& v_old) {
  require_velocity(velocity);
  if (v_old.size() != velocity.num_dofs()) throw ParameterError("assemble_Na: velocity space mismatch");
  const int degree = p1_value_order(rho) + v_old.fe().order() + 2 * velocity.order() - 1;
  return skew_convection(velocity, degree, [&](int t, const Lambda& l) { return rho.value(t, l) * v_old.vector_value(t, l); });
}

SparseMatrix assemble_Nb(const FeSpace& velocity, const Field& drho, const std::vector<Vec2>& j) {
  require_velocity(velocity);
  if (static_cast<int>(j.size()) != velocity.mesh().num_triangles()) throw ParameterError("assemble_Nb: flux size mismatch");
  const int degree = p1_value_order(drho) + 2 * velocity.order() - 1;
  return skew_convection(velocity, degree, [&](int t, const Lambda& l) { return drho.value(t, l) * j[t]; });
}

SparseMatrix assemble_viscous(const FeSpace& velocity, const Field& eta) {
  require_velocity(velocity);
  if (eta.values.size() > 0 && !(eta.values.minCoeff() > 0.0)) throw ParameterError("viscosity must be > 0");
  const Mesh& mesh = velocity.mesh();
  const int npe = velocity.nodes_per_element();
  const int order = velocity.order();
  const Quadrature& q = Quadrature::triangle(2 * order - 1);
  const int n = velocity.num_dofs();
  return assemble_matrix(n, n, mesh.num_triangles(), [&](int t, std::vector<Triplet>& out) {
    const ElementGeometry g = element_geometry(mesh, t);
    double a[12][12] = {};
    Vec2 grad[6];
    for (int k = 0; k < q.size(); ++k) {
      basis_gradients(order, q.points[k], g, grad);
      const double w = 2.0 * g.area * q.weights[k] * eta.value(t, q.points[k]);
      for (int r = 0; r < npe; ++r) {
        for (int s = 0; s < npe; ++s) {
          const double gg = grad[r].dot(grad[s]);
          for (int c = 0; c < 2; ++c) {
            for (int d = 0; d < 2; ++d) a[2 * r + c][2 * s + d] += w * ((c == d ? gg : 0.0) + grad[r][d] * grad[s][c]);
          }
        }
      }
    }
    for (int r = 0; r < npe; ++r) {
      const int nr = velocity.element_node(t, r);
      for (int s = 0; s < npe; ++s) {
        const int ns = velocity.element_node(t, s);
        for (int c = 0; c < 2; ++c) {
          for (int d = 0; d < 2; ++d) out.emplace_back(velocity.dof(nr, c), velocity.dof(ns, d), a[2 * r + c][2 * s + d]);
        }
      }
    }
  });
}

SparseMatrix assemble_divergence(const FeSpace& velocity, const FeSpace& pressure) {
  require_velocity(velocity);
  const Mesh& mesh = velocity.mesh();
  const int npe = velocity.nodes_per_element();
  const int order = velocity.order();
  const Quadrature& q = Quadrature::triangle(order);
  return assemble_matrix(pressure.num_dofs(), velocity.num_dofs(), mesh.num_triangles(),
                         [&](int t, std::vector<Triplet>& out) {
                           const ElementGeometry g = element_geometry(mesh, t);
                           double integ[6] = {};
                           double phi[6];
                           for (int k = 0; k < q.size(); ++k) {
                             basis_values(order, q.points[k], phi);
                             for (int r = 0; r < npe; ++r) integ[r] += 2.0 * g.area * q.weights[k] * phi[r];
                           }
                           const auto& vt = mesh.triangle(t).v;
                           for (int i = 0; i < 3; ++i) {
                             for (int r = 0; r < npe; ++r) {
                               const int nr = velocity.element_node(t, r);
                               for (int c = 0; c < 2; ++c) out.emplace_back(vt[i], velocity.dof(nr, c), integ[r] * g.grad[i][c]);
                             }
                           }
                         });
}

SparseMatrix assemble_stabilization(const FeSpace& pressure, const Field& eta) {
  const Mesh& mesh = pressure.mesh();
  const int n = pressure.num_dofs();
  if (eta.values.size() > 0 && !(eta.values.minCoeff() > 0.0)) throw ParameterError("viscosity must be > 0");
  return assemble_matrix(n, n, mesh.num_triangles(), [&](int t, std::vector<Triplet>& out) {
    const auto& vt = mesh.triangle(t).v;
    const double eta_c = (eta.values[vt[0]] + eta.values[vt[1]] + eta.values[vt[2]]) / 3.0;
    const double s = mesh.area(t) / eta_c;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) out.emplace_back(vt[a], vt[b], s * ((a == b ? 2.0 : 1.0) / 12.0 - 1.0 / 9.0));
    }
  });
}

namespace {

// Sum over elements of integral of f(t, l) * phi_r, placed on component dofs.
Vector vector_load(const FeSpace& velocity, int degree, const std::function<Vec2(int, const Lambda&)>& f) {
  const Mesh& mesh = velocity.mesh();
  const int npe = velocity.nodes_per_element();
  const int order = velocity.order();
  const Quadrature& q = Quadrature::triangle(degree);
  return assemble_vector(velocity.num_dofs(), mesh.num_triangles(), [&](int t, std::vector<std::pair<int, double>>& out) {
    const double area = mesh.area(t);
    double loc[6][2] = {};
    double phi[6];
    for (int k = 0; k < q.size(); ++k) {
      const Vec2 val = f(t, q.points[k]);
      basis_values(order, q.points[k], phi);
      const double w = 2.0 * area * q.weights[k];
      for (int r = 0; r < npe; ++r) {
        loc[r][0] += w * val.x() * phi[r];
        loc[r][1] += w * val.y() * phi[r];
      }
    }
    for (int r = 0; r < npe; ++r) {
      const int nr = velocity.element_node(t, r);
      out.emplace_back(velocity.dof(nr, 0), loc[r][0]);
      out.emplace_back(velocity.dof(nr, 1), loc[r][1]);
    }
  });
}

}  // namespace

Vector assemble_force(const FeSpace& velocity, const ForceSpec& force, double t, const Field& rho) {
  require_velocity(velocity);
  if (force.kind == ForceKind::None) return Vector::Zero(velocity.num_dofs());
  const Vec2 f = force.at(t);
  if (force.weighted) {
    return vector_load(velocity, velocity.order() + 1, [&](int e, const Lambda& l) { return Vec2(rho.value(e, l) * f); });
  }
  return vector_load(velocity, velocity.order(), [&](int, const Lambda&) { return f; });
}

Vector assemble_rhs_K(const FeSpace& velocity, const Field& mu, const Field& phi, const Vector& force_load) {
  require_velocity(velocity);
  const Lambda center{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  Vector k = vector_load(velocity, velocity.order() + 1, [&](int t, const Lambda& l) {
    return Vec2(mu.value(t, l) * phi.gradient(t, center));
  });
  if (force_load.size() > 0) k += force_load;
  return k;
}

TimeTerms assemble_time_terms(const FeSpace& velocity, const Field& rho_old, const Field& rho_new, const Field& v_old,
                              double tau) {
  if (!(tau > 0.0)) throw ParameterError("time step must be > 0");
  const Vector m_old = lumped_mass_diagonal(velocity, rho_old);
  const Vector m_new = lumped_mass_diagonal(velocity, rho_new);
  TimeTerms out;
  const Vector d = (m_old + m_new) / (2.0 * tau);
  out.matrix.resize(d.size(), d.size());
  out.matrix.reserve(Eigen::VectorXi::Ones(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) out.matrix.insert(i, i) = d[i];
  out.matrix.makeCompressed();
  out.rhs = m_old.cwiseProduct(v_old.values) / tau;
  return out;
}

MomentumSystem assemble_momentum(const Discretization& disc, const PhysParams& params, const MomentumInput& in) {
  if (!in.phi_old || !in.phi_new || !in.mu_new || !in.v_old) throw ParameterError("momentum input is incomplete");
  const FeSpace& vel = *disc.velocity;
  const Field rho_old = density_from_phase(*in.phi_old, params);
  const Field rho_new = density_from_phase(*in.phi_new, params);
  const Field eta = viscosity_from_phase(*in.phi_old, params);

  MomentumSystem sys;
  sys.mass_old = assemble_lumped_mass(vel, rho_old);
  sys.mass_new = assemble_lumped_mass(vel, rho_new);
  sys.viscous = assemble_viscous(vel, eta);
  sys.Na = assemble_Na(vel, rho_old, *in.v_old);
  if (params.model == Model::AGG && params.mobility != 0.0) {
    sys.Nb = assemble_Nb(vel, delta_rho(*in.phi_old, *in.phi_new, params), compute_flux_j(*in.mu_new, params.mobility));
  } else {
    sys.Nb = SparseMatrix(vel.num_dofs(), vel.num_dofs());
  }
  sys.B = assemble_divergence(vel, *disc.scalar);
  if (disc.elements == Elements::StabilizedP1P1) sys.C = assemble_stabilization(*disc.scalar, eta);
  sys.force_load = assemble_force(vel, params.force, in.t, rho_old);
  sys.K = assemble_rhs_K(vel, *in.mu_new, *in.phi_new, sys.force_load);

  const double inv2tau = 1.0 / (2.0 * in.tau);
  SaddleSystem& s = sys.saddle;
  s.G = inv2tau * (sys.mass_old + sys.mass_new) + sys.viscous + sys.Na + sys.Nb;
  s.B = sys.B;
  s.C = sys.C;
  s.f = (sys.mass_old * in.v_old->values) / in.tau + sys.K;
  s.g = Vector::Zero(disc.scalar->num_dofs());
  s.mean_weights = disc.hat_integrals;
  s.constrained = vel.constrained();
  return sys;
}

MomentumResult solve_momentum(const Discretization& disc, const PhysParams& params, const MomentumInput& in, double tol,
                              SaddleMethod method) {
  if (!(in.tau > 0.0)) throw ParameterError("time step must be > 0");
  MomentumSystem sys = assemble_momentum(disc, params, in);
  const SaddleSolution sol = solve_saddle(sys.saddle, tol, method);
  MomentumResult out;
  out.v = Field(disc.velocity, sol.v);
  out.p = Field(disc.scalar, sol.p);
  out.divergence_residual = sol.divergence_residual;
  out.momentum_residual = sol.momentum_residual;
  out.force_load = std::move(sys.force_load);
  return out;
}

void apply_velocity_constraints(Field& v) {
  const auto& c = v.fe().constrained();
  for (int d = 0; d < v.size(); ++d) {
    if (c[d]) v.values[d] = 0.0;
  }
}

}  // namespace phaseflow
