#include "phaseflow/scheme_a_ref.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "phaseflow/error.hpp"
#include "phaseflow/quadrature.hpp"

namespace phaseflow {

ProjectionWorkspace::ProjectionWorkspace(SpacePtr p1_space)
    : p1(std::move(p1_space)), mass(assemble_mass(*p1)), solver(mass) {}

Vector l2_load(const FeSpace& p1, const ElementFunction& f, int degree) {
  const Mesh& mesh = p1.mesh();
  const Quadrature& q = Quadrature::triangle(degree + 1);
  Vector b = Vector::Zero(p1.num_dofs());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a2 = 2.0 * mesh.area(t);
    for (int k = 0; k < q.size(); ++k) {
      const double w = a2 * q.weights[k] * f(t, q.points[k]);
      for (int i = 0; i < 3; ++i) b[p1.element_node(t, i)] += w * q.points[k][i];
    }
  }
  return b;
}

Field l2_project(const ProjectionWorkspace& ws, const ElementFunction& f, int degree) {
  const Vector b = l2_load(*ws.p1, f, degree);
  Vector x = ws.solver.solve(b);
  const double res = (ws.mass * x - b).lpNorm<Eigen::Infinity>();
  if (res > 1e-12 * std::max(b.lpNorm<Eigen::Infinity>(), 1e-300)) {
    throw SolverError("L2 projection residual check failed", res);
  }
  return Field(ws.p1, std::move(x));
}

namespace {

using Dense = Eigen::MatrixXd;

// Barycentric coordinates of the six local P2 nodes and the red-refinement subtriangles.
constexpr double kNodeLambda[6][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
constexpr int kSub[4][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}, {3, 4, 5}};

// H(i, m) = integral of drho * I_{h/2}<v_old, w_i> * psi_m, with I_{h/2} the nodal
// interpolant on the red-refined mesh.
Dense projection_load(const FeSpace& vel, const FeSpace& p1, const Field& drho, const Field& v_old) {
  const Mesh& mesh = vel.mesh();
  const Quadrature& q = Quadrature::triangle(3);
  Dense h = Dense::Zero(vel.num_dofs(), p1.num_dofs());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double sub_area2 = 2.0 * mesh.area(t) / 4.0;
    for (const auto& sub : kSub) {
      for (int k = 0; k < q.size(); ++k) {
        Lambda l{0, 0, 0};
        for (int s = 0; s < 3; ++s) {
          for (int c = 0; c < 3; ++c) l[c] += q.points[k][s] * kNodeLambda[sub[s]][c];
        }
        const double w = sub_area2 * q.weights[k] * drho.value(t, l);
        for (int s = 0; s < 3; ++s) {
          const int node = vel.element_node(t, sub[s]);
          const double hat = q.points[k][s];
          for (int c = 0; c < 2; ++c) {
            const int i = vel.dof(node, c);
            const double vi = v_old.values[i];
            if (vi == 0.0) continue;
            for (int m = 0; m < 3; ++m) h(i, p1.element_node(t, m)) += w * vi * hat * l[m];
          }
        }
      }
    }
  }
  return h;
}

// Q(m, j) = integral of <w_j, grad phi> psi_m.
Dense transport_coupling(const FeSpace& vel, const FeSpace& p1, const Field& phi) {
  const Mesh& mesh = vel.mesh();
  const Quadrature& q = Quadrature::triangle(3);
  const int nb = vel.nodes_per_element();
  std::vector<double> basis(nb);
  Dense out = Dense::Zero(p1.num_dofs(), vel.num_dofs());
  const Lambda center{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a2 = 2.0 * mesh.area(t);
    const Vec2 gphi = phi.gradient(t, center);
    for (int k = 0; k < q.size(); ++k) {
      basis_values(vel.order(), q.points[k], basis.data());
      for (int a = 0; a < nb; ++a) {
        const int node = vel.element_node(t, a);
        for (int c = 0; c < 2; ++c) {
          const double wv = a2 * q.weights[k] * basis[a] * gphi[c];
          for (int m = 0; m < 3; ++m) out(p1.element_node(t, m), vel.dof(node, c)) += wv * q.points[k][m];
        }
      }
    }
  }
  return out;
}

// r_m = integral of j . grad psi_m.
Vector flux_load(const FeSpace& p1, const std::vector<Vec2>& j) {
  const Mesh& mesh = p1.mesh();
  Vector r = Vector::Zero(p1.num_dofs());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    for (int m = 0; m < 3; ++m) r[p1.element_node(t, m)] += g.area * j[t].dot(g.grad[m]);
  }
  return r;
}

struct DenseMomentum {
  Field v;
  Field p;
};

DenseMomentum solve_dense_momentum(const MeshContext& c, const PhysParams& params, const Field& phi_old,
                                   const Field& phi_new, const Field& mu_new, const Field& v_old, double tau, double t,
                                   const Dense& mass_inverse) {
  const FeSpace& vel = *c.disc.velocity;
  const FeSpace& p1 = *c.disc.scalar;
  const int nv = vel.num_dofs();
  const int np = p1.num_dofs();

  const Field rho_old = density_from_phase(phi_old, params);
  const Field rho_new = density_from_phase(phi_new, params);
  const Field drho = delta_rho(phi_old, phi_new, params);
  const std::vector<Vec2> j = compute_flux_j(mu_new, params.mobility);

  const SparseMatrix mavg = 0.5 * (assemble_lumped_mass(vel, rho_old) + assemble_lumped_mass(vel, rho_new));
  SparseMatrix g_sparse = (1.0 / tau) * mavg + assemble_Na(vel, rho_old, v_old) +
                          assemble_viscous(vel, viscosity_from_phase(phi_old, params));
  if (params.model == Model::AGG) g_sparse += assemble_Nb(vel, drho, j);

  // P_h(drho I<v_old, w_i>) has coefficients row i of hp.
  const Dense hp = projection_load(vel, p1, drho, v_old) * mass_inverse;
  Dense g = Dense(g_sparse) - 0.5 * hp * transport_coupling(vel, p1, phi_new);
  const Vector force = assemble_force(vel, params.force, t, rho_old);
  Vector f = (mavg * v_old.values) / tau + assemble_rhs_K(vel, mu_new, phi_new, force) - 0.5 * hp * flux_load(p1, j);

  const Dense b = Dense(assemble_divergence(vel, p1));
  const int n = nv + np + 1;
  Dense a = Dense::Zero(n, n);
  Vector rhs = Vector::Zero(n);
  const auto& constrained = vel.constrained();
  for (int i = 0; i < nv; ++i) {
    if (constrained[i]) {
      a(i, i) = 1.0;
      continue;
    }
    for (int k = 0; k < nv; ++k) {
      if (!constrained[k]) a(i, k) = g(i, k);
    }
    for (int m = 0; m < np; ++m) a(i, nv + m) = b(m, i);
    rhs[i] = f[i];
  }
  for (int m = 0; m < np; ++m) {
    for (int k = 0; k < nv; ++k) {
      if (!constrained[k]) a(nv + m, k) = b(m, k);
    }
    a(nv + m, nv + np) = c.disc.hat_integrals[m];
    a(nv + np, nv + m) = c.disc.hat_integrals[m];
  }
  const Eigen::PartialPivLU<Dense> lu(a);
  Vector x = lu.solve(rhs);
  for (int it = 0; it < 2; ++it) x += lu.solve(rhs - a * x);

  DenseMomentum out{Field(c.disc.velocity, x.head(nv)), Field(c.disc.scalar, x.segment(nv, np))};
  apply_velocity_constraints(out.v);
  return out;
}

}  // namespace

SchemeAResult scheme_a_step(const State& s, double tau, const PhysParams& params, const SchemeAOptions& opt) {
  if (!(tau > 0.0)) throw ParameterError("time step must be > 0");
  const MeshContext& c = *s.ctx;
  if (c.disc.elements != Elements::TaylorHood) throw ParameterError("the projection scheme requires Taylor-Hood elements");
  const DoubleWell dw{params.sigma, params.delta};
  const Dense mass_inverse = Dense(c.ch.mass).inverse();

  auto cahn_hilliard = [&](const Field& v, const Field& mu_guess) {
    return ch_diffusive_solve(c.ch, s.phi, s.phi, tau, params.mobility, dw, opt.ch, &v, &mu_guess);
  };

  ChResult cur = cahn_hilliard(s.v, s.mu);
  Field v_prev = s.v;
  Field p;
  for (int i = 1; i <= opt.max_iterations; ++i) {
    DenseMomentum me = solve_dense_momentum(c, params, s.phi, cur.phi, cur.mu, s.v, tau, s.t, mass_inverse);
    ChResult next = cahn_hilliard(me.v, cur.mu);
    const double dv = (me.v.values - v_prev.values).lpNorm<Eigen::Infinity>();
    const double dphi = (next.phi.values - cur.phi.values).lpNorm<Eigen::Infinity>();
    v_prev = std::move(me.v);
    p = std::move(me.p);
    cur = std::move(next);
    if (dv <= opt.tol && dphi <= opt.tol) {
      SchemeAResult out;
      out.iterations = i;
      out.state.t = s.t + tau;
      out.state.ctx = s.ctx;
      out.state.phi = std::move(cur.phi);
      out.state.mu = std::move(cur.mu);
      out.state.v = std::move(v_prev);
      out.state.p = std::move(p);
      out.state.mass_phi = c.volumes().dot(out.state.phi.values);
      return out;
    }
  }
  throw StepRejected("projection scheme fixed-point iteration did not converge");
}

}  // namespace phaseflow
