#include "phaseflow/cahn_hilliard.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "phaseflow/error.hpp"
#include "phaseflow/parallel.hpp"
#include "phaseflow/quadrature.hpp"

namespace phaseflow {

DoubleWellValues double_well_eval(double phi, const DoubleWell&) {
  DoubleWellValues out;
  out.F = double_well(phi);
  out.dF_plus = phi * phi * phi;
  out.dF_minus = -phi;
  out.dF = out.dF_plus + out.dF_minus;
  return out;
}

FvField to_fv(const Field& phi) {
  if (phi.fe().is_vector() || phi.fe().order() != 1) throw ParameterError("finite-volume data must come from a P1 field");
  return FvField{phi.values};
}

Field to_fe(const FvField& phi, SpacePtr space) { return Field(std::move(space), phi.values); }

std::vector<Vec2> cell_gradients(const FvField& phi, const Mesh& mesh, const DualGrid& dual) {
  std::vector<Vec2> grad(dual.num_cells(), Vec2::Zero());
  for (int i = 0; i < dual.num_cells(); ++i) {
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Vec2 b = Vec2::Zero();
    for (int j : dual.neighbors[i]) {
      const Vec2 d = mesh.vertex(j) - mesh.vertex(i);
      a += d * d.transpose();
      b += d * (phi.values[j] - phi.values[i]);
    }
    grad[i] = a.ldlt().solve(b);
  }
  return grad;
}

FaceTraces minmod_reconstruct(const FvField& phi, const Mesh& mesh, const DualGrid& dual) {
  const std::vector<Vec2> g = cell_gradients(phi, mesh, dual);
  FaceTraces tr;
  tr.left.resize(dual.faces.size());
  tr.right.resize(dual.faces.size());
  for (std::size_t f = 0; f < dual.faces.size(); ++f) {
    const int i = dual.faces[f].i;
    const int j = dual.faces[f].j;
    const Vec2 e = mesh.vertex(j) - mesh.vertex(i);
    const double d = phi.values[j] - phi.values[i];
    tr.left[f] = phi.values[i] + 0.5 * minmod(d, 2.0 * g[i].dot(e) - d);
    tr.right[f] = phi.values[j] + 0.5 * minmod(-d, -2.0 * g[j].dot(e) + d);
  }
  return tr;
}

FaceVelocities dual_face_velocities(const Field& v, const DualGrid& dual) {
  if (!v.fe().is_vector()) throw ParameterError("transport velocity must be a vector field");
  const Mesh& mesh = v.mesh();
  FaceVelocities out;
  out.interior.assign(dual.faces.size(), 0.0);
  out.boundary.assign(dual.boundary_faces.size(), 0.0);
  for (std::size_t f = 0; f < dual.faces.size(); ++f) {
    const DualFace& face = dual.faces[f];
    double u = 0.0;
    for (int s = 0; s < face.num_segments; ++s) {
      const DualSegment& seg = face.segments[s];
      const Lambda l = barycentric(element_geometry(mesh, seg.triangle), seg.midpoint);
      u += seg.length * v.vector_value(seg.triangle, l).dot(face.normal);
    }
    out.interior[f] = u;
  }
  for (std::size_t b = 0; b < dual.boundary_faces.size(); ++b) {
    const DualBoundaryFace& bf = dual.boundary_faces[b];
    const Lambda l = barycentric(element_geometry(mesh, bf.triangle), bf.midpoint);
    out.boundary[b] = bf.measure * v.vector_value(bf.triangle, l).dot(bf.normal);
  }
  return out;
}

namespace {

std::vector<double> cell_outflow(const FaceVelocities& u, const DualGrid& dual) {
  std::vector<double> out(dual.num_cells(), 0.0);
  for (std::size_t f = 0; f < dual.faces.size(); ++f) {
    out[dual.faces[f].i] += std::max(u.interior[f], 0.0);
    out[dual.faces[f].j] += std::max(-u.interior[f], 0.0);
  }
  for (std::size_t b = 0; b < dual.boundary_faces.size(); ++b) {
    out[dual.boundary_faces[b].cell] += std::max(u.boundary[b], 0.0);
  }
  return out;
}

}  // namespace

double fv_max_timestep(const Field& v, const DualGrid& dual, const Vector& volumes, double cfl_limit) {
  const std::vector<double> out = cell_outflow(dual_face_velocities(v, dual), dual);
  double tau = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dual.num_cells(); ++i) {
    if (out[i] > 0.0) tau = std::min(tau, cfl_limit * volumes[i] / out[i]);
  }
  return tau;
}

FvField fv_transport_step(const FvField& phi, const Field& v, double tau, const Mesh& mesh, const DualGrid& dual,
                          const Vector& volumes, const TransportOptions& opt) {
  if (!(tau > 0.0)) throw ParameterError("transport step requires tau > 0");
  if (opt.order != 1 && opt.order != 2) throw ParameterError("transport order must be 1 or 2");
  const int n = dual.num_cells();
  if (phi.values.size() != n || volumes.size() != n) throw ParameterError("transport data does not match the dual grid");
  const FaceVelocities u = dual_face_velocities(v, dual);
  const std::vector<double> out = cell_outflow(u, dual);
  double cfl = 0.0;
  for (int i = 0; i < n; ++i) cfl = std::max(cfl, tau * out[i] / volumes[i]);
  if (cfl > opt.cfl_limit) {
    std::ostringstream msg;
    msg << "transport CFL number " << cfl << " exceeds " << opt.cfl_limit;
    throw CflViolation(msg.str(), cfl);
  }

  FaceTraces tr;
  if (opt.order == 2) tr = minmod_reconstruct(phi, mesh, dual);
  Vector balance = Vector::Zero(n);
  for (std::size_t f = 0; f < dual.faces.size(); ++f) {
    const int i = dual.faces[f].i;
    const int j = dual.faces[f].j;
    const double l = opt.order == 2 ? tr.left[f] : phi.values[i];
    const double r = opt.order == 2 ? tr.right[f] : phi.values[j];
    const double flux = eo_flux(u.interior[f], l, r, 1.0);
    balance[i] -= flux;
    balance[j] += flux;
  }
  for (std::size_t b = 0; b < dual.boundary_faces.size(); ++b) {
    const int i = dual.boundary_faces[b].cell;
    balance[i] -= u.boundary[b] * phi.values[i];
  }
  FvField next{phi.values};
  for (int i = 0; i < n; ++i) next.values[i] += tau * balance[i] / volumes[i];
  return next;
}

Vector fe_convection_vector(const Field& phi, const Field& v) {
  return assemble_convection_matrix(phi.fe(), v) * phi.values;
}

SparseMatrix assemble_convection_matrix(const FeSpace& p1, const Field& v) {
  if (p1.is_vector() || p1.order() != 1) throw ParameterError("convection matrix needs a scalar P1 space");
  if (!v.fe().is_vector() || &v.mesh() != &p1.mesh()) throw ParameterError("velocity must be a vector field on the same mesh");
  const Mesh& mesh = p1.mesh();
  const Quadrature& q = Quadrature::triangle(v.fe().order() + 1);
  const int n = p1.num_dofs();
  return assemble_matrix(n, n, mesh.num_triangles(), [&](int t, std::vector<Triplet>& out) {
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& vt = mesh.triangle(t).v;
    double c[3][3] = {};
    for (int k = 0; k < q.size(); ++k) {
      const Vec2 vel = v.vector_value(t, q.points[k]);
      const double w = 2.0 * g.area * q.weights[k];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) c[a][b] += w * vel.dot(g.grad[b]) * q.points[k][a];
      }
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) out.emplace_back(vt[a], vt[b], c[a][b]);
    }
  });
}

ChOperators::ChOperators(SpacePtr p1) : space(std::move(p1)) {
  mass = assemble_mass(*space);
  stiffness = assemble_stiffness(*space, 1.0);
  lumped = p1_hat_integrals(space->mesh());
}

namespace {

struct Residual {
  Vector r;
  double norm = 0.0;
};

}  // namespace

ChResult ch_diffusive_solve(const ChOperators& ops, const Field& phi_half, const Field& phi_old, double tau,
                            double mobility, const DoubleWell& dw, const ChOptions& opt, const Field* v,
                            const Field* mu_guess) {
  if (!(tau > 0.0)) throw ParameterError("Cahn-Hilliard step requires tau > 0");
  if (mobility < 0.0) throw ParameterError("mobility must be nonnegative");
  if (!(dw.delta > 0.0)) throw ParameterError("delta must be > 0");
  const int n = ops.space->num_dofs();
  if (phi_half.size() != n || phi_old.size() != n) throw ParameterError("Cahn-Hilliard fields do not match the space");

  const double sd = dw.sigma * dw.delta;
  const double sod = dw.sigma / dw.delta;
  SparseMatrix transport;
  if (v) transport = assemble_convection_matrix(*ops.space, *v);

  Vector explicit_part(n);
  for (int i = 0; i < n; ++i) explicit_part[i] = -phi_old.values[i];  // F-'(phi_old)

  Vector phi = phi_half.values;
  Vector mu = mu_guess ? mu_guess->values : Vector::Zero(n);
  const double scale = ops.lumped.maxCoeff() * std::max(1.0, phi_half.values.lpNorm<Eigen::Infinity>());

  auto residual = [&](const Vector& ph, const Vector& m) {
    Residual res;
    res.r.resize(2 * n);
    Vector rp = ops.mass * (ph - phi_half.values) + (tau * mobility) * (ops.stiffness * m);
    if (v) rp += tau * (transport * ph);
    Vector pot(n);
    for (int i = 0; i < n; ++i) pot[i] = ops.lumped[i] * (ph[i] * ph[i] * ph[i] + explicit_part[i]);
    Vector rm = ops.mass * m - sd * (ops.stiffness * ph) - sod * pot;
    res.r << rp, rm;
    res.norm = res.r.lpNorm<Eigen::Infinity>();
    return res;
  };

  ChResult out;
  out.report.mass_before = ops.lumped.dot(phi_half.values);

  if (mobility == 0.0 && !v) {
    // No diffusion: phi stays put and mu follows from the linear second equation.
    Vector pot(n);
    for (int i = 0; i < n; ++i) pot[i] = ops.lumped[i] * (phi[i] * phi[i] * phi[i] + explicit_part[i]);
    const Vector rhs = sd * (ops.stiffness * phi) + sod * pot;
    try {
      mu = bicgstab(ops.mass, rhs, opt.linear_tol, opt.linear_maxit).x;
    } catch (const IterativeFailure&) {
      mu = direct_solve(ops.mass, rhs);
    }
    out.report.residual = residual(phi, mu).norm;
  } else {
    Residual res = residual(phi, mu);
    int it = 0;
    while (res.norm > opt.newton_tol * scale) {
      if (it == opt.newton_maxit) {
        std::ostringstream msg;
        msg << "Cahn-Hilliard Newton iteration did not converge (residual " << res.norm << ")";
        throw NewtonDivergence(msg.str(), res.norm);
      }
      ++it;
      std::vector<Triplet> trip;
      trip.reserve(4 * ops.mass.nonZeros() + (v ? transport.nonZeros() : 0) + n);
      for (int r = 0; r < n; ++r) {
        for (SparseMatrix::InnerIterator e(ops.mass, r); e; ++e) {
          trip.emplace_back(r, e.col(), e.value());
          trip.emplace_back(n + r, n + e.col(), e.value());
        }
        for (SparseMatrix::InnerIterator e(ops.stiffness, r); e; ++e) {
          if (mobility != 0.0) trip.emplace_back(r, n + e.col(), tau * mobility * e.value());
          trip.emplace_back(n + r, e.col(), -sd * e.value());
        }
        if (v) {
          for (SparseMatrix::InnerIterator e(transport, r); e; ++e) trip.emplace_back(r, e.col(), tau * e.value());
        }
        trip.emplace_back(n + r, r, -sod * ops.lumped[r] * double_well_plus_second(phi[r]));
      }
      SparseMatrix jac(2 * n, 2 * n);
      jac.setFromTriplets(trip.begin(), trip.end());
      Vector step;
      try {
        step = bicgstab(jac, -res.r, opt.linear_tol, opt.linear_maxit).x;
      } catch (const IterativeFailure&) {
        step = direct_solve(jac, -res.r);
      }
      double lambda = 1.0;
      Residual trial;
      Vector phi_t, mu_t;
      for (int damp = 0; damp <= 10; ++damp) {
        phi_t = phi + lambda * step.head(n);
        mu_t = mu + lambda * step.tail(n);
        trial = residual(phi_t, mu_t);
        if (trial.norm < res.norm) break;
        lambda *= 0.5;
      }
      if (!(trial.norm < res.norm)) {
        // No damping factor reduced the residual; take the full step.
        phi_t = phi + step.head(n);
        mu_t = mu + step.tail(n);
        trial = residual(phi_t, mu_t);
      }
      phi = std::move(phi_t);
      mu = std::move(mu_t);
      res = std::move(trial);
    }
    out.report.newton_iterations = it;
    out.report.residual = res.norm;
  }
  out.phi = Field(ops.space, phi);
  out.mu = Field(ops.space, mu);
  out.report.mass_after = ops.lumped.dot(phi);
  out.report.min_phi = phi.minCoeff();
  out.report.max_phi = phi.maxCoeff();
  return out;
}

ChResult ch_diffusive_solve(const Field& phi_half, const Field& phi_old, double tau, double mobility,
                            const DoubleWell& dw, const ChOptions& opt) {
  const ChOperators ops(phi_half.space);
  return ch_diffusive_solve(ops, phi_half, phi_old, tau, mobility, dw, opt);
}

Field chemical_potential(const ChOperators& ops, const Field& phi, const DoubleWell& dw) {
  Vector rhs = (dw.sigma * dw.delta) * (ops.stiffness * phi.values);
  for (int i = 0; i < phi.size(); ++i) {
    const double p = phi.values[i];
    rhs[i] += dw.sigma / dw.delta * ops.lumped[i] * (p * p * p - p);
  }
  return Field(ops.space, direct_solve(ops.mass, rhs));
}

double interfacial_energy(const ChOperators& ops, const Field& phi, const DoubleWell& dw) {
  double pot = 0.0;
  for (int i = 0; i < phi.size(); ++i) pot += ops.lumped[i] * double_well(phi.values[i]);
  return dw.sigma * (0.5 * dw.delta * phi.values.dot(ops.stiffness * phi.values) + pot / dw.delta);
}

}  // namespace phaseflow
