#include "phaseflow/linalg.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "phaseflow/error.hpp"

namespace phaseflow {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Lu = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;

double inf_norm_vec(const Vector& x) { return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>(); }

}  // namespace

double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

double inf_norm(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) s += std::abs(it.value());
    m = std::max(m, s);
  }
  return m;
}

struct DirectSolver::Impl {
  Lu lu;
};

DirectSolver::DirectSolver(const SparseMatrix& a) : impl_(std::make_unique<Impl>()), n_(static_cast<int>(a.rows())) {
  if (a.rows() != a.cols()) throw SolverError("direct solve: matrix is not square");
  ColMatrix c = a;
  c.makeCompressed();
  impl_->lu.analyzePattern(c);
  impl_->lu.factorize(c);
  if (impl_->lu.info() != Eigen::Success) {
    throw SolverError("direct solve: factorization failed: " + impl_->lu.lastErrorMessage());
  }
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

Vector DirectSolver::solve(const Vector& b) const {
  if (b.size() != n_) throw SolverError("direct solve: right-hand side has wrong length");
  Vector x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite()) {
    throw SolverError("direct solve: back substitution failed");
  }
  return x;
}

Vector direct_solve(const SparseMatrix& a, const Vector& b) {
  DirectSolver solver(a);
  Vector x = solver.solve(b);
  const double res = inf_norm_vec(a * x - b);
  const double bound = 1e-10 * (inf_norm(a) * inf_norm_vec(x) + inf_norm_vec(b));
  if (res > bound) {
    std::ostringstream msg;
    msg << "direct solve: matrix is numerically singular (residual " << res << ")";
    throw SolverError(msg.str(), res);
  }
  return x;
}

KrylovResult bicgstab(const LinearOperator& a, const Vector& b, double tol, int max_iterations,
                      const LinearOperator& preconditioner, const Vector* x0) {
  if (!(tol > 0.0)) throw ParameterError("bicgstab: tolerance must be > 0");
  const Eigen::Index n = b.size();
  KrylovResult out;
  out.x = x0 ? *x0 : Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x.setZero();
    return out;
  }
  auto apply_m = [&](const Vector& in, Vector& res) {
    if (preconditioner) {
      preconditioner(in, res);
    } else {
      res = in;
    }
  };

  Vector r(n), tmp(n);
  a(out.x, tmp);
  r = b - tmp;
  out.residual = r.norm() / bnorm;
  if (out.residual <= tol) return out;

  Vector rhat = r;
  Vector p = Vector::Zero(n), v = Vector::Zero(n), y(n), s(n), z(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  const double tiny = 1e-300;

  for (int it = 1; it <= max_iterations; ++it) {
    const double rho_new = rhat.dot(r);
    if (std::abs(rho_new) < tiny) throw IterativeFailure("bicgstab: breakdown (rho = 0)", out.residual, it);
    const double beta = (rho_new / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    apply_m(p, y);
    a(y, v);
    const double rv = rhat.dot(v);
    if (std::abs(rv) < tiny) throw IterativeFailure("bicgstab: breakdown (<r0, v> = 0)", out.residual, it);
    alpha = rho_new / rv;
    s = r - alpha * v;
    out.iterations = it;
    if (s.norm() <= tol * bnorm) {
      out.x += alpha * y;
      a(out.x, tmp);
      out.residual = (b - tmp).norm() / bnorm;
      if (out.residual <= tol) return out;
      r = b - tmp;
      rhat = r;
      p.setZero();
      v.setZero();
      rho = alpha = omega = 1.0;
      continue;
    }
    apply_m(s, z);
    a(z, t);
    const double tt = t.squaredNorm();
    if (tt < tiny) throw IterativeFailure("bicgstab: breakdown (t = 0)", out.residual, it);
    omega = t.dot(s) / tt;
    out.x += alpha * y + omega * z;
    r = s - omega * t;
    out.residual = r.norm() / bnorm;
    if (out.residual <= tol) {
      a(out.x, tmp);
      out.residual = (b - tmp).norm() / bnorm;
      if (out.residual <= tol) return out;
      r = b - tmp;
      rhat = r;
      p.setZero();
      v.setZero();
      rho = alpha = omega = 1.0;
      continue;
    }
    if (std::abs(omega) < tiny) throw IterativeFailure("bicgstab: breakdown (omega = 0)", out.residual, it);
    rho = rho_new;
  }
  throw IterativeFailure("bicgstab: iteration limit reached", out.residual, max_iterations);
}

KrylovResult bicgstab(const SparseMatrix& a, const Vector& b, double tol, int max_iterations, const Vector* x0) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw ParameterError("bicgstab: dimension mismatch");
  Vector inv_diag = a.diagonal();
  for (Eigen::Index i = 0; i < inv_diag.size(); ++i) inv_diag[i] = inv_diag[i] != 0.0 ? 1.0 / inv_diag[i] : 1.0;
  LinearOperator op = [&a](const Vector& x, Vector& y) { y = a * x; };
  LinearOperator pre = [&inv_diag](const Vector& x, Vector& y) { y = inv_diag.cwiseProduct(x); };
  return bicgstab(op, b, tol, max_iterations, pre, x0);
}

namespace {

struct FreeMap {
  std::vector<int> to_free;  // -1 for constrained dofs
  std::vector<int> dofs;
};

FreeMap free_map(const SaddleSystem& sys) {
  const int n = static_cast<int>(sys.G.rows());
  FreeMap fm;
  fm.to_free.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const bool fixed = !sys.constrained.empty() && sys.constrained[i];
    if (!fixed) {
      fm.to_free[i] = static_cast<int>(fm.dofs.size());
      fm.dofs.push_back(i);
    }
  }
  return fm;
}

SparseMatrix restrict_velocity(const SparseMatrix& a, const FreeMap& fm, bool rows, bool cols) {
  std::vector<Triplet> trip;
  trip.reserve(a.nonZeros());
  for (int r = 0; r < a.outerSize(); ++r) {
    const int rr = rows ? fm.to_free[r] : r;
    if (rr < 0) continue;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      const int cc = cols ? fm.to_free[it.col()] : static_cast<int>(it.col());
      if (cc >= 0) trip.emplace_back(rr, cc, it.value());
    }
  }
  SparseMatrix out(rows ? static_cast<int>(fm.dofs.size()) : a.rows(), cols ? static_cast<int>(fm.dofs.size()) : a.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

SaddleSolution solve_saddle(const SaddleSystem& sys, double tol, SaddleMethod method) {
  const int nv = static_cast<int>(sys.G.rows());
  const int np = static_cast<int>(sys.B.rows());
  if (sys.G.cols() != nv || sys.B.cols() != nv || sys.f.size() != nv || sys.mean_weights.size() != np) {
    throw ParameterError("solve_saddle: block dimensions do not match");
  }
  const bool has_c = sys.C.rows() == np && sys.C.nonZeros() > 0;
  const Vector g = sys.g.size() == np ? sys.g : Vector::Zero(np);

  const FreeMap fm = free_map(sys);
  const int nf = static_cast<int>(fm.dofs.size());
  const SparseMatrix gf = restrict_velocity(sys.G, fm, true, true);
  const SparseMatrix bf = restrict_velocity(sys.B, fm, false, true);
  Vector ff(nf);
  for (int i = 0; i < nf; ++i) ff[i] = sys.f[fm.dofs[i]];
  const Vector& m = sys.mean_weights;

  Vector vf(nf), p(np);
  if (method == SaddleMethod::Monolithic) {
    const int n = nf + np + 1;
    std::vector<Triplet> trip;
    trip.reserve(gf.nonZeros() + 2 * bf.nonZeros() + sys.C.nonZeros() + 2 * np);
    for (int r = 0; r < nf; ++r) {
      for (SparseMatrix::InnerIterator it(gf, r); it; ++it) trip.emplace_back(r, it.col(), it.value());
    }
    for (int r = 0; r < np; ++r) {
      for (SparseMatrix::InnerIterator it(bf, r); it; ++it) {
        trip.emplace_back(nf + r, it.col(), it.value());
        trip.emplace_back(it.col(), nf + r, it.value());
      }
      trip.emplace_back(nf + r, n - 1, m[r]);
      trip.emplace_back(n - 1, nf + r, m[r]);
    }
    if (has_c) {
      for (int r = 0; r < np; ++r) {
        for (SparseMatrix::InnerIterator it(sys.C, r); it; ++it) trip.emplace_back(nf + r, nf + it.col(), -it.value());
      }
    }
    SparseMatrix k(n, n);
    k.setFromTriplets(trip.begin(), trip.end());
    Vector rhs = Vector::Zero(n);
    rhs.head(nf) = ff;
    rhs.segment(nf, np) = g;
    DirectSolver solver(k);
    Vector x = solver.solve(rhs);
    // A few steps of iterative refinement tighten the residual for badly scaled blocks.
    for (int it = 0; it < 3; ++it) {
      const Vector r = rhs - k * x;
      if (inf_norm_vec(r) <= 1e-15 * (inf_norm_vec(rhs) + 1e-300)) break;
      x += solver.solve(r);
    }
    vf = x.head(nf);
    p = x.segment(nf, np);
  } else {
    DirectSolver gsolve(gf);
    const SparseMatrix bft = bf.transpose();
    LinearOperator schur = [&](const Vector& q, Vector& y) {
      y = bf * gsolve.solve(bft * q);
      if (has_c) y += sys.C * q;
      y += m * m.dot(q);
    };
    Vector diag(np);
    {
      Vector gd = gf.diagonal();
      for (int i = 0; i < nf; ++i) gd[i] = gd[i] != 0.0 ? 1.0 / gd[i] : 1.0;
      for (int r = 0; r < np; ++r) {
        double s = m[r] * m[r];
        for (SparseMatrix::InnerIterator it(bf, r); it; ++it) s += it.value() * it.value() * gd[it.col()];
        if (has_c) s += sys.C.coeff(r, r);
        diag[r] = s > 0.0 ? 1.0 / s : 1.0;
      }
    }
    LinearOperator pre = [&diag](const Vector& q, Vector& y) { y = diag.cwiseProduct(q); };
    const Vector rhs = bf * gsolve.solve(ff) - g;
    p = bicgstab(schur, rhs, std::min(tol, 1e-10) * 1e-2, 5000, pre).x;
    vf = gsolve.solve(ff - bft * p);
  }

  const double msum = m.sum();
  if (msum != 0.0) p.array() -= m.dot(p) / msum;

  SaddleSolution out;
  out.v = Vector::Zero(nv);
  for (int i = 0; i < nf; ++i) out.v[fm.dofs[i]] = vf[i];
  out.p = p;
  const Vector rm = gf * vf + bf.transpose() * p - ff;
  Vector rc = bf * vf - g;
  if (has_c) rc -= sys.C * p;
  out.momentum_residual = inf_norm_vec(rm);
  out.divergence_residual = inf_norm_vec(rc);
  const double fnorm = inf_norm_vec(ff);
  const double scale = fnorm > 0.0 ? fnorm : 1.0;
  if (out.momentum_residual > tol * scale || out.divergence_residual > tol) {
    std::ostringstream msg;
    msg << "solve_saddle: residual check failed (momentum " << out.momentum_residual << ", divergence "
        << out.divergence_residual << ")";
    throw SolverError(msg.str(), std::max(out.momentum_residual, out.divergence_residual));
  }
  return out;
}

}  // namespace phaseflow
