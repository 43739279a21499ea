#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace phaseflow {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// y = A x
using LinearOperator = std::function<void(const Vector& x, Vector& y)>;

// Solves A x = b with a sparse LU factorization. Throws SolverError on structural or
// numerical singularity, or if ||Ax - b||_inf > 1e-10 (||A||_inf ||x||_inf + ||b||_inf).
Vector direct_solve(const SparseMatrix& a, const Vector& b);

// Reusable LU factorization.
class DirectSolver {
 public:
  explicit DirectSolver(const SparseMatrix& a);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  Vector solve(const Vector& b) const;
  int size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

struct KrylovResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;  // ||b - A x|| / ||b||
};

// Right-preconditioned BiCGstab. Returns once ||b - A x|| <= tol ||b||; throws
// IterativeFailure on breakdown or when max_iterations is reached.
KrylovResult bicgstab(const LinearOperator& a, const Vector& b, double tol, int max_iterations,
                      const LinearOperator& preconditioner = {}, const Vector* x0 = nullptr);

// Matrix version with Jacobi (diagonal) preconditioning.
KrylovResult bicgstab(const SparseMatrix& a, const Vector& b, double tol, int max_iterations,
                      const Vector* x0 = nullptr);

// Velocity-pressure system
//   G v + B^T p     = f
//   B v     - C p   = g,   with the pressure mean (weights m) fixed to zero.
// Velocity dofs flagged in `constrained` are held at zero.
struct SaddleSystem {
  SparseMatrix G;
  SparseMatrix B;
  SparseMatrix C;  // may be empty (0 x 0)
  Vector f;
  Vector g;  // may be empty (treated as zero)
  Vector mean_weights;
  std::vector<char> constrained;
};

enum class SaddleMethod { Monolithic, Schur };

struct SaddleSolution {
  Vector v;
  Vector p;
  double momentum_residual = 0.0;    // ||G v + B^T p - f||_inf on free dofs
  double divergence_residual = 0.0;  // ||B v - C p - g||_inf
};

// Monolithic: sparse LU of the bordered indefinite matrix. Schur: factor G, solve the
// pressure Schur complement with BiCGstab. Throws SolverError if either residual check
// (relative tol for momentum, absolute tol for divergence) fails.
SaddleSolution solve_saddle(const SaddleSystem& sys, double tol,
                            SaddleMethod method = SaddleMethod::Monolithic);

double max_abs(const SparseMatrix& a);
double inf_norm(const SparseMatrix& a);  // maximum absolute row sum

}  // namespace phaseflow
