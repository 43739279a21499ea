#pragma once

#include <array>
#include <vector>

namespace phaseflow {

// Quadrature rule on the reference triangle {(x, y) : x, y >= 0, x + y <= 1}.
// Points are stored as barycentric triples; weights sum to the reference area 1/2.
struct Quadrature {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  int size() const { return static_cast<int>(weights.size()); }

  // Collapsed Gauss-Legendre rule exact for polynomials of total degree <= degree.
  // Rules are cached; the returned reference stays valid for the program lifetime.
  static const Quadrature& triangle(int degree);
};

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace phaseflow
