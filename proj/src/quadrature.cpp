#include "phaseflow/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "phaseflow/error.hpp"

namespace phaseflow {

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map from [-1, 1] to [0, 1].
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

const Quadrature& Quadrature::triangle(int degree) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Quadrature>> cache;
  if (degree < 0) throw ParameterError("quadrature degree must be nonnegative");
  std::lock_guard lock(mutex);
  auto& slot = cache[degree];
  if (!slot) {
    auto q = std::make_unique<Quadrature>();
    q->degree = degree;
    const int n = (degree + 2) / 2 + ((degree + 2) % 2);
    std::vector<double> x, w;
    gauss_legendre_unit(std::max(n, 1), x, w);
    for (std::size_t a = 0; a < x.size(); ++a) {
      for (std::size_t b = 0; b < x.size(); ++b) {
        const double u = x[a];
        const double v = x[b] * (1.0 - u);
        q->points.push_back({1.0 - u - v, u, v});
        q->weights.push_back(w[a] * w[b] * (1.0 - u));
      }
    }
    slot = std::move(q);
  }
  return *slot;
}

}  // namespace phaseflow
