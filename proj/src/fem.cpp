#include "phaseflow/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phaseflow/error.hpp"
#include "phaseflow/parallel.hpp"
#include "phaseflow/quadrature.hpp"

namespace phaseflow {

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  ElementGeometry g;
  const auto& v = mesh.triangle(t).v;
  for (int k = 0; k < 3; ++k) g.x[k] = mesh.vertex(v[k]);
  g.area = signed_area(g.x[0], g.x[1], g.x[2]);
  const double inv = 1.0 / (2.0 * g.area);
  for (int k = 0; k < 3; ++k) {
    const Vec2& a = g.x[(k + 1) % 3];
    const Vec2& b = g.x[(k + 2) % 3];
    g.grad[k] = Vec2(a.y() - b.y(), b.x() - a.x()) * inv;
  }
  return g;
}

int local_basis_size(int order) { return order == 2 ? 6 : 3; }

void basis_values(int order, const Lambda& l, double* out) {
  if (order == 1) {
    out[0] = l[0];
    out[1] = l[1];
    out[2] = l[2];
    return;
  }
  for (int k = 0; k < 3; ++k) {
    out[k] = l[k] * (2.0 * l[k] - 1.0);
    out[3 + k] = 4.0 * l[(k + 1) % 3] * l[(k + 2) % 3];
  }
}

void basis_gradients(int order, const Lambda& l, const ElementGeometry& g, Vec2* out) {
  if (order == 1) {
    out[0] = g.grad[0];
    out[1] = g.grad[1];
    out[2] = g.grad[2];
    return;
  }
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3;
    const int b = (k + 2) % 3;
    out[k] = (4.0 * l[k] - 1.0) * g.grad[k];
    out[3 + k] = 4.0 * (l[a] * g.grad[b] + l[b] * g.grad[a]);
  }
}

FeSpace::FeSpace(MeshPtr mesh, SpaceKind kind, VelocityBc bc) : mesh_(std::move(mesh)), kind_(kind), bc_(bc) {
  const Mesh& m = *mesh_;
  nodes_ = m.vertices();
  boundary_node_.assign(m.num_vertices(), 0);
  for (int i = 0; i < m.num_vertices(); ++i) boundary_node_[i] = m.is_boundary_vertex(i);
  if (order() == 2) {
    for (int e = 0; e < m.num_edges(); ++e) {
      const Edge& ed = m.edge(e);
      nodes_.push_back(midpoint(m.vertex(ed.v[0]), m.vertex(ed.v[1])));
      boundary_node_.push_back(ed.on_boundary());
    }
  }
  constrained_.assign(num_dofs(), 0);
  if (!is_vector()) return;
  for (int n = 0; n < num_nodes(); ++n) {
    if (!boundary_node_[n]) continue;
    if (bc_ == VelocityBc::NoSlip) {
      constrained_[dof(n, 0)] = constrained_[dof(n, 1)] = 1;
      continue;
    }
    const unsigned sides = m.boundary_sides(nodes_[n]);
    const auto bit = [](Side s) { return 1u << static_cast<unsigned>(s); };
    if (sides & (bit(Side::Left) | bit(Side::Right))) constrained_[dof(n, 0)] = 1;
    if (sides & (bit(Side::Bottom) | bit(Side::Top))) constrained_[dof(n, 1)] = 1;
  }
}

int FeSpace::element_node(int t, int k) const {
  if (k < 3) return mesh_->triangle(t).v[k];
  return mesh_->num_vertices() + mesh_->triangle_edge(t, k - 3);
}

SpacePtr make_space(MeshPtr mesh, SpaceKind kind, VelocityBc bc) {
  return std::make_shared<const FeSpace>(std::move(mesh), kind, bc);
}

Field::Field(SpacePtr s) : space(std::move(s)) { values = Vector::Zero(space->num_dofs()); }

Field::Field(SpacePtr s, Vector v) : space(std::move(s)), values(std::move(v)) {
  if (values.size() != space->num_dofs()) throw ParameterError("field length does not match the space");
}

double Field::value(int t, const Lambda& l, int component) const {
  const FeSpace& s = *space;
  double phi[6];
  basis_values(s.order(), l, phi);
  double out = 0.0;
  for (int k = 0; k < s.nodes_per_element(); ++k) out += phi[k] * values[s.dof(s.element_node(t, k), component)];
  return out;
}

Vec2 Field::vector_value(int t, const Lambda& l) const { return Vec2(value(t, l, 0), value(t, l, 1)); }

Vec2 Field::gradient(int t, const Lambda& l, int component) const {
  const FeSpace& s = *space;
  const ElementGeometry g = element_geometry(s.mesh(), t);
  Vec2 grad[6];
  basis_gradients(s.order(), l, g, grad);
  Vec2 out = Vec2::Zero();
  for (int k = 0; k < s.nodes_per_element(); ++k) out += values[s.dof(s.element_node(t, k), component)] * grad[k];
  return out;
}

Lambda barycentric(const ElementGeometry& g, const Vec2& p) {
  const double a0 = signed_area(p, g.x[1], g.x[2]) / g.area;
  const double a1 = signed_area(g.x[0], p, g.x[2]) / g.area;
  return {a0, a1, 1.0 - a0 - a1};
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  const Rect& d = mesh.domain();
  const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
  const double aspect = d.height() / d.width();
  nx_ = n;
  ny_ = std::max(1, static_cast<int>(std::lround(n * aspect)));
  dx_ = d.width() / nx_;
  dy_ = d.height() / ny_;
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double xmin = std::numeric_limits<double>::max(), ymin = xmin, xmax = -xmin, ymax = -xmin;
    for (int v : mesh.triangle(t).v) {
      const Vec2& p = mesh.vertex(v);
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
    const double eps = 1e-9 * std::max(dx_, dy_);
    const int i0 = std::clamp(static_cast<int>(std::floor((xmin - eps - d.x0) / dx_)), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((xmax + eps - d.x0) / dx_)), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((ymin - eps - d.y0) / dy_)), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((ymax + eps - d.y0) / dy_)), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
    }
  }
}

int PointLocator::locate(const Vec2& p, Lambda& l) const {
  const Rect& d = mesh_->domain();
  const int i = std::clamp(static_cast<int>(std::floor((p.x() - d.x0) / dx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y() - d.y0) / dy_)), 0, ny_ - 1);
  int best = -1;
  double best_min = -1e-8;
  for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    const Lambda lt = barycentric(element_geometry(*mesh_, t), p);
    const double mn = std::min({lt[0], lt[1], lt[2]});
    if (mn > best_min) {
      best_min = mn;
      best = t;
      l = lt;
      if (mn >= 0.0) break;
    }
  }
  return best;
}

namespace {

Lambda local_node_lambda(int k) {
  if (k < 3) {
    Lambda l{0.0, 0.0, 0.0};
    l[k] = 1.0;
    return l;
  }
  Lambda l{0.5, 0.5, 0.5};
  l[k - 3] = 0.0;
  return l;
}

void check_same_domain(const Mesh& a, const Mesh& b) {
  const Rect& r = a.domain();
  const Rect& s = b.domain();
  const double tol = 1e-12 * std::max(r.width(), r.height());
  if (std::abs(r.x0 - s.x0) > tol || std::abs(r.x1 - s.x1) > tol || std::abs(r.y0 - s.y0) > tol ||
      std::abs(r.y1 - s.y1) > tol) {
    throw GeometryError("fields live on different domains");
  }
}

}  // namespace

Field interpolate_nodal(const std::function<double(const Vec2&)>& f, SpacePtr target) {
  if (target->is_vector()) throw ParameterError("scalar interpolation onto a vector space");
  Field out(target);
  for (int n = 0; n < target->num_nodes(); ++n) out.values[n] = f(target->node(n));
  return out;
}

Field interpolate_nodal_vector(const std::function<Vec2(const Vec2&)>& f, SpacePtr target) {
  if (!target->is_vector()) throw ParameterError("vector interpolation onto a scalar space");
  Field out(target);
  for (int n = 0; n < target->num_nodes(); ++n) {
    const Vec2 v = f(target->node(n));
    out.values[target->dof(n, 0)] = v.x();
    out.values[target->dof(n, 1)] = v.y();
  }
  return out;
}

Field interpolate_nodal(const Field& f, SpacePtr target) {
  const FeSpace& src = f.fe();
  if (src.components() != target->components()) throw ParameterError("interpolation between scalar and vector spaces");
  const int nc = target->components();
  Field out(target);
  if (&src.mesh() == &target->mesh()) {
    std::vector<char> done(target->num_nodes(), 0);
    for (int t = 0; t < target->mesh().num_triangles(); ++t) {
      for (int k = 0; k < target->nodes_per_element(); ++k) {
        const int n = target->element_node(t, k);
        if (done[n]) continue;
        done[n] = 1;
        for (int c = 0; c < nc; ++c) out.values[target->dof(n, c)] = f.value(t, local_node_lambda(k), c);
      }
    }
    return out;
  }
  check_same_domain(src.mesh(), target->mesh());
  const PointLocator locator(src.mesh());
  for (int n = 0; n < target->num_nodes(); ++n) {
    Lambda l;
    const int t = locator.locate(target->node(n), l);
    if (t < 0) throw GeometryError("interpolation node lies outside the source mesh");
    for (int c = 0; c < nc; ++c) out.values[target->dof(n, c)] = f.value(t, l, c);
  }
  return out;
}

Vector lumped_mass_diagonal(const FeSpace& space, const Field& weight) {
  const Mesh& mesh = space.mesh();
  if (weight.fe().order() != 1 || weight.fe().is_vector() || &weight.mesh() != &mesh) {
    throw ParameterError("lumped mass weight must be a scalar P1 field on the same mesh");
  }
  Vector node_mass = Vector::Zero(space.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.area(t);
    const auto& v = mesh.triangle(t).v;
    const double r[3] = {weight.values[v[0]], weight.values[v[1]], weight.values[v[2]]};
    if (space.order() == 1) {
      const double s = area / 12.0;
      for (int k = 0; k < 3; ++k) node_mass[v[k]] += s * (2.0 * r[k] + r[(k + 1) % 3] + r[(k + 2) % 3]);
      continue;
    }
    // Red refinement: corner sub-triangles (vertex k, two adjacent midpoints) plus the middle one.
    double rn[6];
    int nodes[6];
    for (int k = 0; k < 6; ++k) nodes[k] = space.element_node(t, k);
    for (int k = 0; k < 3; ++k) {
      rn[k] = r[k];
      rn[3 + k] = 0.5 * (r[(k + 1) % 3] + r[(k + 2) % 3]);
    }
    const int sub[4][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}, {3, 4, 5}};
    const double s = area / 48.0;
    for (const auto& tri : sub) {
      for (int k = 0; k < 3; ++k) {
        node_mass[nodes[tri[k]]] += s * (2.0 * rn[tri[k]] + rn[tri[(k + 1) % 3]] + rn[tri[(k + 2) % 3]]);
      }
    }
  }
  if (!space.is_vector()) return node_mass;
  Vector out(space.num_dofs());
  for (int n = 0; n < space.num_nodes(); ++n) out[space.dof(n, 0)] = out[space.dof(n, 1)] = node_mass[n];
  return out;
}

SparseMatrix assemble_lumped_mass(const FeSpace& space, const Field& weight) {
  const Vector d = lumped_mass_diagonal(space, weight);
  SparseMatrix m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Ones(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

namespace {

void require_scalar_p1(const FeSpace& space) {
  if (space.is_vector() || space.order() != 1) throw ParameterError("operation requires a scalar P1 space");
}

SparseMatrix stiffness_impl(const FeSpace& space, const std::function<double(int)>& elem_coeff) {
  const Mesh& mesh = space.mesh();
  const int n = space.num_dofs();
  return assemble_matrix(n, n, mesh.num_triangles(), [&](int t, std::vector<Triplet>& out) {
    const ElementGeometry g = element_geometry(mesh, t);
    const double c = elem_coeff(t) * g.area;
    const auto& v = mesh.triangle(t).v;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) out.emplace_back(v[a], v[b], c * g.grad[a].dot(g.grad[b]));
    }
  });
}

}  // namespace

SparseMatrix assemble_mass(const FeSpace& space) {
  require_scalar_p1(space);
  const Mesh& mesh = space.mesh();
  const int n = space.num_dofs();
  return assemble_matrix(n, n, mesh.num_triangles(), [&](int t, std::vector<Triplet>& out) {
    const double area = mesh.area(t);
    const auto& v = mesh.triangle(t).v;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) out.emplace_back(v[a], v[b], area * (a == b ? 2.0 : 1.0) / 12.0);
    }
  });
}

SparseMatrix assemble_stiffness(const FeSpace& space, double coeff) {
  require_scalar_p1(space);
  if (coeff < 0.0) throw ParameterError("stiffness coefficient must be nonnegative");
  return stiffness_impl(space, [coeff](int) { return coeff; });
}

SparseMatrix assemble_stiffness(const FeSpace& space, const Field& coeff) {
  require_scalar_p1(space);
  if (coeff.fe().is_vector() || coeff.fe().order() != 1 || &coeff.mesh() != &space.mesh()) {
    throw ParameterError("stiffness coefficient must be a scalar P1 field on the same mesh");
  }
  if (coeff.values.size() > 0 && coeff.values.minCoeff() < 0.0) {
    throw ParameterError("stiffness coefficient must be nonnegative");
  }
  const Mesh& mesh = space.mesh();
  return stiffness_impl(space, [&](int t) {
    const auto& v = mesh.triangle(t).v;
    return (coeff.values[v[0]] + coeff.values[v[1]] + coeff.values[v[2]]) / 3.0;
  });
}

Vector p1_hat_integrals(const Mesh& mesh) {
  Vector m = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.area(t) / 3.0;
    for (int v : mesh.triangle(t).v) m[v] += a;
  }
  return m;
}

double integrate(const Field& f) {
  if (f.fe().is_vector()) throw ParameterError("integrate expects a scalar field");
  const Mesh& mesh = f.mesh();
  const Quadrature& q = Quadrature::triangle(2 * f.fe().order());
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double st = 0.0;
    for (int i = 0; i < q.size(); ++i) st += q.weights[i] * f.value(t, q.points[i]);
    s += 2.0 * mesh.area(t) * st;
  }
  return s;
}

double l2_distance(const Field& f, const Field& g) {
  if (f.fe().components() != g.fe().components()) throw ParameterError("l2_distance: component mismatch");
  const Mesh& fine = g.mesh();
  const Mesh& coarse = f.mesh();
  check_same_domain(coarse, fine);
  const bool same = &fine == &coarse;
  const int nc = g.fe().components();
  const Quadrature& q = Quadrature::triangle(2 * std::max(f.fe().order(), g.fe().order()));
  std::unique_ptr<PointLocator> locator;
  if (!same) locator = std::make_unique<PointLocator>(coarse);
  double s = 0.0;
  for (int t = 0; t < fine.num_triangles(); ++t) {
    const ElementGeometry gf = element_geometry(fine, t);
    int tc = t;
    ElementGeometry gc = gf;
    if (!same) {
      Lambda l;
      const Vec2 center = (gf.x[0] + gf.x[1] + gf.x[2]) / 3.0;
      tc = locator->locate(center, l);
      if (tc < 0) throw GeometryError("l2_distance: meshes are not nested");
      gc = element_geometry(coarse, tc);
      const double tol = 1e-9;
      for (int k = 0; k < 3; ++k) {
        const Lambda lv = barycentric(gc, gf.x[k]);
        if (std::min({lv[0], lv[1], lv[2]}) < -tol) throw GeometryError("l2_distance: meshes are not nested");
      }
    }
    double st = 0.0;
    for (int i = 0; i < q.size(); ++i) {
      const Lambda lc = same ? q.points[i] : barycentric(gc, gf.point(q.points[i]));
      for (int c = 0; c < nc; ++c) {
        const double d = f.value(tc, lc, c) - g.value(t, q.points[i], c);
        st += q.weights[i] * d * d;
      }
    }
    s += 2.0 * gf.area * st;
  }
  return std::sqrt(s);
}

std::vector<double> element_gradient_magnitudes(const Field& f, int component) {
  const Mesh& mesh = f.mesh();
  std::vector<double> out(mesh.num_triangles());
  const Lambda center{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  for (int t = 0; t < mesh.num_triangles(); ++t) out[t] = f.gradient(t, center, component).norm();
  return out;
}

}  // namespace phaseflow
