#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "phaseflow/geometry.hpp"
#include "phaseflow/linalg.hpp"
#include "phaseflow/mesh.hpp"

namespace phaseflow {

enum class SpaceKind {
  P1Scalar,    // continuous piecewise linears
  P1ZeroMean,  // P1 with the mean fixed at solve time (pressure)
  P2Vector,    // quadratic velocity, boundary constraint per VelocityBc
  P1Vector,    // linear velocity for the stabilized equal-order pair
};

enum class VelocityBc { NoSlip, FreeSlip };

using Lambda = std::array<double, 3>;  // barycentric coordinates

struct ElementGeometry {
  std::array<Vec2, 3> x;
  double area = 0.0;
  std::array<Vec2, 3> grad;  // gradients of the barycentric coordinates

  Vec2 point(const Lambda& l) const { return l[0] * x[0] + l[1] * x[1] + l[2] * x[2]; }
};

ElementGeometry element_geometry(const Mesh& mesh, int t);

// Local Lagrange basis. Order 2 local nodes: vertices 0..2, then edge midpoints 3..5 with
// node 3 + k on the edge opposite vertex k.
int local_basis_size(int order);
void basis_values(int order, const Lambda& l, double* out);
void basis_gradients(int order, const Lambda& l, const ElementGeometry& g, Vec2* out);

class FeSpace {
 public:
  FeSpace(MeshPtr mesh, SpaceKind kind, VelocityBc bc = VelocityBc::NoSlip);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  SpaceKind kind() const { return kind_; }
  VelocityBc bc() const { return bc_; }
  int order() const { return kind_ == SpaceKind::P2Vector ? 2 : 1; }
  int components() const { return is_vector() ? 2 : 1; }
  bool is_vector() const { return kind_ == SpaceKind::P2Vector || kind_ == SpaceKind::P1Vector; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_dofs() const { return num_nodes() * components(); }
  int nodes_per_element() const { return local_basis_size(order()); }
  int element_node(int t, int k) const;
  const Vec2& node(int n) const { return nodes_[n]; }
  bool is_boundary_node(int n) const { return boundary_node_[n]; }

  // Vector dofs are interleaved: dof = components() * node + component.
  int dof(int node, int component) const { return components() * node + component; }
  bool is_constrained(int d) const { return constrained_[d]; }
  const std::vector<char>& constrained() const { return constrained_; }

 private:
  MeshPtr mesh_;
  SpaceKind kind_;
  VelocityBc bc_;
  std::vector<Vec2> nodes_;
  std::vector<char> boundary_node_;
  std::vector<char> constrained_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

SpacePtr make_space(MeshPtr mesh, SpaceKind kind, VelocityBc bc = VelocityBc::NoSlip);

// Coefficient vector over a space.
struct Field {
  SpacePtr space;
  Vector values;

  Field() = default;
  explicit Field(SpacePtr s);
  Field(SpacePtr s, Vector v);

  const FeSpace& fe() const { return *space; }
  const Mesh& mesh() const { return space->mesh(); }
  int size() const { return static_cast<int>(values.size()); }

  double value(int t, const Lambda& l, int component = 0) const;
  Vec2 vector_value(int t, const Lambda& l) const;
  Vec2 gradient(int t, const Lambda& l, int component = 0) const;
};

// Uniform bucket grid over the mesh domain for point location.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  // Returns the containing triangle (or -1) and the barycentric coordinates of p.
  int locate(const Vec2& p, Lambda& l) const;

 private:
  const Mesh* mesh_;
  int nx_ = 1, ny_ = 1;
  double dx_ = 1.0, dy_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

Lambda barycentric(const ElementGeometry& g, const Vec2& p);

// Nodal interpolation onto `target`.
Field interpolate_nodal(const std::function<double(const Vec2&)>& f, SpacePtr target);
Field interpolate_nodal_vector(const std::function<Vec2(const Vec2&)>& f, SpacePtr target);
// Evaluates a field (possibly on another mesh of the same domain) at the nodes of `target`.
Field interpolate_nodal(const Field& f, SpacePtr target);

// Lumped mass with weight: diagonal entry of node n is the integral of weight * hat_n, with
// hat functions of the space's own nodal mesh (red-refined mesh for P2). weight is P1.
Vector lumped_mass_diagonal(const FeSpace& space, const Field& weight);
SparseMatrix assemble_lumped_mass(const FeSpace& space, const Field& weight);

// Scalar P1 matrices.
SparseMatrix assemble_mass(const FeSpace& space);
SparseMatrix assemble_stiffness(const FeSpace& space, double coeff);
SparseMatrix assemble_stiffness(const FeSpace& space, const Field& coeff);

// Integrals of the P1 hat functions (row sums of the consistent mass matrix).
Vector p1_hat_integrals(const Mesh& mesh);

double integrate(const Field& f);

// ||f - g||_L2 evaluated on g's mesh; f's mesh must be nested in g's (same or coarser).
double l2_distance(const Field& f, const Field& g);

// |grad f| per element (P2: at the barycenter).
std::vector<double> element_gradient_magnitudes(const Field& f, int component = 0);

}  // namespace phaseflow
