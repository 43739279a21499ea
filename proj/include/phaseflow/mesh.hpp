#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "phaseflow/geometry.hpp"

namespace phaseflow {

// A triangle stores its vertices counter-clockwise with the newest vertex last:
// (v[0], v[1]) is the refinement edge, v[2] the vertex opposite to it.
struct Triangle {
  std::array<int, 3> v{};
  int generation = 0;  // number of bisections since the structured base grid
};

// Which side of the rectangle a boundary edge lies on.
enum class Side : std::uint8_t { Bottom = 0, Right = 1, Top = 2, Left = 3 };

struct Edge {
  std::array<int, 2> v{};        // v[0] < v[1]
  std::array<int, 2> tri{-1, -1};  // adjacent triangles; tri[1] == -1 on the boundary
  bool on_boundary() const { return tri[1] < 0; }
};

struct BoundaryEdge {
  int edge = -1;
  Side side = Side::Bottom;
};

// Conforming triangulation of a rectangle. Immutable after construction; refinement
// operations return a new mesh.
class Mesh {
 public:
  Mesh(Rect domain, int base_level, std::vector<Vec2> vertices, std::vector<Triangle> triangles);

  const Rect& domain() const { return domain_; }
  int base_level() const { return base_level_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Vec2& vertex(int i) const { return vertices_[i]; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  // Local edge k of triangle t is opposite to local vertex k.
  int triangle_edge(int t, int k) const { return tri_edges_[t][k]; }
  int level(int t) const { return base_level_ + triangles_[t].generation; }

  double area(int t) const;
  double total_area() const;
  double min_edge_length() const { return min_edge_; }
  double max_edge_length() const { return max_edge_; }
  bool is_boundary_vertex(int i) const { return boundary_vertex_[i]; }

  // Sides of the rectangle the point lies on, as a bit set over Side.
  unsigned boundary_sides(const Vec2& p) const;

  // Triangles incident to each vertex.
  const std::vector<std::vector<int>>& vertex_triangles() const { return vertex_tris_; }

  // Throws GeometryError when any mesh invariant is violated (orientation, conformity,
  // non-obtuse angles).
  void check_invariants() const;

 private:
  void build_topology();

  Rect domain_;
  int base_level_ = 0;
  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::vector<int>> vertex_tris_;
  std::vector<bool> boundary_vertex_;
  double min_edge_ = 0.0;
  double max_edge_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

enum class Mark : std::uint8_t { Keep = 0, Refine = 1, Coarsen = 2 };

// Per-triangle refinement flags; refine takes precedence over coarsen when merged.
class RefineMarks {
 public:
  RefineMarks() = default;
  explicit RefineMarks(int num_triangles) : marks_(num_triangles, Mark::Keep) {}

  int size() const { return static_cast<int>(marks_.size()); }
  Mark operator[](int t) const { return marks_[t]; }
  void refine(int t) { marks_[t] = Mark::Refine; }
  void coarsen(int t) {
    if (marks_[t] != Mark::Refine) marks_[t] = Mark::Coarsen;
  }
  void keep(int t) { marks_[t] = Mark::Keep; }
  void merge(const RefineMarks& other);
  int count(Mark m) const;

 private:
  std::vector<Mark> marks_;
};

// Uniform right-isosceles triangulation; shortest edge h = width * 2^(-level/2).
// level must be even and >= 2.
Mesh build_structured_mesh(const Rect& domain, int level);

// Newest-vertex bisection of refine-marked triangles with conformity closure, after
// undoing bisections whose whole patch is coarsen-marked.
Mesh refine_and_coarsen(const Mesh& mesh, const RefineMarks& marks);

// Red refinement: every triangle split into four through its edge midpoints.
Mesh midpoint_refine(const Mesh& mesh);

}  // namespace phaseflow
