#pragma once

#include <array>
#include <vector>

#include "phaseflow/geometry.hpp"
#include "phaseflow/mesh.hpp"

namespace phaseflow {

// Piece of a dual face lying inside one primal triangle: the segment from the primal
// edge midpoint to the triangle's circumcenter.
struct DualSegment {
  int triangle = -1;
  double length = 0.0;
  Vec2 midpoint = Vec2::Zero();
};

// Face between the Voronoi cells of vertices i < j. normal points from i to j.
struct DualFace {
  int i = -1;
  int j = -1;
  Vec2 normal = Vec2::Zero();
  double measure = 0.0;
  Vec2 midpoint = Vec2::Zero();
  std::array<DualSegment, 2> segments{};
  int num_segments = 0;
};

// Part of a Voronoi cell boundary lying on the domain boundary (half of a primal
// boundary edge).
struct DualBoundaryFace {
  int cell = -1;
  int triangle = -1;
  Vec2 normal = Vec2::Zero();  // outward
  double measure = 0.0;
  Vec2 midpoint = Vec2::Zero();
};

// Voronoi dual of a non-obtuse triangulation, clipped to the domain.
struct DualGrid {
  std::vector<double> cell_volume;
  std::vector<DualFace> faces;               // only faces with positive measure
  std::vector<DualBoundaryFace> boundary_faces;
  std::vector<std::vector<int>> cell_faces;  // face indices touching each cell
  std::vector<std::vector<int>> cell_boundary_faces;
  std::vector<std::vector<int>> neighbors;   // primal edge neighbors of each vertex

  int num_cells() const { return static_cast<int>(cell_volume.size()); }

  // Sum of |Gamma| * outward normal over the whole cell boundary (zero for a closed polygon).
  Vec2 closure_defect(int cell) const;
};

// Throws GeometryError if the mesh contains an obtuse triangle.
DualGrid build_dual_grid(const Mesh& mesh);

}  // namespace phaseflow
