#include "phaseflow/dual_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phaseflow/error.hpp"

namespace phaseflow {

namespace {

// Circumcenter of a non-obtuse triangle; throws for obtuse input.
Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c, int t) {
  const std::array<const Vec2*, 3> p{&a, &b, &c};
  for (int k = 0; k < 3; ++k) {
    const Vec2 e1 = *p[(k + 1) % 3] - *p[k];
    const Vec2 e2 = *p[(k + 2) % 3] - *p[k];
    if (e1.dot(e2) < -1e-12 * e1.norm() * e2.norm()) {
      throw GeometryError("obtuse triangle " + std::to_string(t) + ": Voronoi dual face would degenerate");
    }
  }
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = ab.squaredNorm();
  const double ac2 = ac.squaredNorm();
  return a + Vec2(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
}

double quad_area(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& p3) {
  return 0.5 * (cross(p0, p1) + cross(p1, p2) + cross(p2, p3) + cross(p3, p0));
}

}  // namespace

Vec2 DualGrid::closure_defect(int cell) const {
  Vec2 s = Vec2::Zero();
  for (int f : cell_faces[cell]) {
    const DualFace& face = faces[f];
    s += (face.i == cell ? 1.0 : -1.0) * face.measure * face.normal;
  }
  for (int b : cell_boundary_faces[cell]) s += boundary_faces[b].measure * boundary_faces[b].normal;
  return s;
}

DualGrid build_dual_grid(const Mesh& mesh) {
  DualGrid dual;
  const int nv = mesh.num_vertices();
  dual.cell_volume.assign(nv, 0.0);
  dual.cell_faces.assign(nv, {});
  dual.neighbors.assign(nv, {});
  dual.cell_boundary_faces.assign(nv, {});

  std::vector<Vec2> centers(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangle(t).v;
    const Vec2& a = mesh.vertex(v[0]);
    const Vec2& b = mesh.vertex(v[1]);
    const Vec2& c = mesh.vertex(v[2]);
    centers[t] = circumcenter(a, b, c, t);
    for (int k = 0; k < 3; ++k) {
      const Vec2& xi = mesh.vertex(v[k]);
      const Vec2 m_next = midpoint(xi, mesh.vertex(v[(k + 1) % 3]));
      const Vec2 m_prev = midpoint(xi, mesh.vertex(v[(k + 2) % 3]));
      dual.cell_volume[v[k]] += quad_area(xi, m_next, centers[t], m_prev);
    }
  }

  const double scale = mesh.max_edge_length();
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const Vec2& xi = mesh.vertex(edge.v[0]);
    const Vec2& xj = mesh.vertex(edge.v[1]);
    dual.neighbors[edge.v[0]].push_back(edge.v[1]);
    dual.neighbors[edge.v[1]].push_back(edge.v[0]);
    const Vec2 m = midpoint(xi, xj);

    DualFace face;
    face.i = edge.v[0];
    face.j = edge.v[1];
    face.normal = (xj - xi).normalized();
    for (int side = 0; side < 2; ++side) {
      const int t = edge.tri[side];
      if (t < 0) continue;
      DualSegment seg;
      seg.triangle = t;
      seg.length = (centers[t] - m).norm();
      seg.midpoint = midpoint(m, centers[t]);
      if (seg.length <= 1e-13 * scale) continue;
      face.segments[face.num_segments++] = seg;
      face.measure += seg.length;
    }
    if (face.num_segments == 2) {
      face.midpoint = midpoint(centers[face.segments[0].triangle], centers[face.segments[1].triangle]);
    } else if (face.num_segments == 1) {
      face.midpoint = midpoint(m, centers[face.segments[0].triangle]);
    }
    if (face.num_segments > 0) {
      const int id = static_cast<int>(dual.faces.size());
      dual.cell_faces[face.i].push_back(id);
      dual.cell_faces[face.j].push_back(id);
      dual.faces.push_back(face);
    }

    if (edge.on_boundary()) {
      const int t = edge.tri[0];
      // Outward normal: rotate the edge direction so it points away from the triangle.
      Vec2 n(xj.y() - xi.y(), xi.x() - xj.x());
      n.normalize();
      const auto& tv = mesh.triangle(t).v;
      const Vec2 centroid = (mesh.vertex(tv[0]) + mesh.vertex(tv[1]) + mesh.vertex(tv[2])) / 3.0;
      if (n.dot(centroid - m) > 0.0) n = -n;
      for (int end = 0; end < 2; ++end) {
        DualBoundaryFace bf;
        bf.cell = edge.v[end];
        bf.triangle = t;
        bf.normal = n;
        bf.measure = 0.5 * (xj - xi).norm();
        bf.midpoint = midpoint(mesh.vertex(edge.v[end]), m);
        dual.cell_boundary_faces[bf.cell].push_back(static_cast<int>(dual.boundary_faces.size()));
        dual.boundary_faces.push_back(bf);
      }
    }
  }
  for (auto& nb : dual.neighbors) std::sort(nb.begin(), nb.end());
  return dual;
}

}  // namespace phaseflow
