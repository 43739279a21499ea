#include "phaseflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "phaseflow/error.hpp"

namespace phaseflow {

namespace {

std::int64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double boundary_tolerance(const Rect& d) { return 1e-12 * std::max(d.width(), d.height()); }

}  // namespace

Mesh::Mesh(Rect domain, int base_level, std::vector<Vec2> vertices, std::vector<Triangle> triangles)
    : domain_(domain),
      base_level_(base_level),
      vertices_(std::move(vertices)),
      triangles_(std::move(triangles)) {
  build_topology();
}

void Mesh::build_topology() {
  struct LocalEdge {
    int a, b, tri, k;
  };
  std::vector<LocalEdge> local;
  local.reserve(3 * triangles_.size());
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& v = triangles_[t].v;
    for (int k = 0; k < 3; ++k) {
      int a = v[(k + 1) % 3];
      int b = v[(k + 2) % 3];
      if (a > b) std::swap(a, b);
      local.push_back({a, b, t, k});
    }
  }
  std::sort(local.begin(), local.end(), [](const LocalEdge& x, const LocalEdge& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return x.tri < y.tri;
  });

  edges_.clear();
  tri_edges_.assign(triangles_.size(), {-1, -1, -1});
  for (std::size_t i = 0; i < local.size();) {
    std::size_t j = i;
    while (j < local.size() && local[j].a == local[i].a && local[j].b == local[i].b) ++j;
    if (j - i > 2) throw GeometryError("non-manifold edge shared by more than two triangles");
    Edge e;
    e.v = {local[i].a, local[i].b};
    e.tri[0] = local[i].tri;
    if (j - i == 2) e.tri[1] = local[i + 1].tri;
    const int id = static_cast<int>(edges_.size());
    for (std::size_t q = i; q < j; ++q) tri_edges_[local[q].tri][local[q].k] = id;
    edges_.push_back(e);
    i = j;
  }

  boundary_vertex_.assign(vertices_.size(), false);
  boundary_edges_.clear();
  const double tol = boundary_tolerance(domain_);
  min_edge_ = std::numeric_limits<double>::infinity();
  max_edge_ = 0.0;
  for (int id = 0; id < num_edges(); ++id) {
    const Edge& e = edges_[id];
    const double len = (vertices_[e.v[1]] - vertices_[e.v[0]]).norm();
    min_edge_ = std::min(min_edge_, len);
    max_edge_ = std::max(max_edge_, len);
    if (!e.on_boundary()) continue;
    boundary_vertex_[e.v[0]] = true;
    boundary_vertex_[e.v[1]] = true;
    const Vec2 m = midpoint(vertices_[e.v[0]], vertices_[e.v[1]]);
    BoundaryEdge be;
    be.edge = id;
    if (std::abs(m.y() - domain_.y0) <= tol) {
      be.side = Side::Bottom;
    } else if (std::abs(m.x() - domain_.x1) <= tol) {
      be.side = Side::Right;
    } else if (std::abs(m.y() - domain_.y1) <= tol) {
      be.side = Side::Top;
    } else if (std::abs(m.x() - domain_.x0) <= tol) {
      be.side = Side::Left;
    } else {
      // Hanging node: the edge has a single neighbor but is not on the rectangle.
      be.edge = -1;
    }
    if (be.edge >= 0) boundary_edges_.push_back(be);
  }
  if (edges_.empty()) min_edge_ = 0.0;

  vertex_tris_.assign(vertices_.size(), {});
  for (int t = 0; t < num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) vertex_tris_[triangles_[t].v[k]].push_back(t);
  }
}

double Mesh::area(int t) const {
  const auto& v = triangles_[t].v;
  return signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < num_triangles(); ++t) s += area(t);
  return s;
}

unsigned Mesh::boundary_sides(const Vec2& p) const {
  const double tol = boundary_tolerance(domain_);
  unsigned sides = 0;
  if (std::abs(p.y() - domain_.y0) <= tol) sides |= 1u << static_cast<unsigned>(Side::Bottom);
  if (std::abs(p.x() - domain_.x1) <= tol) sides |= 1u << static_cast<unsigned>(Side::Right);
  if (std::abs(p.y() - domain_.y1) <= tol) sides |= 1u << static_cast<unsigned>(Side::Top);
  if (std::abs(p.x() - domain_.x0) <= tol) sides |= 1u << static_cast<unsigned>(Side::Left);
  return sides;
}

void Mesh::check_invariants() const {
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& v = triangles_[t].v;
    if (!(area(t) > 0.0)) {
      throw GeometryError("triangle " + std::to_string(t) + " has non-positive area");
    }
    for (int k = 0; k < 3; ++k) {
      const Vec2 e1 = vertices_[v[(k + 1) % 3]] - vertices_[v[k]];
      const Vec2 e2 = vertices_[v[(k + 2) % 3]] - vertices_[v[k]];
      if (e1.dot(e2) < -1e-12 * e1.norm() * e2.norm()) {
        throw GeometryError("triangle " + std::to_string(t) + " is obtuse");
      }
    }
  }
  int boundary = 0;
  for (const Edge& e : edges_) boundary += e.on_boundary() ? 1 : 0;
  if (boundary != static_cast<int>(boundary_edges_.size())) {
    throw GeometryError("mesh is not conforming: edge with a single neighbor inside the domain");
  }
}

void RefineMarks::merge(const RefineMarks& other) {
  for (int t = 0; t < size(); ++t) {
    if (other.marks_[t] == Mark::Refine) {
      marks_[t] = Mark::Refine;
    } else if (other.marks_[t] == Mark::Coarsen) {
      coarsen(t);
    }
  }
}

int RefineMarks::count(Mark m) const {
  return static_cast<int>(std::count(marks_.begin(), marks_.end(), m));
}

Mesh build_structured_mesh(const Rect& domain, int level) {
  if (level < 2 || level % 2 != 0) {
    throw ParameterError("mesh level must be even and >= 2, got " + std::to_string(level));
  }
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw ParameterError("degenerate domain rectangle");
  }
  const int nx = 1 << (level / 2);
  const double h = domain.width() / nx;
  const double ny_real = domain.height() / h;
  const int ny = static_cast<int>(std::lround(ny_real));
  if (ny < 1 || std::abs(ny_real - ny) > 1e-9 * ny_real) {
    throw ParameterError("domain height is not an integer multiple of the mesh size");
  }

  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    const double y = domain.y0 + domain.height() * j / ny;
    for (int i = 0; i <= nx; ++i) {
      vertices.emplace_back(domain.x0 + domain.width() * i / nx, y);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<Triangle> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int sw = id(i, j), se = id(i + 1, j), ne = id(i + 1, j + 1), nw = id(i, j + 1);
      // Both halves share the diagonal as refinement edge; the right angle is the newest vertex.
      triangles.push_back({{ne, sw, se}, 0});
      triangles.push_back({{sw, ne, nw}, 0});
    }
  }
  return Mesh(domain, level, std::move(vertices), std::move(triangles));
}

namespace {

// Undo bisections whose entire patch around the bisection vertex is coarsen-marked.
// Returns the coarsened mesh and the marks transported to it.
std::pair<Mesh, RefineMarks> coarsen(const Mesh& mesh, const RefineMarks& marks) {
  const int nt = mesh.num_triangles();
  std::vector<int> replaced_by(nt, -2);  // -2: unchanged, -1: dropped, >=0: parent slot
  std::vector<Triangle> parents;
  std::vector<bool> removed_vertex(mesh.num_vertices(), false);

  const auto& vt = mesh.vertex_triangles();
  for (int m = 0; m < mesh.num_vertices(); ++m) {
    const auto& patch = vt[m];
    const std::size_t want = mesh.is_boundary_vertex(m) ? 2 : 4;
    if (patch.size() != want) continue;
    const int gen = mesh.triangle(patch[0]).generation;
    if (gen <= 0) continue;
    bool ok = true;
    for (int t : patch) {
      const Triangle& tri = mesh.triangle(t);
      if (tri.v[2] != m || tri.generation != gen || marks[t] != Mark::Coarsen) ok = false;
    }
    if (!ok) continue;

    // Pair siblings: (c, a, m) and (b, c, m) share the vertex c.
    auto siblings = [&](int first, int second) {
      return mesh.triangle(first).v[0] == mesh.triangle(second).v[1];
    };
    auto ordered = [&](int x, int y, std::pair<int, int>& out) {
      if (siblings(x, y)) {
        out = {x, y};
        return true;
      }
      if (siblings(y, x)) {
        out = {y, x};
        return true;
      }
      return false;
    };
    std::vector<std::pair<int, int>> pairs;
    if (patch.size() == 2) {
      std::pair<int, int> pr;
      if (ordered(patch[0], patch[1], pr)) pairs.push_back(pr);
    } else {
      static constexpr int kPartitions[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
      for (const auto& part : kPartitions) {
        std::pair<int, int> p1, p2;
        if (ordered(patch[part[0]], patch[part[1]], p1) && ordered(patch[part[2]], patch[part[3]], p2)) {
          pairs = {p1, p2};
          break;
        }
      }
    }
    if (pairs.size() * 2 != patch.size()) continue;

    std::vector<Triangle> candidate;
    for (auto [t1, t2] : pairs) {
      const Triangle& a = mesh.triangle(t1);
      const Triangle& b = mesh.triangle(t2);
      Triangle parent{{a.v[1], b.v[0], a.v[0]}, gen - 1};
      if (!(signed_area(mesh.vertex(parent.v[0]), mesh.vertex(parent.v[1]), mesh.vertex(parent.v[2])) >
            0.0)) {
        ok = false;
      }
      candidate.push_back(parent);
    }
    if (!ok) continue;

    removed_vertex[m] = true;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const int slot = static_cast<int>(parents.size());
      parents.push_back(candidate[k]);
      replaced_by[pairs[k].first] = slot;
      replaced_by[pairs[k].second] = -1;
    }
  }

  if (parents.empty()) return {mesh, marks};

  std::vector<int> new_index(mesh.num_vertices(), -1);
  std::vector<Vec2> vertices;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (removed_vertex[i]) continue;
    new_index[i] = static_cast<int>(vertices.size());
    vertices.push_back(mesh.vertex(i));
  }
  std::vector<Triangle> triangles;
  std::vector<Mark> new_marks;
  for (int t = 0; t < nt; ++t) {
    if (replaced_by[t] == -1) continue;
    Triangle tri = replaced_by[t] >= 0 ? parents[replaced_by[t]] : mesh.triangle(t);
    for (int& v : tri.v) v = new_index[v];
    triangles.push_back(tri);
    new_marks.push_back(replaced_by[t] >= 0 ? Mark::Keep : marks[t]);
  }
  Mesh out(mesh.domain(), mesh.base_level(), std::move(vertices), std::move(triangles));
  RefineMarks out_marks(out.num_triangles());
  for (int t = 0; t < out.num_triangles(); ++t) {
    if (new_marks[t] == Mark::Refine) out_marks.refine(t);
    if (new_marks[t] == Mark::Coarsen) out_marks.coarsen(t);
  }
  return {std::move(out), std::move(out_marks)};
}

Mesh refine(const Mesh& mesh, const RefineMarks& marks) {
  std::vector<bool> marked(mesh.num_edges(), false);
  bool any = false;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (marks[t] == Mark::Refine) {
      marked[mesh.triangle_edge(t, 2)] = true;
      any = true;
    }
  }
  if (!any) return mesh;

  // Closure: a triangle with any bisected edge must also bisect its refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const int ref = mesh.triangle_edge(t, 2);
      if (marked[ref]) continue;
      if (marked[mesh.triangle_edge(t, 0)] || marked[mesh.triangle_edge(t, 1)]) {
        marked[ref] = true;
        changed = true;
      }
    }
  }

  std::vector<Vec2> vertices = mesh.vertices();
  std::map<std::int64_t, int> midpoints;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!marked[e]) continue;
    const Edge& edge = mesh.edge(e);
    midpoints[edge_key(edge.v[0], edge.v[1])] = static_cast<int>(vertices.size());
    vertices.push_back(midpoint(mesh.vertex(edge.v[0]), mesh.vertex(edge.v[1])));
  }

  std::vector<Triangle> triangles;
  triangles.reserve(mesh.num_triangles() * 2);
  auto bisect = [&](auto&& self, const Triangle& tri) -> void {
    auto it = midpoints.find(edge_key(tri.v[0], tri.v[1]));
    if (it == midpoints.end()) {
      triangles.push_back(tri);
      return;
    }
    const int a = tri.v[0], b = tri.v[1], c = tri.v[2], m = it->second;
    self(self, Triangle{{c, a, m}, tri.generation + 1});
    self(self, Triangle{{b, c, m}, tri.generation + 1});
  };
  for (const Triangle& tri : mesh.triangles()) bisect(bisect, tri);
  return Mesh(mesh.domain(), mesh.base_level(), std::move(vertices), std::move(triangles));
}

}  // namespace

Mesh refine_and_coarsen(const Mesh& mesh, const RefineMarks& marks) {
  if (marks.size() != mesh.num_triangles()) {
    throw ParameterError("refinement marks do not match the number of triangles");
  }
  auto [coarse, transported] = coarsen(mesh, marks);
  return refine(coarse, transported);
}

Mesh midpoint_refine(const Mesh& mesh) {
  std::vector<Vec2> vertices = mesh.vertices();
  const int nv = mesh.num_vertices();
  for (const Edge& e : mesh.edges()) vertices.push_back(midpoint(mesh.vertex(e.v[0]), mesh.vertex(e.v[1])));

  std::vector<Triangle> triangles;
  triangles.reserve(4 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const int a = tri.v[0], b = tri.v[1], c = tri.v[2];
    const int m_bc = nv + mesh.triangle_edge(t, 0);
    const int m_ca = nv + mesh.triangle_edge(t, 1);
    const int m_ab = nv + mesh.triangle_edge(t, 2);
    const int g = tri.generation + 2;
    // Each child is a scaled copy of the parent, so the newest-vertex labels carry over.
    triangles.push_back({{a, m_ab, m_ca}, g});
    triangles.push_back({{m_ab, b, m_bc}, g});
    triangles.push_back({{m_ca, m_bc, c}, g});
    triangles.push_back({{m_bc, m_ca, m_ab}, g});
  }
  return Mesh(mesh.domain(), mesh.base_level(), std::move(vertices), std::move(triangles));
}

}  // namespace phaseflow
