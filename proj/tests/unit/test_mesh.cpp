#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "phaseflow/error.hpp"
#include "phaseflow/mesh.hpp"

using namespace phaseflow;

namespace {

std::set<std::pair<long long, long long>> vertex_set(const Mesh& m) {
  std::set<std::pair<long long, long long>> s;
  for (const Vec2& p : m.vertices()) s.emplace(std::llround(p.x() * 1e9), std::llround(p.y() * 1e9));
  return s;
}

RefineMarks all(const Mesh& m, Mark mark) {
  RefineMarks marks(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    if (mark == Mark::Refine) marks.refine(t);
    if (mark == Mark::Coarsen) marks.coarsen(t);
  }
  return marks;
}

}  // namespace

TEST_CASE("structured mesh edge length follows the level") {
  const Rect sq{-1, -1, 1, 1};
  CHECK(build_structured_mesh(sq, 10).min_edge_length() == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(build_structured_mesh(sq, 12).min_edge_length() == doctest::Approx(0.03125).epsilon(1e-14));
  const Mesh m = build_structured_mesh(Rect{0, 0, 1, 1}, 2);
  CHECK(m.num_triangles() == 8);
  CHECK(m.num_vertices() == 9);
  CHECK(m.min_edge_length() == doctest::Approx(0.5));
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-14));
  m.check_invariants();
}

TEST_CASE("structured mesh rejects odd or too small levels") {
  CHECK_THROWS_AS(build_structured_mesh(Rect{0, 0, 1, 1}, 3), ParameterError);
  CHECK_THROWS_AS(build_structured_mesh(Rect{0, 0, 1, 1}, 0), ParameterError);
  CHECK_THROWS_AS(build_structured_mesh(Rect{0, 0, 1, 1}, -2), ParameterError);
  CHECK_THROWS_AS(build_structured_mesh(Rect{0, 0, 0, 1}, 2), ParameterError);
}

TEST_CASE("structured mesh on a tall rectangle") {
  const Mesh m = build_structured_mesh(Rect{0, 0, 1, 4}, 4);
  CHECK(m.num_triangles() == 2 * 4 * 16);
  CHECK(m.total_area() == doctest::Approx(4.0));
  m.check_invariants();
}

TEST_CASE("refine_and_coarsen without marks is the identity") {
  const Mesh m = build_structured_mesh(Rect{0, 0, 1, 1}, 4);
  const Mesh r = refine_and_coarsen(m, RefineMarks(m.num_triangles()));
  REQUIRE(r.num_triangles() == m.num_triangles());
  REQUIRE(r.num_vertices() == m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(r.triangle(t).v == m.triangle(t).v);
  for (int i = 0; i < m.num_vertices(); ++i) CHECK(r.vertex(i) == m.vertex(i));
}

TEST_CASE("refining one interior triangle closes to a conforming mesh") {
  const Mesh m = build_structured_mesh(Rect{0, 0, 1, 1}, 2);
  for (int t = 0; t < m.num_triangles(); ++t) {
    RefineMarks marks(m.num_triangles());
    marks.refine(t);
    const Mesh r = refine_and_coarsen(m, marks);
    CHECK(r.num_triangles() > m.num_triangles());
    CHECK_NOTHROW(r.check_invariants());
    // Every interior edge has two neighbours, so no hanging nodes remain.
    int boundary = 0;
    for (const Edge& e : r.edges()) boundary += e.on_boundary();
    CHECK(static_cast<int>(r.boundary_edges().size()) == boundary);
    CHECK(r.total_area() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("refining everything doubles the triangle count and two sweeps halve h") {
  const Mesh m = build_structured_mesh(Rect{-1, -1, 1, 1}, 4);
  const Mesh r1 = refine_and_coarsen(m, all(m, Mark::Refine));
  CHECK(r1.num_triangles() == 2 * m.num_triangles());
  const Mesh r2 = refine_and_coarsen(r1, all(r1, Mark::Refine));
  CHECK(r2.num_triangles() == 4 * m.num_triangles());
  CHECK(r2.min_edge_length() == doctest::Approx(0.5 * m.min_edge_length()).epsilon(1e-14));
  // Two uniform sweeps reproduce the structured mesh two levels up.
  CHECK(vertex_set(r2) == vertex_set(build_structured_mesh(Rect{-1, -1, 1, 1}, 6)));
  for (int t = 0; t < r2.num_triangles(); ++t) CHECK(r2.level(t) == 6);
}

TEST_CASE("coarsening undoes uniform refinement") {
  const Mesh m = build_structured_mesh(Rect{0, 0, 1, 1}, 4);
  const Mesh r = refine_and_coarsen(m, all(m, Mark::Refine));
  const Mesh c = refine_and_coarsen(r, all(r, Mark::Coarsen));
  CHECK(c.num_triangles() == m.num_triangles());
  CHECK(vertex_set(c) == vertex_set(m));
  c.check_invariants();
  // Base-level elements never coarsen further.
  const Mesh c2 = refine_and_coarsen(c, all(c, Mark::Coarsen));
  CHECK(c2.num_triangles() == m.num_triangles());
}

TEST_CASE("random refine and coarsen sequences keep every mesh invariant") {
  std::mt19937 rng(7);
  Mesh m = build_structured_mesh(Rect{0, 0, 2, 1}, 4);
  for (int step = 0; step < 20; ++step) {
    RefineMarks marks(m.num_triangles());
    std::uniform_int_distribution<int> pick(0, 9);
    for (int t = 0; t < m.num_triangles(); ++t) {
      const int r = pick(rng);
      if (r < 2 && m.level(t) < 10) marks.refine(t);
      if (r >= 5) marks.coarsen(t);
    }
    m = refine_and_coarsen(m, marks);
    CHECK_NOTHROW(m.check_invariants());
    CHECK(m.total_area() == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("refine marks give precedence to refinement") {
  RefineMarks a(3), b(3);
  a.coarsen(0);
  b.refine(0);
  a.merge(b);
  CHECK(a[0] == Mark::Refine);
  a.coarsen(0);
  CHECK(a[0] == Mark::Refine);
  a.coarsen(1);
  CHECK(a[1] == Mark::Coarsen);
  CHECK(a.count(Mark::Keep) == 1);
}

TEST_CASE("midpoint refinement") {
  SUBCASE("two-triangle square") {
    const Mesh m(Rect{0, 0, 1, 1}, 0, {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)},
                 {Triangle{{2, 0, 1}, 0}, Triangle{{0, 2, 3}, 0}});
    m.check_invariants();
    const Mesh r = midpoint_refine(m);
    CHECK(r.num_triangles() == 8);
    CHECK(r.num_vertices() == m.num_vertices() + m.num_edges());
    CHECK(r.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("structured level L becomes level L + 2") {
    const Mesh m = build_structured_mesh(Rect{-1, -1, 1, 1}, 4);
    const Mesh r = midpoint_refine(m);
    CHECK(vertex_set(r) == vertex_set(build_structured_mesh(Rect{-1, -1, 1, 1}, 6)));
    CHECK(r.total_area() == doctest::Approx(m.total_area()).epsilon(1e-12));
    r.check_invariants();
    // Every P2 node (vertex or edge midpoint) is a vertex of the refined mesh.
    const auto vs = vertex_set(r);
    for (const Edge& e : m.edges()) {
      const Vec2 p = midpoint(m.vertex(e.v[0]), m.vertex(e.v[1]));
      CHECK(vs.count({std::llround(p.x() * 1e9), std::llround(p.y() * 1e9)}) == 1);
    }
  }
  SUBCASE("adapted mesh") {
    Mesh m = build_structured_mesh(Rect{0, 0, 1, 1}, 2);
    RefineMarks marks(m.num_triangles());
    marks.refine(3);
    m = refine_and_coarsen(m, marks);
    const Mesh r = midpoint_refine(m);
    CHECK(r.num_vertices() == m.num_vertices() + m.num_edges());
    CHECK(r.num_triangles() == 4 * m.num_triangles());
    r.check_invariants();
  }
}

TEST_CASE("obtuse triangles are reported") {
  const Mesh m(Rect{0, 0, 4, 1}, 0, {Vec2(0, 0), Vec2(4, 0), Vec2(2, 1), Vec2(0, 1), Vec2(4, 1)},
               {Triangle{{0, 1, 2}, 0}, Triangle{{0, 2, 3}, 0}, Triangle{{1, 4, 2}, 0}});
  CHECK_THROWS_AS(m.check_invariants(), GeometryError);
}
