#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "phaseflow/cahn_hilliard.hpp"
#include "phaseflow/error.hpp"
#include "phaseflow/quadrature.hpp"

using namespace phaseflow;

namespace {

MeshPtr structured(const Rect& r, int level) { return std::make_shared<const Mesh>(build_structured_mesh(r, level)); }

}  // namespace

TEST_CASE("double well values") {
  const auto one = double_well_eval(1.0);
  CHECK(one.F == 0.0);
  CHECK(one.dF == 0.0);
  const auto zero = double_well_eval(0.0);
  CHECK(zero.F == 0.25);
  CHECK(zero.dF_plus == 0.0);
  CHECK(zero.dF_minus == 0.0);
  const auto two = double_well_eval(2.0);
  CHECK(two.dF_plus == 8.0);
  CHECK(two.dF_minus == -2.0);
  CHECK(two.dF == 6.0);
  CHECK(double_well(-1.0) == 0.0);
}

TEST_CASE("convex-concave split") {
  const double h = 1e-4;
  double prev = -std::numeric_limits<double>::infinity();
  for (double x = -3.0; x <= 3.0; x += 0.01) {
    CHECK(double_well_plus(x) + double_well_minus(x) == doctest::Approx(double_well(x)).epsilon(1e-14));
    const double d2p = (double_well_plus(x + h) - 2 * double_well_plus(x) + double_well_plus(x - h)) / (h * h);
    const double d2m = (double_well_minus(x + h) - 2 * double_well_minus(x) + double_well_minus(x - h)) / (h * h);
    CHECK(d2p >= -1e-6);
    CHECK(d2m <= 1e-6);
    const double dp = double_well_eval(x).dF_plus;
    CHECK(dp >= prev);
    prev = dp;
  }
}

TEST_CASE("upwind flux") {
  CHECK(eo_flux(2.0, 1.0, -1.0, 0.5) == 1.0);
  CHECK(eo_flux(0.0, 3.0, -7.0, 0.5) == 0.0);
  CHECK(eo_flux(-4.0, 0.3, 0.3, 0.25) == doctest::Approx(-0.3).epsilon(1e-15));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 1000; ++k) {
    const double un = u(rng), a = u(rng), b = u(rng), f = std::abs(u(rng));
    CHECK(eo_flux(un, a, b, f) == -eo_flux(-un, b, a, f));
    CHECK(eo_flux(un, a, a, f) == f * (un * a));
  }
}

TEST_CASE("finite-volume and finite-element values coincide at the nodes") {
  const SpacePtr s = make_space(structured(Rect{0, 0, 1, 1}, 4), SpaceKind::P1Scalar);
  const Field f = interpolate_nodal([](const Vec2& p) { return std::cos(p.x()) + p.y(); }, s);
  const Field back = to_fe(to_fv(f), s);
  CHECK(back.values == f.values);
}

TEST_CASE("minmod reconstruction") {
  const MeshPtr m = structured(Rect{-1, -1, 1, 1}, 6);
  const DualGrid d = build_dual_grid(*m);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);

  SUBCASE("constant") {
    const FaceTraces tr = minmod_reconstruct(to_fv(interpolate_nodal([](const Vec2&) { return 0.7; }, s)), *m, d);
    for (std::size_t f = 0; f < d.faces.size(); ++f) {
      CHECK(tr.left[f] == 0.7);
      CHECK(tr.right[f] == 0.7);
    }
  }
  SUBCASE("linear data is reproduced at edge midpoints") {
    auto lin = [](const Vec2& p) { return 0.3 * p.x() - 1.2 * p.y() + 2.0; };
    const FaceTraces tr = minmod_reconstruct(to_fv(interpolate_nodal(lin, s)), *m, d);
    for (std::size_t f = 0; f < d.faces.size(); ++f) {
      const Vec2 mid = midpoint(m->vertex(d.faces[f].i), m->vertex(d.faces[f].j));
      CHECK(tr.left[f] == doctest::Approx(lin(mid)).epsilon(1e-13));
      CHECK(tr.right[f] == doctest::Approx(lin(mid)).epsilon(1e-13));
    }
  }
  SUBCASE("step profile creates no overshoot") {
    const FvField step = to_fv(interpolate_nodal([](const Vec2& p) { return p.x() < 0.1 ? 1.0 : -1.0; }, s));
    const FaceTraces tr = minmod_reconstruct(step, *m, d);
    for (std::size_t f = 0; f < d.faces.size(); ++f) {
      const double a = step.values[d.faces[f].i], b = step.values[d.faces[f].j];
      CHECK(tr.left[f] >= std::min(a, b));
      CHECK(tr.left[f] <= std::max(a, b));
      CHECK(tr.right[f] >= std::min(a, b));
      CHECK(tr.right[f] <= std::max(a, b));
    }
  }
}

TEST_CASE("finite-volume transport") {
  const MeshPtr m = structured(Rect{-1, -1, 1, 1}, 6);
  const DualGrid d = build_dual_grid(*m);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const SpacePtr vs = make_space(m, SpaceKind::P2Vector);
  const Vector vol = p1_hat_integrals(*m);
  const FvField bump = to_fv(interpolate_nodal([](const Vec2& p) { return std::exp(-8.0 * p.squaredNorm()); }, s));

  SUBCASE("zero velocity leaves the data unchanged") {
    const FvField out = fv_transport_step(bump, Field(vs), 0.1, *m, d, vol);
    CHECK(out.values == bump.values);
  }
  SUBCASE("constant state in a constant flow is unchanged") {
    const Field v = interpolate_nodal_vector([](const Vec2&) { return Vec2(0.3, -0.8); }, vs);
    const FvField c{Vector::Constant(s->num_dofs(), 0.4)};
    const double tau = 0.5 * fv_max_timestep(v, d, vol);
    for (int order : {1, 2}) {
      const FvField out = fv_transport_step(c, v, tau, *m, d, vol, {order, 0.9});
      for (int i = 0; i < out.values.size(); ++i) CHECK(std::abs(out.values[i] - 0.4) <= 1e-13);
    }
  }
  SUBCASE("mass is conserved for a flow without normal component") {
    const Field v = interpolate_nodal_vector(
        [](const Vec2& p) {
          const double bx = 1 - p.x() * p.x(), by = 1 - p.y() * p.y();
          return Vec2(bx * by * p.y(), -bx * by * p.x());
        },
        vs);
    const double tau = fv_max_timestep(v, d, vol);
    for (Vector volumes : {vol, Vector(Eigen::Map<const Vector>(d.cell_volume.data(), d.num_cells()))}) {
      FvField cur = bump;
      const double m0 = volumes.dot(cur.values);
      for (int k = 0; k < 20; ++k) cur = fv_transport_step(cur, v, tau, *m, d, volumes);
      CHECK(std::abs(volumes.dot(cur.values) - m0) <= 1e-13 * bump.values.norm());
    }
  }
  SUBCASE("CFL violations are reported") {
    const Field v = interpolate_nodal_vector([](const Vec2&) { return Vec2(1.0, 0.0); }, vs);
    const double tau = fv_max_timestep(v, d, vol);
    CHECK_NOTHROW(fv_transport_step(bump, v, tau, *m, d, vol));
    CHECK_THROWS_AS(fv_transport_step(bump, v, 1.5 * tau, *m, d, vol), CflViolation);
  }
  SUBCASE("second order beats first order on a rotating bump") {
    const Field v = interpolate_nodal_vector([](const Vec2& p) { return Vec2(-p.y(), p.x()); }, vs);
    const FvField init = to_fv(interpolate_nodal(
        [](const Vec2& p) { return std::exp(-20.0 * (p - Vec2(0.4, 0.0)).squaredNorm()); }, s));
    const double period = 2.0 * M_PI;
    const int steps = static_cast<int>(std::ceil(period / fv_max_timestep(v, d, vol)));
    const double tau = period / steps;
    double err[2];
    for (int order : {1, 2}) {
      FvField cur = init;
      for (int k = 0; k < steps; ++k) cur = fv_transport_step(cur, v, tau, *m, d, vol, {order, 0.9});
      err[order - 1] = l2_distance(to_fe(cur, s), to_fe(init, s));
    }
    CHECK(err[1] < err[0]);
  }
}

TEST_CASE("convection vector") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 4);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const SpacePtr vs = make_space(m, SpaceKind::P2Vector);
  const Field phi = interpolate_nodal([](const Vec2& p) { return p.x() * p.x() + p.y(); }, s);
  const Field v = interpolate_nodal_vector([](const Vec2& p) { return Vec2(p.y() * p.y(), p.x() * p.y()); }, vs);
  CHECK(fe_convection_vector(phi, Field(vs)).norm() == 0.0);
  CHECK(fe_convection_vector(interpolate_nodal([](const Vec2&) { return 2.0; }, s), v).norm() <= 1e-15);
  // Partition of unity: the entries sum to the integral of v . grad phi.
  const Quadrature& q = Quadrature::triangle(6);
  double exact = 0;
  for (int t = 0; t < m->num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(*m, t);
    for (int k = 0; k < q.size(); ++k) exact += 2 * g.area * q.weights[k] * v.vector_value(t, q.points[k]).dot(phi.gradient(t, q.points[k]));
  }
  CHECK(fe_convection_vector(phi, v).sum() == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("diffusive Cahn-Hilliard solve") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 6);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const ChOperators ops(s);

  SUBCASE("pure phase is stationary") {
    const Field one = interpolate_nodal([](const Vec2&) { return 1.0; }, s);
    const ChResult r = ch_diffusive_solve(ops, one, one, 0.01, 0.5, DoubleWell{1.0, 0.1});
    CHECK((r.phi.values - one.values).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(r.mu.values.lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("zero mobility keeps phi") {
    const Field half = interpolate_nodal([](const Vec2& p) { return std::tanh((p.x() - 0.5) / 0.1); }, s);
    const Field old = interpolate_nodal([](const Vec2& p) { return std::tanh((p.x() - 0.45) / 0.1); }, s);
    const ChResult r = ch_diffusive_solve(ops, half, old, 0.01, 0.0, DoubleWell{1.0, 0.1});
    CHECK(r.phi.values == half.values);
  }
  SUBCASE("mass is conserved and the interfacial energy decays") {
    const DoubleWell dw{1.0, 0.1};
    Field phi = interpolate_nodal(
        [](const Vec2& p) { return std::tanh((0.3 - (p - Vec2(0.5, 0.5)).norm()) / (0.1 * std::sqrt(2.0)) + 0.5 * std::sin(9 * p.x())); }, s);
    double e = interfacial_energy(ops, phi, dw);
    for (int k = 0; k < 5; ++k) {
      const ChResult r = ch_diffusive_solve(ops, phi, phi, 1e-3, 0.5, dw);
      CHECK(std::abs(r.report.mass_after - r.report.mass_before) <= 1e-14);
      const double e_new = interfacial_energy(ops, r.phi, dw);
      CHECK(e_new <= e);
      e = e_new;
      phi = r.phi;
    }
  }
}

TEST_CASE("interfacial energy decays across a tanh layer on a thin strip") {
  const MeshPtr m = structured(Rect{0, 0, 4, 0.25}, 8);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const ChOperators ops(s);
  const DoubleWell dw{1.0, 1.0};
  const Field phi = interpolate_nodal([](const Vec2& p) { return std::tanh(2.0 * (p.x() - 2.0)); }, s);
  const ChResult r = ch_diffusive_solve(ops, phi, phi, 0.05, 1.0, dw);
  CHECK(interfacial_energy(ops, r.phi, dw) <= interfacial_energy(ops, phi, dw));
}
