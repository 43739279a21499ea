#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "phaseflow/error.hpp"
#include "phaseflow/momentum.hpp"
#include "phaseflow/quadrature.hpp"

using namespace phaseflow;

namespace {

MeshPtr structured(const Rect& r, int level) { return std::make_shared<const Mesh>(build_structured_mesh(r, level)); }

PhysParams ellipse_like() {
  PhysParams p;
  p.rho1 = 0.001;
  p.rho2 = 0.019;
  p.eta1 = p.eta2 = 0.01;
  p.mobility = 0.5;
  p.delta = 0.1;
  return p;
}

Field random_field(SpacePtr s, std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Field f(s);
  for (int i = 0; i < f.size(); ++i) f.values[i] = u(rng);
  return f;
}

// Independent evaluation of a single scalar-block entry of the convection matrix.
double convection_entry(const Field& rho, const Field& v, const FeSpace& space, int dof_row, int dof_col) {
  SpacePtr sp = std::shared_ptr<const FeSpace>(&space, [](const FeSpace*) {});
  Field er(sp), ec(sp);
  er.values[dof_row] = 1.0;
  ec.values[dof_col] = 1.0;
  const int comp_r = dof_row % 2, comp_c = dof_col % 2;
  if (comp_r != comp_c) return 0.0;
  const Quadrature& q = Quadrature::triangle(10);
  double trc = 0, tcr = 0;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const double a = space.mesh().area(t);
    for (int k = 0; k < q.size(); ++k) {
      const Vec2 w = rho.value(t, q.points[k]) * v.vector_value(t, q.points[k]);
      trc += 2 * a * q.weights[k] * w.dot(ec.gradient(t, q.points[k], comp_c)) * er.value(t, q.points[k], comp_r);
      tcr += 2 * a * q.weights[k] * w.dot(er.gradient(t, q.points[k], comp_r)) * ec.value(t, q.points[k], comp_c);
    }
  }
  return 0.5 * (trc - tcr);
}

}  // namespace

TEST_CASE("density and viscosity laws") {
  const PhysParams p = ellipse_like();
  const SpacePtr s = make_space(structured(Rect{0, 0, 1, 1}, 2), SpaceKind::P1Scalar);
  auto constant = [&](double c) { return interpolate_nodal([c](const Vec2&) { return c; }, s); };
  CHECK(density_from_phase(constant(-1), p).values[0] == doctest::Approx(0.001).epsilon(1e-14));
  CHECK(density_from_phase(constant(1), p).values[0] == doctest::Approx(0.019).epsilon(1e-14));
  CHECK(density_from_phase(constant(0), p).values[0] == doctest::Approx(0.010).epsilon(1e-14));

  std::mt19937 rng(1);
  const Field a = random_field(s, rng, -1.2, 1.2), b = random_field(s, rng, -1.2, 1.2);
  const Field dr = delta_rho(a, b, p);
  for (int i = 0; i < dr.size(); ++i) CHECK(dr.values[i] == doctest::Approx(0.009).epsilon(1e-12));
  const Field same = delta_rho(a, a, p);
  for (int i = 0; i < same.size(); ++i) CHECK(same.values[i] == p.density_slope());
  PhysParams matched = p;
  matched.rho1 = matched.rho2 = 0.5;
  const Field zero = delta_rho(a, b, matched);
  for (int i = 0; i < zero.size(); ++i) CHECK(zero.values[i] == 0.0);
}

TEST_CASE("diffusive flux") {
  const SpacePtr s = make_space(structured(Rect{0, 0, 1, 1}, 4), SpaceKind::P1Scalar);
  for (const Vec2& j : compute_flux_j(interpolate_nodal([](const Vec2&) { return 4.0; }, s), 0.5)) CHECK(j.norm() == 0.0);
  const Field x = interpolate_nodal([](const Vec2& p) { return p.x(); }, s);
  for (const Vec2& j : compute_flux_j(x, 0.0)) CHECK(j.norm() == 0.0);
  for (const Vec2& j : compute_flux_j(x, 0.5)) {
    CHECK(j.x() == doctest::Approx(-0.5).epsilon(1e-13));
    CHECK(std::abs(j.y()) <= 1e-13);
  }
}

TEST_CASE("convection matrices are exactly skew-symmetric") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 4);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  std::mt19937 rng(2);
  for (SpaceKind kind : {SpaceKind::P2Vector, SpaceKind::P1Vector}) {
    const SpacePtr vs = make_space(m, kind);
    CHECK(max_abs(assemble_Na(*vs, random_field(s, rng, 0.1, 1.0), Field(vs))) == 0.0);
    const Field rho = random_field(s, rng, 0.001, 0.019);
    const Field v = random_field(vs, rng, -1, 1);
    const SparseMatrix na = assemble_Na(*vs, rho, v);
    CHECK(max_abs(SparseMatrix(na + SparseMatrix(na.transpose()))) == 0.0);
    CHECK(max_abs(na) > 0.0);

    std::vector<Vec2> j(m->num_triangles());
    std::normal_distribution<double> n01;
    for (auto& x : j) x = Vec2(n01(rng), n01(rng));
    const SparseMatrix nb = assemble_Nb(*vs, random_field(s, rng, -0.01, 0.01), j);
    CHECK(max_abs(SparseMatrix(nb + SparseMatrix(nb.transpose()))) == 0.0);
    const Vector w = random_field(vs, rng, -1, 1).values;
    CHECK(std::abs(w.dot(na * w)) <= 1e-14);
    CHECK(std::abs(w.dot(nb * w)) <= 1e-14);

    CHECK(max_abs(assemble_Nb(*vs, random_field(s, rng, -1, 1), std::vector<Vec2>(m->num_triangles(), Vec2::Zero()))) == 0.0);
    CHECK(max_abs(assemble_Nb(*vs, Field(s), j)) == 0.0);
  }
}

TEST_CASE("convection matrix entries match direct quadrature") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 2);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const SpacePtr vs = make_space(m, SpaceKind::P2Vector);
  const Field rho = interpolate_nodal([](const Vec2&) { return 1.0; }, s);
  const Field v = interpolate_nodal_vector([](const Vec2& p) { return Vec2(p.y() * p.y() - p.x(), p.x() * p.y() + 0.3); }, vs);
  const SparseMatrix na = assemble_Na(*vs, rho, v);
  const Eigen::MatrixXd dense = na;
  int checked = 0;
  for (int r = 0; r < vs->num_dofs(); r += 3) {
    for (int c = 0; c < vs->num_dofs(); c += 5) {
      CHECK(dense(r, c) == doctest::Approx(convection_entry(rho, v, *vs, r, c)).epsilon(1e-12).scale(1e-3));
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("viscous matrix") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 4);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const SpacePtr vs = make_space(m, SpaceKind::P2Vector);
  const Field eta = interpolate_nodal([](const Vec2&) { return 1.0; }, s);
  const SparseMatrix a = assemble_viscous(*vs, eta);
  const Field rot = interpolate_nodal_vector([](const Vec2& p) { return Vec2(-p.y(), p.x()); }, vs);
  CHECK((a * rot.values).lpNorm<Eigen::Infinity>() <= 1e-13);
  const Field trans = interpolate_nodal_vector([](const Vec2&) { return Vec2(1.0, -2.0); }, vs);
  CHECK((a * trans.values).lpNorm<Eigen::Infinity>() <= 1e-13);
  const Field eta2 = interpolate_nodal([](const Vec2&) { return 2.0; }, s);
  CHECK(max_abs(SparseMatrix(assemble_viscous(*vs, eta2) - 2.0 * a)) <= 1e-13);
  // v = (y^2, 0): 2 |Dv|^2 = 4 y^2, integral over the unit square is 4/3.
  const Field v = interpolate_nodal_vector([](const Vec2& p) { return Vec2(p.y() * p.y(), 0.0); }, vs);
  CHECK(v.values.dot(a * v.values) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(max_abs(SparseMatrix(a - SparseMatrix(a.transpose()))) <= 1e-14);
  CHECK_THROWS_AS(assemble_viscous(*vs, Field(s)), ParameterError);
}

TEST_CASE("pressure stabilization") {
  const MeshPtr tri = std::make_shared<const Mesh>(Rect{0, 0, 1, 1}, 0, std::vector<Vec2>{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)},
                                                   std::vector<Triangle>{Triangle{{1, 2, 0}, 0}});
  const SpacePtr s1 = make_space(tri, SpaceKind::P1Scalar);
  const Field eta = interpolate_nodal([](const Vec2&) { return 0.5; }, s1);
  const SparseMatrix c1 = assemble_stabilization(*s1, eta);
  const Field x = interpolate_nodal([](const Vec2& p) { return p.x(); }, s1);
  // (1/eta) * integral of (x - 1/3)^2 over the reference triangle = 2 / 36.
  CHECK(x.values.dot(c1 * x.values) == doctest::Approx(2.0 / 36.0).epsilon(1e-14));

  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 4);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const SparseMatrix c = assemble_stabilization(*s, interpolate_nodal([](const Vec2& p) { return 1.0 + p.x(); }, s));
  CHECK((c * Vector::Ones(s->num_dofs())).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK(max_abs(SparseMatrix(c - SparseMatrix(c.transpose()))) == 0.0);
  for (int i = 0; i < s->num_dofs(); ++i) CHECK(c.coeff(i, i) >= 0.0);
}

TEST_CASE("momentum right-hand side") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 4);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const SpacePtr vs = make_space(m, SpaceKind::P2Vector);
  const Field phi = interpolate_nodal([](const Vec2& p) { return std::tanh((p.x() - 0.5) / 0.1); }, s);
  const Field mu1 = interpolate_nodal([](const Vec2&) { return 1.0; }, s);
  const Field mu3 = interpolate_nodal([](const Vec2&) { return 3.0; }, s);
  const Vector none;
  CHECK((assemble_rhs_K(*vs, mu3, phi, none) - 3.0 * assemble_rhs_K(*vs, mu1, phi, none)).norm() <= 1e-13);
  CHECK(assemble_rhs_K(*vs, mu3, interpolate_nodal([](const Vec2&) { return -1.0; }, s), none).norm() == 0.0);

  ForceSpec rot{ForceKind::Rotating, Vec2(0, 100), 5.0};
  CHECK(rot.at(0.05).x() == doctest::Approx(-100.0));
  CHECK(std::abs(rot.at(0.05).y()) <= 1e-12);
  CHECK(rot.at(0.0) == Vec2(0, 100));

  // Constant force density: the load sums to force times area per component.
  const Field rho = interpolate_nodal([](const Vec2&) { return 2.0; }, s);
  const Vector fc = assemble_force(*vs, ForceSpec{ForceKind::Constant, Vec2(0, -3), 0}, 0.0, rho);
  const Vector fw = assemble_force(*vs, ForceSpec{ForceKind::Constant, Vec2(0, -3), 0, true}, 0.0, rho);
  double sy = 0;
  for (int n = 0; n < vs->num_nodes(); ++n) sy += fc[vs->dof(n, 1)];
  CHECK(sy == doctest::Approx(-3.0).epsilon(1e-13));
  CHECK((fw - 2.0 * fc).norm() <= 1e-13);
}

TEST_CASE("time terms") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 4);
  const SpacePtr s = make_space(m, SpaceKind::P1Scalar);
  const SpacePtr vs = make_space(m, SpaceKind::P2Vector);
  const Field one = interpolate_nodal([](const Vec2&) { return 1.0; }, s);
  const Field rho = interpolate_nodal([](const Vec2&) { return 0.3; }, s);
  const double tau = 0.01;
  const TimeTerms tt = assemble_time_terms(*vs, rho, rho, Field(vs), tau);
  CHECK(max_abs(SparseMatrix(tt.matrix - (0.3 / tau) * assemble_lumped_mass(*vs, one))) <= 1e-13);
  CHECK(tt.rhs.norm() == 0.0);

  std::mt19937 rng(4);
  const Field r0 = random_field(s, rng, 0.001, 0.019), r1 = random_field(s, rng, 0.001, 0.019);
  const Field v = random_field(vs, rng, -1, 1);
  const TimeTerms t2 = assemble_time_terms(*vs, r0, r1, v, tau);
  const Vector lhs = t2.matrix * v.values - t2.rhs;
  const Vector rhs = (assemble_lumped_mass(*vs, r1) - assemble_lumped_mass(*vs, r0)) * v.values / (2 * tau);
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("saddle solver") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 4);
  for (Elements el : {Elements::TaylorHood, Elements::StabilizedP1P1}) {
    const Discretization disc(m, el, VelocityBc::NoSlip);
    const Field eta = interpolate_nodal([](const Vec2&) { return 1.0; }, disc.scalar);
    SaddleSystem sys;
    sys.G = assemble_viscous(*disc.velocity, eta);
    sys.B = assemble_divergence(*disc.velocity, *disc.scalar);
    if (el == Elements::StabilizedP1P1) sys.C = assemble_stabilization(*disc.scalar, eta);
    sys.mean_weights = disc.hat_integrals;
    sys.constrained = disc.velocity->constrained();
    sys.f = Vector::Zero(disc.velocity->num_dofs());

    const SaddleSolution zero = solve_saddle(sys, 1e-10);
    CHECK(zero.v.norm() == 0.0);
    CHECK(zero.p.norm() == 0.0);

    // Body force with a rotational part drives a nontrivial flow.
    const Field rho = interpolate_nodal([](const Vec2&) { return 1.0; }, disc.scalar);
    ForceSpec f{ForceKind::Constant, Vec2(0, 0), 0};
    sys.f = assemble_force(*disc.velocity, f, 0, rho);
    sys.f += assemble_rhs_K(*disc.velocity, interpolate_nodal([](const Vec2& p) { return p.y(); }, disc.scalar),
                            interpolate_nodal([](const Vec2& p) { return p.x() * p.x(); }, disc.scalar), Vector());
    const SaddleSolution mono = solve_saddle(sys, 1e-10, SaddleMethod::Monolithic);
    const SaddleSolution schur = solve_saddle(sys, 1e-10, SaddleMethod::Schur);
    CHECK(mono.v.norm() > 1e-6);
    CHECK(mono.divergence_residual <= 1e-10);
    CHECK(schur.divergence_residual <= 1e-10);
    CHECK((mono.v - schur.v).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK((mono.p - schur.p).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(std::abs(disc.hat_integrals.dot(mono.p)) <= 1e-12);
    for (int d = 0; d < disc.velocity->num_dofs(); ++d) {
      if (disc.velocity->is_constrained(d)) CHECK(mono.v[d] == 0.0);
    }
  }
}

TEST_CASE("solve_momentum") {
  const MeshPtr m = structured(Rect{0, 0, 1, 1}, 4);
  PhysParams p = ellipse_like();
  const Discretization disc(m, Elements::TaylorHood, VelocityBc::NoSlip);
  const Field phi = interpolate_nodal([](const Vec2&) { return 0.3; }, disc.scalar);
  const Field mu = interpolate_nodal([](const Vec2&) { return 0.1; }, disc.scalar);
  const Field v0(disc.velocity);
  MomentumInput in{&phi, &phi, &mu, &v0, 1e-3, 0.0};

  SUBCASE("trivial equilibrium") {
    const MomentumResult r = solve_momentum(disc, p, in);
    CHECK(r.v.values.norm() == 0.0);
    CHECK(r.p.values.norm() == 0.0);
  }
  SUBCASE("hydrostatic balance under a constant force") {
    for (bool weighted : {false, true}) {
      p.force = ForceSpec{ForceKind::Constant, Vec2(0, -1e4), 0, weighted};
      const MomentumResult r = solve_momentum(disc, p, in);
      CHECK(r.v.values.lpNorm<Eigen::Infinity>() <= 1e-8);
      CHECK(r.p.values.lpNorm<Eigen::Infinity>() > 1.0);
    }
  }
  SUBCASE("matched densities make the models coincide") {
    p.rho1 = p.rho2 = 0.01;
    p.eta1 = p.eta2 = 0.01;
    const Field phi1 = interpolate_nodal([](const Vec2& x) { return std::tanh((x.norm() - 0.4) / 0.1); }, disc.scalar);
    const Field mu1 = interpolate_nodal([](const Vec2& x) { return std::sin(3 * x.x()) * x.y(); }, disc.scalar);
    const Field vold = interpolate_nodal_vector(
        [](const Vec2& x) { return Vec2(x.y() * (1 - x.y()) * x.x() * (1 - x.x()), 0.0); }, disc.velocity);
    MomentumInput in2{&phi, &phi1, &mu1, &vold, 1e-3, 0.0};
    p.model = Model::AGG;
    const MomentumResult agg = solve_momentum(disc, p, in2);
    p.model = Model::DSS;
    const MomentumResult dss = solve_momentum(disc, p, in2);
    CHECK((agg.v.values - dss.v.values).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}
