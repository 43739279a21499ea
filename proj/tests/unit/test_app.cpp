#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "phaseflow/cli.hpp"
#include "phaseflow/config.hpp"
#include "phaseflow/driver.hpp"
#include "phaseflow/error.hpp"
#include "phaseflow/output.hpp"
#include "phaseflow/scenarios.hpp"

using namespace phaseflow;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("phaseflow_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int cli(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
  std::vector<const char*> argv{"phaseflow"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

// Minimal legacy VTK reader, written against the file format rather than the writer.
struct VtkFile {
  std::vector<std::array<double, 3>> points;
  std::vector<std::vector<int>> cells;
  std::vector<int> types;
  std::map<std::string, std::vector<double>> scalars;
  std::vector<std::array<double, 3>> vectors;
};

VtkFile parse_vtk(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "# vtk DataFile Version 3.0");
  std::getline(in, line);
  std::getline(in, line);
  REQUIRE(line == "ASCII");
  std::getline(in, line);
  REQUIRE(line == "DATASET UNSTRUCTURED_GRID");
  VtkFile f;
  std::string word;
  int n = 0;
  while (in >> word) {
    if (word == "POINTS") {
      in >> n >> word;
      f.points.resize(n);
      for (auto& p : f.points) in >> p[0] >> p[1] >> p[2];
    } else if (word == "CELLS") {
      int total = 0;
      in >> n >> total;
      int read = 0;
      for (int i = 0; i < n; ++i) {
        int k = 0;
        in >> k;
        std::vector<int> c(k);
        for (int& v : c) in >> v;
        read += k + 1;
        f.cells.push_back(c);
      }
      CHECK(read == total);
    } else if (word == "CELL_TYPES") {
      in >> n;
      f.types.resize(n);
      for (int& t : f.types) in >> t;
    } else if (word == "POINT_DATA") {
      in >> n;
    } else if (word == "SCALARS") {
      std::string name, type, table, def;
      int comps = 0;
      in >> name >> type >> comps >> table >> def;
      REQUIRE(table == "LOOKUP_TABLE");
      std::vector<double> values(f.points.size());
      for (double& v : values) in >> v;
      f.scalars[name] = values;
    } else if (word == "VECTORS") {
      in >> word >> word;
      f.vectors.resize(f.points.size());
      for (auto& v : f.vectors) in >> v[0] >> v[1] >> v[2];
    } else {
      FAIL("unexpected token " << word);
    }
    REQUIRE(in);
  }
  return f;
}

State two_triangle_state(Elements elements) {
  std::vector<Vec2> verts{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  std::vector<Triangle> tris(2);
  tris[0].v = {2, 0, 1};
  tris[1].v = {0, 2, 3};
  auto mesh = std::make_shared<const Mesh>(Rect{0, 0, 1, 1}, 0, verts, tris);
  ContextPtr ctx = make_context(mesh, elements, VelocityBc::NoSlip);
  Field phi(ctx->disc.scalar);
  phi.values.setOnes();
  return make_state(ctx, phi, DoubleWell{1.0, 0.1}, 0.25);
}

}  // namespace

TEST_CASE("config: a scenario line alone reproduces the preset") {
  const Config c = parse_config_string("scenario.name = ellipse\n");
  CHECK(dump_config(c) == dump_config(preset("ellipse")));
  CHECK(c.params.mobility == 0.5);
  CHECK(c.params.delta == 0.1);
  CHECK(c.level == 6);

  const Config d = parse_config_string("# nothing\n\n");
  CHECK(dump_config(d) == dump_config(default_config()));
  CHECK(d.params.delta == 0.05);
  CHECK(d.params.mobility == 0.005);
  CHECK(d.params.sigma == 1.0);
}

TEST_CASE("config: overrides and base scenario") {
  const Config c = parse_config_string("physics.mobility = 0.25  # comment\ndomain.level=4\n", "rayleigh-taylor");
  CHECK(c.scenario == "rayleigh-taylor");
  CHECK(c.params.mobility == 0.25);
  CHECK(c.level == 4);
  CHECK(c.params.sigma == 0.1);
  // level was defaulted in the preset but is now set explicitly
  CHECK(std::find(c.defaulted.begin(), c.defaulted.end(), "domain.level") == c.defaulted.end());
  CHECK(std::find(c.defaulted.begin(), c.defaulted.end(), "physics.bc") != c.defaulted.end());
}

TEST_CASE("config: errors name the line and key") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config_string(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("physics.delta = 0.1\nphysics.bogus = 1\n") == 2);
  CHECK(line_of("\n\nno equals sign\n") == 3);
  CHECK(line_of("delta = 1\n") == 1);
  CHECK(line_of("physics.delta = 0.1\nphysics.delta = 0.2\n") == 2);
  CHECK(line_of("physics.delta = abc\n") == 1);
  CHECK(line_of("domain.level = 4.5\n") == 1);
  CHECK(line_of("physics.model = xyz\n") == 1);

  try {
    parse_config_string("physics.delta = -1\n");
    FAIL("negative delta accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("physics.delta") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_string("domain.level = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("physics.rho1 = 0\n"), ConfigError);
  CHECK_THROWS_AS(preset("no-such-scenario"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/phaseflow.cfg"), ConfigError);
}

TEST_CASE("config: dump and parse round trip") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const Config c = preset(name);
    const std::string text = dump_config(c);
    const Config back = parse_config_string(text);
    CHECK(dump_config(back) == text);
    for (const std::string& key : config_keys()) CHECK(get_config_value(back, key) == get_config_value(c, key));
    CHECK(back.defaulted == c.defaulted);
  }

  Config c = preset("ellipse");
  set_config_value(c, "physics.mobility", "0.1");
  set_config_value(c, "solver.t_end", "0.30000000000000004");
  const Config back = parse_config_string(dump_config(c));
  CHECK(back.params.mobility == 0.1);
  CHECK(back.t_end == 0.30000000000000004);
  CHECK_THROWS_AS(set_config_value(c, "nope.key", "1"), ConfigError);
}

TEST_CASE("presets") {
  const Config e = preset("ellipse");
  CHECK(e.params.mobility == 0.5);
  CHECK(e.params.rho1 == 0.001);
  CHECK(e.params.rho2 == 0.019);
  CHECK(e.params.force.kind == ForceKind::None);

  const Config r = preset("rising-droplet");
  CHECK(r.params.force.kind == ForceKind::Constant);
  CHECK(r.params.force.vector == Vec2(0.0, -1e4));
  CHECK(r.params.force.weighted);
  CHECK((r.params.rho1 - r.params.rho2) / (r.params.rho1 + r.params.rho2) == doctest::Approx(0.5));
  CHECK(preset("rising-droplet-r025").interface.radius_x == 0.25);

  const Config rt = preset("rayleigh-taylor");
  CHECK(rt.params.sigma == 0.1);
  CHECK((rt.params.rho1 - rt.params.rho2) / (rt.params.rho1 + rt.params.rho2) == doctest::Approx(0.25));

  const Config a = preset("rotating-annulus");
  CHECK(a.params.force.kind == ForceKind::Rotating);
  CHECK(a.params.elements == Elements::StabilizedP1P1);

  for (const std::string& name : preset_names()) {
    const Config c = preset(name);
    for (const std::string& key : c.defaulted) {
      CAPTURE(key);
      CHECK(std::find(config_keys().begin(), config_keys().end(), key) != config_keys().end());
    }
  }
}

TEST_CASE("ellipse distance against dense boundary sampling") {
  const double a = 0.87, b = 0.29;
  const Vec2 c(0.1, -0.2);
  const int samples = 400000;
  std::vector<Vec2> boundary(samples);
  for (int i = 0; i < samples; ++i) {
    const double th = 2.0 * std::numbers::pi * i / samples;
    boundary[i] = c + Vec2(a * std::cos(th), b * std::sin(th));
  }
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int k = 0; k < 200; ++k) {
    const Vec2 p(u(rng), u(rng));
    double best = 1e300;
    for (const Vec2& q : boundary) best = std::min(best, (p - q).norm());
    const Vec2 r = p - c;
    const bool inside = (r.x() / a) * (r.x() / a) + (r.y() / b) * (r.y() / b) < 1.0;
    CAPTURE(p);
    CHECK(std::abs(ellipse_signed_distance(p, c, a, b) - (inside ? best : -best)) < 1e-6);
  }
  CHECK(ellipse_signed_distance(c, c, a, b) == doctest::Approx(b));
  CHECK(ellipse_signed_distance(c + Vec2(a, 0), c, a, b) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("interface shapes") {
  const Rect dom{-1, -1, 1, 1};
  InterfaceSpec s;
  s.shape = Shape::Annulus;
  s.radius_inner = 0.3;
  s.radius_outer = 0.5;
  CHECK(interface_signed_distance(s, dom, Vec2(0.4, 0.0)) == doctest::Approx(0.1));
  CHECK(interface_signed_distance(s, dom, Vec2(0.0, 0.0)) == doctest::Approx(-0.3));
  CHECK(interface_signed_distance(s, dom, Vec2(0.0, -0.8)) == doctest::Approx(-0.3));

  s.shape = Shape::Cosine;
  s.height = 0.2;
  s.amplitude = 0.1;
  s.waves = 1.0;
  CHECK(interface_signed_distance(s, dom, Vec2(-1.0, 0.0)) == doctest::Approx(0.3));
  CHECK(interface_signed_distance(s, dom, Vec2(0.0, 0.0)) == doctest::Approx(0.1));

  const auto f = initial_profile(s, dom, 0.05);
  CHECK(f(Vec2(0.0, 0.1)) == doctest::Approx(0.0).scale(1.0));
  CHECK(f(Vec2(0.0, -0.9)) == doctest::Approx(1.0));
  CHECK(f(Vec2(0.0, 0.9)) == doctest::Approx(-1.0));
}

TEST_CASE("vtk output") {
  for (bool quadratic : {false, true}) {
    CAPTURE(quadratic);
    const State s = two_triangle_state(Elements::TaylorHood);
    std::ostringstream out;
    write_vtk(s, out, quadratic);
    const VtkFile f = parse_vtk(out.str());
    const size_t np = quadratic ? 4 + 5 : 4;
    CHECK(f.points.size() == np);
    REQUIRE(f.cells.size() == 2);
    CHECK(f.types == std::vector<int>(2, quadratic ? 22 : 5));
    CHECK(f.cells[0].size() == (quadratic ? 6u : 3u));
    CHECK(f.cells[0][0] == 2);
    CHECK(f.cells[0][1] == 0);
    CHECK(f.cells[0][2] == 1);
    CHECK(f.cells[1][0] == 0);
    CHECK(f.cells[1][1] == 2);
    CHECK(f.cells[1][2] == 3);
    for (const auto& cell : f.cells) {
      for (int v : cell) CHECK(v < static_cast<int>(np));
      if (quadratic) {
        // corner-corner-corner-mid(01)-mid(12)-mid(20)
        for (int k = 0; k < 3; ++k) {
          const auto& p = f.points[cell[0 + k]];
          const auto& q = f.points[cell[(k + 1) % 3]];
          const auto& m = f.points[cell[3 + k]];
          CHECK(m[0] == doctest::Approx(0.5 * (p[0] + q[0])));
          CHECK(m[1] == doctest::Approx(0.5 * (p[1] + q[1])));
        }
      }
    }
    for (const auto& p : f.points) CHECK(p[2] == 0.0);
    REQUIRE(f.scalars.count("phi"));
    REQUIRE(f.scalars.count("mu"));
    REQUIRE(f.scalars.count("p"));
    for (double v : f.scalars.at("phi")) CHECK(v == 1.0);
    CHECK(f.vectors.size() == np);

    std::ostringstream again;
    write_vtk(s, again, quadratic);
    CHECK(again.str() == out.str());
  }
}

TEST_CASE("number formatting round trips") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(u(rng), static_cast<int>(rng() % 200) - 100);
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("energy csv") {
  std::ostringstream out;
  write_energy_csv({}, out);
  CHECK(out.str() == std::string(kEnergyCsvHeader) + "\n");

  EnergyRow r;
  r.t = 0.5;
  r.dofs = 12;
  std::ostringstream one;
  write_energy_csv({r}, one);
  std::istringstream in(one.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(row.rfind("0.5,", 0) == 0);
  CHECK(row.substr(row.size() - 3) == ",12");
}

TEST_CASE("async writer runs jobs in order and reports failures") {
  std::vector<int> seen;
  {
    AsyncWriter w;
    for (int i = 0; i < 50; ++i) w.submit([&seen, i] { seen.push_back(i); });
    w.finish();
  }
  REQUIRE(seen.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(seen[i] == i);

  AsyncWriter w;
  w.submit([] { throw Error("disk full"); });
  CHECK_THROWS_AS(w.finish(), Error);
  w.submit([] {});
  CHECK_NOTHROW(w.finish());
}

TEST_CASE("simulate writes config, snapshots and energy table") {
  const auto dir = scratch_dir("simulate");
  Config c = preset("ellipse");
  c.level = 4;
  c.max_steps = 3;
  c.output.directory = dir.string();
  c.output.snapshot_every = 2;
  const SimulationSummary s = simulate(c);
  CHECK(s.steps == 3);
  CHECK(s.audit_failures == 0);
  CHECK(s.ledger.pass);
  CHECK(s.max_mass_drift < 1e-10 * 4.0);
  CHECK(std::filesystem::exists(dir / "config.txt"));
  CHECK(std::filesystem::exists(dir / "energy.csv"));
  CHECK(std::filesystem::exists(dir / "snapshot_000000.vtk"));
  CHECK(std::filesystem::exists(dir / "snapshot_000002.vtk"));
  CHECK(std::filesystem::exists(dir / "snapshot_000003.vtk"));
  CHECK(load_config((dir / "config.txt").string()).max_steps == 3);

  std::ifstream csv(dir / "energy.csv");
  int lines = 0;
  for (std::string l; std::getline(csv, l);) ++lines;
  CHECK(lines == 4);

  std::ifstream vtk(dir / "snapshot_000003.vtk");
  std::stringstream buf;
  buf << vtk.rdbuf();
  const VtkFile f = parse_vtk(buf.str());
  CHECK(f.points.size() == static_cast<size_t>(s.final_state.mesh().num_vertices()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("command line") {
  std::string out, err;
  CHECK(cli({"run", "--bogus"}, &out, &err) == 1);
  CHECK(err.find("error:") != std::string::npos);
  CHECK(cli({}, &out, &err) == 1);
  CHECK(cli({"run"}, &out, &err) == 1);
  CHECK(err.find("--scenario") != std::string::npos);
  CHECK(cli({"run", "--scenario", "nope"}, &out, &err) == 1);
  CHECK(cli({"run", "--scenario", "ellipse", "--level", "5"}, &out, &err) == 1);
  CHECK(cli({"run", "--scenario", "ellipse", "--model", "xyz"}, &out, &err) == 1);
  CHECK(cli({"--help"}, &out, &err) == 0);
  CHECK(out.find("run") != std::string::npos);

  CHECK(cli({"run", "--scenario", "rayleigh-taylor", "--set", "physics.sigma=0.5", "--level", "4", "--dump-config"},
            &out, &err) == 0);
  const Config c = parse_config_string(out);
  CHECK(c.params.sigma == 0.5);
  CHECK(c.level == 4);
  CHECK(c.scenario == "rayleigh-taylor");

  const auto dir = scratch_dir("cli");
  const std::string cfg = (dir / "run.cfg").string();
  std::ofstream(cfg) << "scenario.name = ellipse\ndomain.level = 4\nsolver.max_steps = 2\n";
  CHECK(cli({"run", cfg, "--out", (dir / "out").string(), "--audit", "strict", "--quiet"}, &out, &err) == 0);
  CHECK(out.find("2 steps") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "out" / "energy.csv"));
  std::filesystem::remove_all(dir);
}
