#include "phaseflow/output.hpp"

#include <charconv>
#include <fstream>

#include "phaseflow/error.hpp"

namespace phaseflow {

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

void close_output(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace

void write_vtk(const State& s, std::ostream& out, bool quadratic) {
  const Mesh& mesh = s.mesh();
  const FeSpace& vel = s.v.fe();
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();
  const int np = quadratic ? nv + mesh.num_edges() : nv;

  auto scalar_at = [&](const Field& f, int point) {
    if (point < nv) return f.values[point];
    const Edge& e = mesh.edge(point - nv);
    return 0.5 * (f.values[e.v[0]] + f.values[e.v[1]]);
  };
  auto velocity_at = [&](int point, int c) {
    if (point < nv) return s.v.values[vel.dof(point, c)];
    if (vel.order() == 2) return s.v.values[vel.dof(point, c)];
    const Edge& e = mesh.edge(point - nv);
    return 0.5 * (s.v.values[vel.dof(e.v[0], c)] + s.v.values[vel.dof(e.v[1], c)]);
  };
  auto point_at = [&](int point) {
    if (point < nv) return mesh.vertex(point);
    const Edge& e = mesh.edge(point - nv);
    return Vec2(midpoint(mesh.vertex(e.v[0]), mesh.vertex(e.v[1])));
  };

  out << "# vtk DataFile Version 3.0\n";
  out << "phaseflow t=" << format_number(s.t) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << np << " double\n";
  for (int i = 0; i < np; ++i) {
    const Vec2 x = point_at(i);
    out << format_number(x.x()) << ' ' << format_number(x.y()) << " 0\n";
  }
  const int per = quadratic ? 6 : 3;
  out << "CELLS " << nt << ' ' << nt * (per + 1) << '\n';
  for (int t = 0; t < nt; ++t) {
    const auto& v = mesh.triangle(t).v;
    out << per << ' ' << v[0] << ' ' << v[1] << ' ' << v[2];
    if (quadratic) {
      out << ' ' << nv + mesh.triangle_edge(t, 2) << ' ' << nv + mesh.triangle_edge(t, 0) << ' '
          << nv + mesh.triangle_edge(t, 1);
    }
    out << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) out << (quadratic ? 22 : 5) << '\n';

  out << "POINT_DATA " << np << '\n';
  const std::pair<const char*, const Field*> scalars[] = {{"phi", &s.phi}, {"mu", &s.mu}, {"p", &s.p}};
  for (const auto& [name, field] : scalars) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < np; ++i) out << format_number(field->size() ? scalar_at(*field, i) : 0.0) << '\n';
  }
  out << "VECTORS velocity double\n";
  for (int i = 0; i < np; ++i) {
    out << format_number(velocity_at(i, 0)) << ' ' << format_number(velocity_at(i, 1)) << " 0\n";
  }
}

void write_vtk(const State& s, const std::string& path, bool quadratic) {
  std::ofstream out = open_output(path);
  write_vtk(s, out, quadratic);
  close_output(out, path);
}

EnergyRow energy_row(const StepRecord& rec) {
  EnergyRow r;
  const EnergyBreakdown& e = rec.audit.step;
  r.t = rec.t;
  r.tau = rec.tau;
  r.E_kin = e.E_kin;
  r.E_int = e.E_int;
  r.E_total = e.E_total;
  r.D_visc = e.D_visc;
  r.D_mob = e.D_mob;
  r.W_ext = e.W_ext;
  r.ineq_lhs = rec.audit.lhs;
  r.ineq_rhs = rec.audit.rhs;
  r.ineq_residual = rec.audit.residual;
  r.mass_phi = rec.mass_phi;
  r.min_phi = rec.min_phi;
  r.max_phi = rec.max_phi;
  r.dofs = rec.dofs;
  return r;
}

const char* const kEnergyCsvHeader =
    "t,tau,E_kin,E_int,E_total,D_visc,D_mob,W_ext,ineq_lhs,ineq_rhs,ineq_residual,mass_phi,min_phi,max_phi,dofs";

void write_energy_csv(const std::vector<EnergyRow>& rows, std::ostream& out) {
  out << kEnergyCsvHeader << '\n';
  for (const EnergyRow& r : rows) {
    for (double x : {r.t, r.tau, r.E_kin, r.E_int, r.E_total, r.D_visc, r.D_mob, r.W_ext, r.ineq_lhs, r.ineq_rhs,
                     r.ineq_residual, r.mass_phi, r.min_phi, r.max_phi}) {
      out << format_number(x) << ',';
    }
    out << r.dofs << '\n';
  }
}

void write_energy_csv(const std::vector<EnergyRow>& rows, const std::string& path) {
  std::ofstream out = open_output(path);
  write_energy_csv(rows, out);
  close_output(out, path);
}

AsyncWriter::AsyncWriter() : worker_([this] { loop(); }) {}

AsyncWriter::~AsyncWriter() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void AsyncWriter::rethrow() {
  if (error_) {
    std::exception_ptr e = error_;
    error_ = nullptr;
    std::rethrow_exception(e);
  }
}

void AsyncWriter::submit(std::function<void()> job) {
  {
    std::lock_guard lock(mutex_);
    rethrow();
    jobs_.push_back(std::move(job));
  }
  cv_.notify_one();
}

void AsyncWriter::finish() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [this] { return jobs_.empty() && !busy_; });
  rethrow();
}

void AsyncWriter::loop() {
  std::unique_lock lock(mutex_);
  for (;;) {
    cv_.wait(lock, [this] { return stop_ || !jobs_.empty(); });
    if (jobs_.empty()) return;
    std::function<void()> job = std::move(jobs_.front());
    jobs_.pop_front();
    busy_ = true;
    lock.unlock();
    std::exception_ptr failure;
    try {
      job();
    } catch (...) {
      failure = std::current_exception();
    }
    lock.lock();
    busy_ = false;
    if (failure && !error_) error_ = failure;
    if (jobs_.empty()) idle_.notify_all();
  }
}

}  // namespace phaseflow
