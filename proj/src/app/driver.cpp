#include "phaseflow/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>

#include "phaseflow/error.hpp"

namespace phaseflow {

namespace {

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snapshot_%06d.vtk", step);
  return buf;
}

}  // namespace

SimulationSummary simulate(const Config& c, bool write_files, std::ostream* log) {
  const RunOptions opt = to_run_options(c);
  const std::filesystem::path dir(c.output.directory);
  SimulationSummary sum;
  std::unique_ptr<AsyncWriter> writer;
  if (write_files) {
    std::filesystem::create_directories(dir);
    const std::string cfg = (dir / "config.txt").string();
    std::ofstream out(cfg, std::ios::binary);
    out << dump_config(c);
    if (!out) throw Error("cannot write '" + cfg + "'");
    sum.files.push_back(cfg);
    if (c.output.vtk) writer = std::make_unique<AsyncWriter>();
  }

  auto snapshot = [&](const State& s, int step) {
    if (!writer) return;
    const std::string path = (dir / snapshot_name(step)).string();
    sum.files.push_back(path);
    writer->submit([snap = s, path, quadratic = c.output.vtk_quadratic] { write_vtk(snap, path, quadratic); });
  };

  double segment_mass = 0.0;
  int last_written = -1;
  const RunResult result = run(opt, [&](const State& s, const StepRecord* rec) {
    if (!rec) {
      sum.mass_initial = segment_mass = s.mass_phi;
      snapshot(s, 0);
      last_written = 0;
      return;
    }
    sum.max_mass_drift = std::max(sum.max_mass_drift, std::abs(rec->mass_phi - segment_mass));
    if (rec->adapted) segment_mass = s.mass_phi;
    if (!rec->audit.pass) ++sum.audit_failures;
    sum.rows.push_back(energy_row(*rec));
    if (c.output.snapshot_every > 0 && rec->step % c.output.snapshot_every == 0) {
      snapshot(s, rec->step);
      last_written = rec->step;
    }
    if (log && !rec->audit.pass && c.convection == Convection::FE) {
      *log << "step " << rec->step << " t=" << format_number(rec->t)
           << ": energy inequality violated (residual " << format_number(rec->audit.residual) << " > "
           << format_number(rec->audit.threshold) << ")\n";
    }
  });
  sum.steps = static_cast<int>(result.records.size());
  sum.t_final = result.final_state.t;
  sum.ledger = global_energy_ledger(ledger_steps(result.records));
  if (sum.steps != last_written) snapshot(result.final_state, sum.steps);
  sum.final_state = result.final_state;

  if (write_files) {
    const std::string csv = (dir / "energy.csv").string();
    write_energy_csv(sum.rows, csv);
    sum.files.push_back(csv);
  }
  if (writer) writer->finish();
  return sum;
}

EocResult run_eoc(const Config& c, const std::vector<int>& levels, int reference_level, std::ostream* log) {
  if (levels.empty()) throw ParameterError("no levels given");
  for (size_t i = 0; i < levels.size(); ++i) {
    if (i > 0 && levels[i] <= levels[i - 1]) throw ParameterError("levels must be increasing");
    if (levels[i] >= reference_level) throw ParameterError("levels must lie below the reference level");
  }
  using Clock = std::chrono::steady_clock;
  auto solve = [&](int level, int& steps, double& seconds) {
    Config cl = c;
    cl.level = level;
    cl.adapt.enabled = false;
    const auto t0 = Clock::now();
    RunResult r = run(to_run_options(cl));
    seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    steps = static_cast<int>(r.records.size());
    if (log) {
      *log << "level " << level << ": " << steps << " steps, " << std::fixed << std::setprecision(1) << seconds
           << " s" << std::defaultfloat << std::endl;
    }
    return std::move(r.final_state);
  };

  EocResult out;
  out.reference_level = reference_level;
  out.t_end = c.t_end;
  std::vector<State> coarse;
  for (int level : levels) {
    EocRow row;
    row.level = level;
    row.h = c.domain.width() * std::pow(2.0, -0.5 * level);
    coarse.push_back(solve(level, row.steps, row.seconds));
    out.rows.push_back(row);
  }
  const State ref = solve(reference_level, out.reference_steps, out.reference_seconds);
  for (size_t i = 0; i < out.rows.size(); ++i) {
    out.rows[i].error = l2_distance(coarse[i].phi, ref.phi);
    if (i > 0) out.rows[i].ratio = out.rows[i - 1].error / out.rows[i].error;
  }
  return out;
}

void print_eoc_table(const EocResult& r, std::ostream& out) {
  out << "L2 error of phi against level " << r.reference_level << " at T=" << format_number(r.t_end) << '\n';
  out << "Level\th\terror\tratio\n";
  char buf[128];
  for (const EocRow& row : r.rows) {
    if (row.ratio > 0.0) {
      std::snprintf(buf, sizeof(buf), "%d\t%g\t%.5e\t%.2f\n", row.level, row.h, row.error, row.ratio);
    } else {
      std::snprintf(buf, sizeof(buf), "%d\t%g\t%.5e\t-\n", row.level, row.h, row.error);
    }
    out << buf;
  }
}

}  // namespace phaseflow
