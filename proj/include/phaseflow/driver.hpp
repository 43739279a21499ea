#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "phaseflow/config.hpp"
#include "phaseflow/output.hpp"

namespace phaseflow {

struct SimulationSummary {
  int steps = 0;
  double t_final = 0.0;
  int audit_failures = 0;  // steps whose inequality check failed
  LedgerReport ledger;
  double mass_initial = 0.0;
  double max_mass_drift = 0.0;  // over steps without mesh changes
  std::vector<EnergyRow> rows;
  std::vector<std::string> files;  // written files, in order
  State final_state;
};

// Runs the configured scenario. With write_files, the dumped config, energy.csv and VTK
// snapshots go to c.output.directory (created if missing); VTK files are written on a
// background thread.
SimulationSummary simulate(const Config& c, bool write_files = true, std::ostream* log = nullptr);

struct EocRow {
  int level = 0;
  double h = 0.0;
  double error = 0.0;  // L2 distance of phi to the reference at t_end
  double ratio = 0.0;  // previous error / this error; 0 for the first row
  int steps = 0;
  double seconds = 0.0;
};

struct EocResult {
  int reference_level = 0;
  double t_end = 0.0;
  int reference_steps = 0;
  double reference_seconds = 0.0;
  std::vector<EocRow> rows;
};

// Uniform runs (adaptivity off) at each level and at reference_level, compared at c.t_end.
// Levels must be increasing and below reference_level.
EocResult run_eoc(const Config& c, const std::vector<int>& levels, int reference_level, std::ostream* log = nullptr);

void print_eoc_table(const EocResult& r, std::ostream& out);

}  // namespace phaseflow
