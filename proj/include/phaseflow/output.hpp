#pragma once

#include <condition_variable>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "phaseflow/coupling.hpp"

namespace phaseflow {

// Shortest text that is not locale dependent: 17 significant digits.
std::string format_number(double x);

// Legacy VTK ASCII unstructured grid with point data phi, mu, p and velocity. The linear form
// uses mesh vertices and triangles (type 5); the quadratic form adds edge midpoints and writes
// six-node triangles (type 22) with the scalars interpolated linearly to the midpoints.
void write_vtk(const State& s, std::ostream& out, bool quadratic = false);
void write_vtk(const State& s, const std::string& path, bool quadratic = false);

// One energy/diagnostics row per accepted step.
struct EnergyRow {
  double t = 0.0;
  double tau = 0.0;
  double E_kin = 0.0;
  double E_int = 0.0;
  double E_total = 0.0;
  double D_visc = 0.0;
  double D_mob = 0.0;
  double W_ext = 0.0;
  double ineq_lhs = 0.0;
  double ineq_rhs = 0.0;
  double ineq_residual = 0.0;
  double mass_phi = 0.0;
  double min_phi = 0.0;
  double max_phi = 0.0;
  int dofs = 0;
};

EnergyRow energy_row(const StepRecord& rec);

extern const char* const kEnergyCsvHeader;

void write_energy_csv(const std::vector<EnergyRow>& rows, std::ostream& out);
void write_energy_csv(const std::vector<EnergyRow>& rows, const std::string& path);

// Runs file jobs on one background thread in submission order. The first exception raised by
// a job is rethrown from finish() (or from the next submit()).
class AsyncWriter {
 public:
  AsyncWriter();
  ~AsyncWriter();
  AsyncWriter(const AsyncWriter&) = delete;
  AsyncWriter& operator=(const AsyncWriter&) = delete;

  void submit(std::function<void()> job);
  // Waits for all queued jobs.
  void finish();

 private:
  void loop();
  void rethrow();

  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable idle_;
  std::deque<std::function<void()>> jobs_;
  bool busy_ = false;
  bool stop_ = false;
  std::exception_ptr error_;
  std::thread worker_;
};

}  // namespace phaseflow
