#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phaseflow/energy.hpp"
#include "phaseflow/mesh.hpp"
#include "phaseflow/state.hpp"

namespace phaseflow {

enum class Convection { FV, FE };

std::string to_string(Convection c);

struct SplitTolerances {
  double eps_v = 1e-6;
  double eps_phi = 1e-6;
  int max_inner_iterations = 50;

  void validate() const;
};

struct TimestepConfig {
  double safety = 0.9;
  double v_min = 10.0;
  double v_max = 1e5;
  double fixed_tau = 0.0;  // > 0 replaces the adaptive rule

  void validate() const;
};

struct AdaptivityConfig {
  bool enabled = false;
  double c_ref_phi = 0.1;
  double c_coarse_phi = 0.2;
  double c_ref_v = 0.1;
  double c_coarse_v = 0.5;
  int min_level = 0;
  int max_level = 0;

  void validate() const;
};

// max over elements of max(|grad mu|_K, |v|_K), the speed taken at the barycenter.
double timestep_estimator(const State& s);

// safety * h / clamp(estimator, v_min, v_max)
double timestep_from_estimator(double h, double estimator, const TimestepConfig& cfg);

double compute_timestep(const State& s, double h, const TimestepConfig& cfg);

// Marks against the thresholds m + c (M - m) of one indicator (strict comparisons).
RefineMarks mark_indicator(const std::vector<double>& g, double c_ref, double c_coarse);

// Merged marks from |grad phi|, |grad v1| and |grad v2|; refinement wins. Triangles at
// max_level are not refined, those at min_level are not coarsened.
RefineMarks mark_elements(const State& s, const AdaptivityConfig& cfg);

struct StepOptions {
  SplitTolerances tols;
  Convection convection = Convection::FV;
  int fv_order = 2;
  double fe_tolerance = 1e-11;  // inner-loop tolerance used in FE mode
  ChOptions ch;
  double saddle_tol = 1e-10;
  SaddleMethod saddle = SaddleMethod::Monolithic;
};

struct StepReport {
  int inner_iterations = 0;
  int newton_iterations = 0;
  double dv = 0.0;    // last velocity increment (sup norm)
  double dphi = 0.0;  // last phase-field increment (sup norm)
  double divergence_residual = 0.0;
  double momentum_residual = 0.0;
};

struct StepResult {
  State state;
  StepReport report;
};

// One time step of the splitting iteration. In FV mode the Cahn-Hilliard step transports
// phi^k with the current velocity iterate and then solves the diffusive part; in FE mode
// it solves the convective Cahn-Hilliard system directly. Throws StepRejected when the
// inner loop does not converge.
StepResult splitting_step(const State& s, double tau, const PhysParams& params, const StepOptions& opt);

// Moves all fields of s onto ctx by nodal interpolation; velocity constraints are reapplied.
State transfer_state(const State& s, ContextPtr ctx);

struct RunOptions {
  Rect domain{-1.0, -1.0, 1.0, 1.0};
  int level = 6;
  AdaptivityConfig adapt;
  PhysParams params;
  StepOptions step;
  TimestepConfig timestep;
  double t_end = 0.0;
  int max_steps = -1;  // negative: unlimited
  int max_rejections = 5;
  double audit_tol = 1e-8;
  std::function<double(const Vec2&)> initial_phi;
};

struct StepRecord {
  int step = 0;
  double t = 0.0;
  double tau = 0.0;
  int rejections = 0;
  StepReport report;
  EnergyBreakdown energy;
  InequalityReport audit;
  bool new_segment = false;  // the mesh changed before this step
  double mass_phi = 0.0;
  double min_phi = 0.0;
  double max_phi = 0.0;
  int dofs = 0;
  bool adapted = false;  // the mesh changed after this step
  double transfer_mass_drift = 0.0;
};

// Called with the initial state (record == nullptr) and after every accepted step with the
// state that starts the next step.
using StepObserver = std::function<void(const State&, const StepRecord*)>;

struct RunResult {
  State final_state;
  std::vector<StepRecord> records;
};

// Structured mesh plus, with adaptivity enabled, repeated marking and refinement against
// the initial profile.
State initial_state(const RunOptions& opt);

RunResult run(const RunOptions& opt, const StepObserver& observer = {});

std::vector<LedgerStep> ledger_steps(const std::vector<StepRecord>& records);

int total_dofs(const MeshContext& ctx);

}  // namespace phaseflow
