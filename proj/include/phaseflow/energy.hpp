#pragma once

#include <vector>

#include "phaseflow/physics.hpp"
#include "phaseflow/state.hpp"

namespace phaseflow {

struct EnergyBreakdown {
  double E_kin = 0.0;    // 1/2 integral rho I|v|^2, lumped on the velocity nodal mesh
  double E_int = 0.0;    // sigma integral(delta/2 |grad phi|^2 + I_h F(phi) / delta)
  double E_total = 0.0;
  double D_visc = 0.0;   // integral 2 eta |Dv|^2
  double D_mob = 0.0;    // integral M |grad mu|^2
  double W_ext = 0.0;    // integral k(t) . v
  double num_kin = 0.0;  // 1/2 integral rho_old I|v_new - v_old|^2
  double num_phi = 0.0;  // sigma delta / 2 integral |grad(phi_new - phi_old)|^2
};

// Energies of a single state. D_visc and D_mob use the state's own phi; the step terms
// (W_ext and the numerical dissipation) are zero.
EnergyBreakdown total_energy(const State& s, const PhysParams& params);

double kinetic_energy(const FeSpace& velocity, const Field& rho, const Field& v);

struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;   // lhs - rhs
  double threshold = 0.0;  // tol (1 + |rhs| + E_total(old) / tau)
  bool pass = false;
  double tau = 0.0;
  double E_old = 0.0;
  double E_new = 0.0;
  EnergyBreakdown step;  // energies of the new state plus the dissipation and work of the step
};

// Discrete energy inequality of one step on a fixed mesh:
//   (E_new - E_old + num_kin + num_phi) / tau + D_mob + D_visc <= W_ext
// with viscosity and force density taken from the old state and the force at old.t.
InequalityReport step_inequality_check(const State& old_state, const State& new_state, double tau,
                                       const PhysParams& params, double tol);

struct LedgerStep {
  InequalityReport report;
  bool new_segment = false;  // the mesh changed before this step
};

struct LedgerReport {
  bool pass = true;
  double worst_excess = 0.0;  // largest violation beyond the accumulated tolerance (<= 0 on pass)
  int worst_from = -1;
  int worst_to = -1;
  int checked_steps = 0;
};

// Cumulative check over every pair l < k within a fixed-mesh segment:
//   E(t_k) + sum_{m=l}^{k-1} (num_m + tau_m D_m) <= E(t_l) + sum_{m=l}^{k-1} tau_m W_m
// up to the summed per-step thresholds (times tau).
LedgerReport global_energy_ledger(const std::vector<LedgerStep>& steps);

}  // namespace phaseflow
