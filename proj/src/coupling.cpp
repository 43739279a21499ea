#include "phaseflow/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <limits>

#include "phaseflow/error.hpp"

namespace phaseflow {

std::string to_string(Convection c) { return c == Convection::FV ? "fv" : "fe"; }

void SplitTolerances::validate() const {
  if (!(eps_v > 0.0)) throw ParameterError("eps_v must be > 0");
  if (!(eps_phi > 0.0)) throw ParameterError("eps_phi must be > 0");
  if (max_inner_iterations < 1) throw ParameterError("max_inner_iterations must be >= 1");
}

void TimestepConfig::validate() const {
  if (!(safety > 0.0)) throw ParameterError("safety must be > 0");
  if (!(v_min > 0.0) || !(v_min < v_max)) throw ParameterError("v_min must satisfy 0 < v_min < v_max");
  if (fixed_tau < 0.0) throw ParameterError("fixed_tau must be >= 0");
}

void AdaptivityConfig::validate() const {
  for (double c : {c_ref_phi, c_coarse_phi, c_ref_v, c_coarse_v}) {
    if (!(c > 0.0 && c < 1.0)) throw ParameterError("adaptivity constants must lie in (0, 1)");
  }
  if (enabled && min_level > max_level) throw ParameterError("min_level must be <= max_level");
}

double timestep_estimator(const State& s) {
  const Mesh& mesh = s.mesh();
  const std::vector<double> gmu = element_gradient_magnitudes(s.mu);
  const Lambda center{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double est = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    est = std::max({est, gmu[t], s.v.vector_value(t, center).norm()});
  }
  return est;
}

double timestep_from_estimator(double h, double estimator, const TimestepConfig& cfg) {
  const double speed = std::max(std::min(estimator, cfg.v_max), cfg.v_min);
  return cfg.safety * h / speed;
}

double compute_timestep(const State& s, double h, const TimestepConfig& cfg) {
  if (!(h > 0.0)) throw ParameterError("mesh size must be > 0");
  return timestep_from_estimator(h, timestep_estimator(s), cfg);
}

RefineMarks mark_indicator(const std::vector<double>& g, double c_ref, double c_coarse) {
  RefineMarks marks(static_cast<int>(g.size()));
  if (g.empty()) return marks;
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  const double m = *lo, big = *hi;
  const double ref = m + c_ref * (big - m);
  const double coarse = m + c_coarse * (big - m);
  for (int t = 0; t < marks.size(); ++t) {
    if (g[t] > ref) {
      marks.refine(t);
    } else if (g[t] < coarse) {
      marks.coarsen(t);
    }
  }
  return marks;
}

RefineMarks mark_elements(const State& s, const AdaptivityConfig& cfg) {
  RefineMarks marks = mark_indicator(element_gradient_magnitudes(s.phi), cfg.c_ref_phi, cfg.c_coarse_phi);
  for (int c = 0; c < 2; ++c) {
    marks.merge(mark_indicator(element_gradient_magnitudes(s.v, c), cfg.c_ref_v, cfg.c_coarse_v));
  }
  const Mesh& mesh = s.mesh();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (marks[t] == Mark::Refine && mesh.level(t) >= cfg.max_level) marks.keep(t);
    if (marks[t] == Mark::Coarsen && mesh.level(t) <= cfg.min_level) marks.keep(t);
  }
  return marks;
}

namespace {

double sup_diff(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

}  // namespace

StepResult splitting_step(const State& s, double tau, const PhysParams& params, const StepOptions& opt) {
  if (!(tau > 0.0)) throw ParameterError("time step must be > 0");
  const MeshContext& c = *s.ctx;
  const DoubleWell dw{params.sigma, params.delta};
  const bool fe = opt.convection == Convection::FE;
  const double eps_v = fe ? std::min(opt.tols.eps_v, opt.fe_tolerance) : opt.tols.eps_v;
  const double eps_phi = fe ? std::min(opt.tols.eps_phi, opt.fe_tolerance) : opt.tols.eps_phi;

  StepReport report;
  auto cahn_hilliard = [&](const Field& v, const Field& mu_guess) {
    ChResult r;
    if (fe) {
      r = ch_diffusive_solve(c.ch, s.phi, s.phi, tau, params.mobility, dw, opt.ch, &v, &mu_guess);
    } else {
      TransportOptions to;
      to.order = opt.fv_order;
      const FvField half = fv_transport_step(to_fv(s.phi), v, tau, c.mesh(), c.dual, c.volumes(), to);
      r = ch_diffusive_solve(c.ch, to_fe(half, c.disc.scalar), s.phi, tau, params.mobility, dw, opt.ch, nullptr,
                             &mu_guess);
    }
    report.newton_iterations += r.report.newton_iterations;
    return r;
  };

  ChResult cur = cahn_hilliard(s.v, s.mu);
  Field v_prev = s.v;
  Field p;
  bool converged = false;
  for (int i = 1; i <= opt.tols.max_inner_iterations; ++i) {
    MomentumInput in{&s.phi, &cur.phi, &cur.mu, &s.v, tau, s.t};
    MomentumResult me = solve_momentum(c.disc, params, in, opt.saddle_tol, opt.saddle);
    ChResult next = cahn_hilliard(me.v, cur.mu);
    report.inner_iterations = i;
    report.dv = sup_diff(me.v.values, v_prev.values);
    report.dphi = sup_diff(next.phi.values, cur.phi.values);
    report.divergence_residual = me.divergence_residual;
    report.momentum_residual = me.momentum_residual;
    v_prev = std::move(me.v);
    p = std::move(me.p);
    cur = std::move(next);
    if (report.dv <= eps_v && report.dphi <= eps_phi) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "splitting iteration did not converge in " << opt.tols.max_inner_iterations << " iterations (dv = "
        << report.dv << ", dphi = " << report.dphi << ")";
    throw StepRejected(msg.str());
  }

  StepResult out;
  out.state.t = s.t + tau;
  out.state.ctx = s.ctx;
  out.state.phi = std::move(cur.phi);
  out.state.mu = std::move(cur.mu);
  out.state.v = std::move(v_prev);
  out.state.p = std::move(p);
  out.state.mass_phi = c.volumes().dot(out.state.phi.values);
  out.report = report;
  return out;
}

State transfer_state(const State& s, ContextPtr ctx) {
  State out;
  out.t = s.t;
  out.ctx = std::move(ctx);
  out.phi = interpolate_nodal(s.phi, out.ctx->disc.scalar);
  out.mu = interpolate_nodal(s.mu, out.ctx->disc.scalar);
  out.v = interpolate_nodal(s.v, out.ctx->disc.velocity);
  apply_velocity_constraints(out.v);
  out.p = interpolate_nodal(s.p, out.ctx->disc.scalar);
  out.mass_phi = out.ctx->volumes().dot(out.phi.values);
  return out;
}

int total_dofs(const MeshContext& ctx) {
  return ctx.disc.velocity->num_dofs() + 3 * ctx.disc.scalar->num_dofs();
}

namespace {

void validate(const RunOptions& opt) {
  opt.params.validate();
  opt.step.tols.validate();
  opt.timestep.validate();
  opt.adapt.validate();
  if (!opt.initial_phi) throw ParameterError("initial_phi is not set");
  if (opt.t_end < 0.0) throw ParameterError("t_end must be >= 0");
  if (opt.max_rejections < 0) throw ParameterError("max_rejections must be >= 0");
}

ContextPtr context_for(MeshPtr mesh, const RunOptions& opt) {
  return make_context(std::move(mesh), opt.params.elements, opt.params.bc);
}

// Refines or coarsens according to the marks; returns nullptr when nothing changes.
MeshPtr adapt_mesh(const Mesh& mesh, const RefineMarks& marks) {
  if (marks.count(Mark::Refine) == 0 && marks.count(Mark::Coarsen) == 0) return nullptr;
  auto next = std::make_shared<const Mesh>(refine_and_coarsen(mesh, marks));
  if (next->num_triangles() == mesh.num_triangles() && next->num_vertices() == mesh.num_vertices()) return nullptr;
  return next;
}

}  // namespace

State initial_state(const RunOptions& opt) {
  validate(opt);
  const DoubleWell dw{opt.params.sigma, opt.params.delta};
  auto mesh = std::make_shared<const Mesh>(build_structured_mesh(opt.domain, opt.level));
  ContextPtr ctx = context_for(mesh, opt);
  State s = make_state(ctx, interpolate_nodal(opt.initial_phi, ctx->disc.scalar), dw);
  if (!opt.adapt.enabled) return s;
  const int rounds = std::max(opt.adapt.max_level - opt.adapt.min_level, 0) + 2;
  for (int r = 0; r < rounds; ++r) {
    MeshPtr next = adapt_mesh(s.mesh(), mark_elements(s, opt.adapt));
    if (!next) break;
    ctx = context_for(next, opt);
    s = make_state(ctx, interpolate_nodal(opt.initial_phi, ctx->disc.scalar), dw);
  }
  return s;
}

RunResult run(const RunOptions& opt, const StepObserver& observer) {
  State s = initial_state(opt);
  if (observer) observer(s, nullptr);
  RunResult result;
  const double t_end = opt.t_end;
  const double t_slack = 1e-12 * std::max(1.0, t_end);
  bool new_segment = false;
  int step = 0;
  while (s.t < t_end - t_slack && (opt.max_steps < 0 || step < opt.max_steps)) {
    const MeshContext& c = *s.ctx;
    double tau = opt.timestep.fixed_tau > 0.0 ? opt.timestep.fixed_tau
                                              : compute_timestep(s, c.mesh().min_edge_length(), opt.timestep);
    if (opt.step.convection == Convection::FV) tau = std::min(tau, fv_max_timestep(s.v, c.dual, c.volumes()));
    tau = std::min(tau, t_end - s.t);

    StepRecord rec;
    StepResult res;
    for (;;) {
      try {
        res = splitting_step(s, tau, opt.params, opt.step);
        break;
      } catch (const StepRejected&) {
      } catch (const NewtonDivergence&) {
      } catch (const IterativeFailure&) {
      } catch (const CflViolation&) {
      }
      if (++rec.rejections > opt.max_rejections) {
        throw StepRejected("step " + std::to_string(step + 1) + " at t = " + std::to_string(s.t) + " rejected " +
                           std::to_string(opt.max_rejections) + " times");
      }
      tau *= 0.5;
    }

    ++step;
    rec.step = step;
    rec.t = res.state.t;
    rec.tau = tau;
    rec.report = res.report;
    rec.audit = step_inequality_check(s, res.state, tau, opt.params, opt.audit_tol);
    rec.energy = rec.audit.step;
    rec.new_segment = new_segment;
    rec.mass_phi = res.state.mass_phi;
    rec.min_phi = res.state.phi.values.minCoeff();
    rec.max_phi = res.state.phi.values.maxCoeff();
    rec.dofs = total_dofs(c);
    s = std::move(res.state);

    new_segment = false;
    if (opt.adapt.enabled) {
      if (MeshPtr next = adapt_mesh(s.mesh(), mark_elements(s, opt.adapt))) {
        const double before = s.mass_phi;
        s = transfer_state(s, context_for(next, opt));
        rec.adapted = true;
        rec.transfer_mass_drift = s.mass_phi - before;
        new_segment = true;
      }
    }
    result.records.push_back(rec);
    if (observer) observer(s, &result.records.back());
  }
  result.final_state = std::move(s);
  return result;
}

std::vector<LedgerStep> ledger_steps(const std::vector<StepRecord>& records) {
  std::vector<LedgerStep> out;
  out.reserve(records.size());
  for (const StepRecord& r : records) out.push_back(LedgerStep{r.audit, r.new_segment});
  return out;
}

}  // namespace phaseflow
