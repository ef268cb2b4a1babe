#include "nullctl/lebeau_robbiano.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nullctl {

using Eigen::VectorXd;

int Schedule::rho_for(int k) const {
  const double raw = std::pow(C0, 0.5 * k);
  if (!(raw < static_cast<double>(rho_cap))) return rho_cap;
  return std::max(1, static_cast<int>(std::llround(raw)));
}

Schedule plan_schedule(double T, double C0, int k_max, int rho_cap) {
  require(std::isfinite(T) && T > 0.0, "schedule horizon T must be positive");
  require(std::isfinite(C0) && C0 > 32.0, "schedule constant C0 must exceed 32");
  require(k_max >= 1 && k_max <= 50, "k_max must lie in [1, 50]");
  require(rho_cap >= 1, "rho_cap must be positive");
  Schedule s{T, C0, rho_cap, {}};
  for (int k = 1; k <= k_max; ++k) {
    Stage st;
    st.index = k;
    st.t_start = T * (1.0 - std::ldexp(1.0, 1 - k));
    st.t_mid = st.t_start + T * std::ldexp(1.0, -k - 1);
    st.t_next = st.t_start + T * std::ldexp(1.0, -k);
    st.rho = s.rho_for(k);
    s.stages.push_back(st);
  }
  return s;
}

HypothesisReport validate_hypotheses(const CouplingCoefficients& coeffs, const SwitchingSetup& setup) {
  HypothesisReport r;
  auto scan = [](const PiecewiseConstant& f, const IntervalSet& set, double& best, int& index) {
    int i = 0;
    for (const auto& piece : set.pieces()) {
      ++i;
      const auto [lo, hi] = f.range_over(piece.lo, piece.hi);
      const double margin = std::max(lo, -hi);  // c >= l0 or c <= -l0 on the piece
      if (margin > best) {
        best = margin;
        index = i;
      }
    }
  };
  scan(coeffs.c, setup.E, r.l0, r.i0);
  scan(coeffs.b, setup.F, r.lbar0, r.ibar0);
  r.h1 = r.i0 > 0;
  r.h2 = r.ibar0 > 0;
  r.negative_regime = !r.h1 && !r.h2;
  return r;
}

namespace {

double sq_norm(const VectorXd& v, const VectorXd& w) {
  return (w.array() * v.array().square()).sum();
}

Trajectory free_evolution(const CoupledModel& model, const VectorXd& y, const VectorXd& z,
                          double t0, double t1, ControlSignal& zero) {
  const TimeGrid tg = default_time_grid(model.setup, t0, t1);
  zero = ControlSignal::zero(tg, model.n());
  return solve_forward(model, y, z, zero, tg);
}

}  // namespace

SwitchingControlResult synthesize_switching_control(const CoupledModel& model,
                                                    const EigenBasis<double>& laplacian_basis,
                                                    const EigenBasis<double>& degenerate_basis,
                                                    const VectorXd& y0, const VectorXd& z0,
                                                    const Schedule& schedule) {
  const SwitchingSetup& setup = model.setup;
  setup.validate();
  require(std::abs(schedule.T - setup.T) <= 1e-12 * setup.T,
          "schedule horizon differs from the setup horizon");
  require(schedule.rho_cap <= model.n() / 4, "rho_cap must not exceed n/4 resolvable modes");
  require(schedule.rho_cap <= laplacian_basis.size() && schedule.rho_cap <= degenerate_basis.size(),
          "eigenbases must hold at least rho_cap modes");
  require(y0.size() == model.n() && z0.size() == model.n(),
          "initial data must have one entry per cell");

  bool use_e = true, use_f = false;
  if (setup.mode == SwitchingMode::AlternatingIntervals) {
    const HypothesisReport h = validate_hypotheses(model.coeffs, setup);
    require(h.h1 || h.h2, "neither (H1) nor (H2) holds: the alternating system is not steerable");
    use_e = h.h1;
    use_f = h.h2;
  }

  const VectorXd& w = model.grid.weights;
  SwitchingControlResult out;
  out.rho_cap = schedule.rho_cap;
  out.initial_energy = sq_norm(y0, w) + sq_norm(z0, w);
  out.initial_norm = std::sqrt(sq_norm(y0, w)) + std::sqrt(sq_norm(z0, w));
  const double tau = model.coeffs.tau();

  std::vector<ControlSignal> controls;
  std::vector<Trajectory> pieces;
  VectorXd y = y0, z = z0;
  for (const Stage& st : schedule.stages) {
    const bool e_here = use_e && setup.E.overlap(st.t_start, st.t_mid) > 0.0;
    const bool f_here = use_f && setup.F.overlap(st.t_start, st.t_mid) > 0.0;
    if (!e_here && !f_here) {
      std::ostringstream msg;
      msg << "stage " << st.index << ": the active interval [" << st.t_start << ", " << st.t_mid
          << "] meets no time set of the usable hypothesis";
      throw ValidationError(msg.str());
    }

    StageRecord rec;
    rec.stage = st;
    rec.state_start = sq_norm(y, w) + sq_norm(z, w);
    HumProblem problem{model, laplacian_basis, degenerate_basis, st.t_start, st.t_mid, st.rho, y, z};
    PartialControlResult pc;
    try {
      pc = synthesize_partial_control(problem);
    } catch (const UnachievableError& e) {
      std::ostringstream msg;
      msg << "stage " << st.index << ": " << e.what();
      throw UnachievableError(msg.str(), e.null_mode());
    } catch (const ConvergenceError& e) {
      std::ostringstream msg;
      msg << "stage " << st.index << ": " << e.what();
      throw ConvergenceError(msg.str(), e.iterations(), e.residual());
    }
    const int last = pc.trajectory.snapshots() - 1;
    y = pc.trajectory.y.col(last);
    z = pc.trajectory.z.col(last);
    rec.control_energy = pc.control_energy;
    rec.gramian_condition = pc.gramian_condition;
    rec.state_mid = sq_norm(y, w) + sq_norm(z, w);
    rec.annihilation = laplacian_basis.coefficients(y, st.rho).norm() +
                       degenerate_basis.coefficients(z, st.rho).norm();
    controls.push_back(pc.control);
    pieces.push_back(std::move(pc.trajectory));

    ControlSignal zero;
    pieces.push_back(free_evolution(model, y, z, st.t_mid, st.t_next, zero));
    controls.push_back(zero);
    const int end = pieces.back().snapshots() - 1;
    y = pieces.back().y.col(end);
    z = pieces.back().z.col(end);
    rec.state_next = sq_norm(y, w) + sq_norm(z, w);

    rec.alpha = rec.state_start > 0.0 ? rec.control_energy / rec.state_start : 0.0;
    rec.beta = rec.state_start > 0.0 ? rec.state_mid / rec.state_start : 0.0;
    rec.theta = rec.state_mid > 0.0 ? rec.state_next / rec.state_mid : 0.0;
    const int rho_next = schedule.rho_for(st.index + 1);
    const double lam = std::min(laplacian_basis.values[rho_next - 1],
                                degenerate_basis.values[rho_next - 1]);
    rec.theta_formula = std::exp(-(2.0 * lam - tau) * (st.t_next - st.t_mid));
    out.stages.push_back(rec);
  }

  const double tail_start = schedule.stages.empty() ? 0.0 : schedule.stages.back().t_next;
  if (tail_start < setup.T * (1.0 - 1e-14)) {
    ControlSignal zero;
    pieces.push_back(free_evolution(model, y, z, tail_start, setup.T, zero));
    controls.push_back(zero);
  }
  out.control = concatenate(controls);
  out.trajectory = concatenate(pieces);
  const int last = out.trajectory.snapshots() - 1;
  out.y_terminal = std::sqrt(sq_norm(out.trajectory.y.col(last), w));
  out.z_terminal = std::sqrt(sq_norm(out.trajectory.z.col(last), w));
  return out;
}

BoundReport bound_tracking(const SwitchingControlResult& result) {
  BoundReport r;
  for (const StageRecord& s : result.stages) {
    r.contraction.push_back(s.state_start > 0.0 ? s.state_next / s.state_start : 0.0);
    r.energies.push_back(s.control_energy);
    r.total_energy += s.control_energy;
  }
  r.L_measured = result.initial_energy > 0.0 ? r.total_energy / result.initial_energy : 0.0;
  for (std::size_t i = 1; i < r.contraction.size(); ++i) {
    if (!(r.contraction[i] < 1.0)) r.contracting_after_first = false;
    if (i >= 2 && r.contraction[i] > r.contraction[i - 1]) r.decreasing = false;
  }
  for (std::size_t k = r.contraction.size(); k-- > 0;) {
    if (!(r.contraction[k] < 1.0)) break;
    r.crossover_stage = static_cast<int>(k) + 1;
  }
  return r;
}

}  // namespace nullctl
