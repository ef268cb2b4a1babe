#ifndef NULLCTL_LEBEAU_ROBBIANO_HPP
#define NULLCTL_LEBEAU_ROBBIANO_HPP

#include "nullctl/hum.hpp"

#include <vector>

namespace nullctl {

/// Active interval I_k = [t_start, t_mid], passive J_k = [t_mid, t_next].
struct Stage {
  int index = 1;  // 1-based
  double t_start = 0.0;
  double t_mid = 0.0;
  double t_next = 0.0;
  int rho = 1;
};

struct Schedule {
  double T = 1.0;
  double C0 = 64.0;
  int rho_cap = 0;
  std::vector<Stage> stages;

  /// rho for stage k (1-based), including k beyond the planned stages.
  int rho_for(int k) const;
};

/// T_k = T (1 - 2^{1-k}), T~_k = T_k + T 2^{-k-1}, rho_k = round(C0^{k/2})
/// clamped at rho_cap.
Schedule plan_schedule(double T, double C0, int k_max, int rho_cap);

struct HypothesisReport {
  bool h1 = false;     // c bounded away from 0 with fixed sign on some E piece
  bool h2 = false;     // same for b on some F piece
  double l0 = 0.0;     // best margin for H1
  int i0 = 0;          // 1-based E piece attaining it; 0 if none
  double lbar0 = 0.0;  // best margin for H2
  int ibar0 = 0;
  bool negative_regime = false;  // neither holds
};

HypothesisReport validate_hypotheses(const CouplingCoefficients& coeffs, const SwitchingSetup& setup);

/// Per-stage energies and ratios measured along the run.
struct StageRecord {
  Stage stage;
  double state_start = 0.0;  // ||X(T_k)||^2 with X = (y, z)
  double state_mid = 0.0;    // ||X(T~_k)||^2
  double state_next = 0.0;   // ||X(T_{k+1})||^2
  double control_energy = 0.0;
  double annihilation = 0.0;  // ||Pi y(T~_k)|| + ||Pibar z(T~_k)||
  double gramian_condition = 0.0;
  double alpha = 0.0;          // control energy / ||X(T_k)||^2
  double beta = 0.0;           // ||X(T~_k)||^2 / ||X(T_k)||^2
  double theta = 0.0;          // ||X(T_{k+1})||^2 / ||X(T~_k)||^2
  double theta_formula = 0.0;  // exp(-(2 min(lambda, lambda_bar)_{rho_{k+1}} - tau) |J_k|)
};

struct SwitchingControlResult {
  ControlSignal control;
  Trajectory trajectory;
  double initial_norm = 0.0;    // ||y0|| + ||z0||
  double initial_energy = 0.0;  // ||y0||^2 + ||z0||^2
  double y_terminal = 0.0;
  double z_terminal = 0.0;
  std::vector<StageRecord> stages;
  // Modes above rho_cap are left to dissipation: exact discrete null control
  // is replaced by a small terminal norm.
  int rho_cap = 0;
};

/// Runs the stages in order: HUM on I_k with rho_k modes from the current
/// state, free evolution on J_k, then free evolution to T.
SwitchingControlResult synthesize_switching_control(const CoupledModel& model,
                                                    const EigenBasis<double>& laplacian_basis,
                                                    const EigenBasis<double>& degenerate_basis,
                                                    const Eigen::VectorXd& y0,
                                                    const Eigen::VectorXd& z0,
                                                    const Schedule& schedule);

struct BoundReport {
  std::vector<double> contraction;  // ||X(T_{k+1})||^2 / ||X(T_k)||^2, 0 when ||X(T_k)|| = 0
  std::vector<double> energies;
  double total_energy = 0.0;
  double L_measured = 0.0;  // total energy / (||y0||^2 + ||z0||^2)
  bool contracting_after_first = true;  // every factor for k >= 2 below 1
  bool decreasing = true;               // factors non-increasing from k = 2 on
  int crossover_stage = 0;  // first stage from which all factors are below 1; 0 if none
};

BoundReport bound_tracking(const SwitchingControlResult& result);

}  // namespace nullctl

#endif  // NULLCTL_LEBEAU_ROBBIANO_HPP
