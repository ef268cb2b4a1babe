#ifndef NULLCTL_DYNAMICS_HPP
#define NULLCTL_DYNAMICS_HPP

#include "nullctl/coefficients.hpp"
#include "nullctl/core.hpp"
#include "nullctl/eigensolver.hpp"
#include "nullctl/grid.hpp"
#include "nullctl/operator.hpp"
#include "nullctl/setup.hpp"

#include <vector>

namespace nullctl {

/// Uniform steps t0 + m dt, m = 0..steps.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  int steps = 0;

  double t_end() const { return t0 + dt * steps; }
  double time(int m) const { return t0 + dt * m; }
  double midpoint(int m) const { return t0 + dt * (m + 0.5); }
  Eigen::VectorXd times() const;
};

/// Throws ValidationError unless dt divides (t1 - t0).
TimeGrid make_time_grid(double t0, double t1, double dt);

/// Largest step not above min(1e-3 T, shortest E/F piece in the window / 50)
/// that places every E/F endpoint inside the window on the grid.
TimeGrid default_time_grid(const SwitchingSetup& setup, double t0, double t1);

/// y is governed by the Laplacian, z by the degenerate operator.
struct Operators {
  StiffnessMatrix<double> laplacian;
  StiffnessMatrix<double> degenerate;
};

/// Everything the coupled solvers need besides data and the time grid.
struct CoupledModel {
  Grid<double> grid;
  Operators ops;
  SwitchingSetup setup;
  CouplingCoefficients coeffs;
  Eigen::VectorXd mask_g1;
  Eigen::VectorXd mask_g2;

  CoupledModel(Grid<double> grid, Operators ops, SwitchingSetup setup, CouplingCoefficients coeffs);

  int n() const { return grid.n; }
  /// chi_E (resp. chi_F, or chi_E when shared) at each step midpoint.
  Eigen::VectorXd y_gates(const TimeGrid& tg) const;
  Eigen::VectorXd z_gates(const TimeGrid& tg) const;
};

/// Builds both operators on one grid.
Operators make_operators(const Grid<double>& grid, double alpha);

/// Piecewise constant in time: values.col(m) acts on (times[m], times[m+1]).
struct ControlSignal {
  Eigen::VectorXd times;
  Eigen::MatrixXd values;  // n x steps

  static ControlSignal zero(const TimeGrid& tg, int n);
  int steps() const { return static_cast<int>(values.cols()); }
  /// sum over steps of dt ||u||_W^2.
  double energy(const Eigen::VectorXd& weights) const;
};

/// Joins controls on consecutive windows.
ControlSignal concatenate(const std::vector<ControlSignal>& parts);

/// Forward trajectory, one column per saved time.
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd y;
  Eigen::MatrixXd z;

  int snapshots() const { return static_cast<int>(times.size()); }
};

Trajectory concatenate(const std::vector<Trajectory>& parts);

/// Backward trajectory of (p, w), plus the per-step averages
/// ((p, w)(t_m) + (p, w)(t_{m+1})) / 2 that pair with a step-constant control.
struct AdjointTrajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd p;
  Eigen::MatrixXd w;
  Eigen::MatrixXd p_mid;  // n x steps
  Eigen::MatrixXd w_mid;
};

/// Crank-Nicolson for diffusion, coupling and control alike. Coefficients and
/// gates are taken at step midpoints; each step is one 2x2-block tridiagonal
/// solve checked to residual 1e-12.
Trajectory solve_forward(const CoupledModel& model, const Eigen::VectorXd& y0,
                         const Eigen::VectorXd& z0, const ControlSignal& control,
                         const TimeGrid& tg);

/// The exact discrete adjoint of solve_forward on the same grid, run backward
/// from (p_T, w_T) at tg.t_end().
AdjointTrajectory solve_adjoint(const CoupledModel& model, const Eigen::VectorXd& pT,
                                const Eigen::VectorXd& wT, const TimeGrid& tg);

/// Observation chi_E chi_G1 w + chi_F chi_G2 p per step (chi_E on both when shared).
Eigen::MatrixXd observe(const CoupledModel& model, const AdjointTrajectory& adj, const TimeGrid& tg);

enum class SpectralPart { Low, High };

/// Low: sum_{i<=k} <v, e_i> e_i. High: v minus Low.
Eigen::VectorXd spectral_project(const Eigen::VectorXd& v, const EigenBasis<double>& basis, int k,
                                 SpectralPart part);

/// Time series check lhs(t) <= rhs(t) + margin.
///
/// margin = 1e-6 E0 + 2 * discretization_error, where E0 is the initial (or
/// terminal) energy and discretization_error is max |lhs_dt - lhs_{dt/2}|.
struct CertificateReport {
  Eigen::VectorXd times;
  Eigen::VectorXd lhs;
  Eigen::VectorXd rhs;
  double initial_energy = 0.0;
  double discretization_error = 0.0;
  double margin = 0.0;
  double max_excess = 0.0;          // max of lhs - rhs (may be negative)
  double max_relative_excess = 0.0;  // max of (lhs - rhs) / rhs over rhs > 0
  bool satisfied = true;
};

/// High-mode decay of the unforced forward system: lhs = ||y||^2 + ||z||^2,
/// rhs = exp(-(2 min(lambda_{k+1}, lambda_bar_{k+1}) - tau)(t - t0)) E0.
/// Requires the first k modal coefficients of y0 and z0 to vanish.
CertificateReport decay_certificate(const CoupledModel& model, const EigenBasis<double>& lap,
                                    const EigenBasis<double>& deg, const Eigen::VectorXd& y0,
                                    const Eigen::VectorXd& z0, int k, const TimeGrid& tg);

/// Adjoint analogue: lhs = ||E^perp p||^2 + ||E^perp w||^2 with the first k
/// modes removed, rhs = exp((-2 min(lambda_bar_k, lambda_k) + tau)(T - t)) E_T.
CertificateReport adjoint_decay_check(const CoupledModel& model, const EigenBasis<double>& lap,
                                      const EigenBasis<double>& deg, const Eigen::VectorXd& pT,
                                      const Eigen::VectorXd& wT, int k, const TimeGrid& tg);

/// Unforced growth bound ||y||^2 + ||z||^2 <= exp(tau (t - t0)) E0.
CertificateReport energy_bound_check(const CoupledModel& model, const Eigen::VectorXd& y0,
                                     const Eigen::VectorXd& z0, const TimeGrid& tg);

}  // namespace nullctl

#endif  // NULLCTL_DYNAMICS_HPP
