#ifndef NULLCTL_HUM_HPP
#define NULLCTL_HUM_HPP

#include "nullctl/dynamics.hpp"

#include <cstdint>
#include <vector>

namespace nullctl {

/// Steer the first k modal coefficients of (y, z) to zero at window end.
struct HumProblem {
  const CoupledModel& model;
  const EigenBasis<double>& laplacian_basis;
  const EigenBasis<double>& degenerate_basis;
  double t_start = 0.0;
  double t_end = 0.0;
  int k = 1;
  Eigen::VectorXd y0;
  Eigen::VectorXd z0;
  double regularization = -1.0;  // Tikhonov epsilon; negative selects 1e-12 tr / (2k)
  double dt = 0.0;               // 0 selects default_time_grid
  int p_modes = -1;              // terminal families used; negative means k
  int w_modes = -1;

  TimeGrid time_grid() const;
  int p_count() const { return p_modes < 0 ? k : p_modes; }
  int w_count() const { return w_modes < 0 ? k : w_modes; }
  void validate() const;
};

/// Lambda_IJ = sum_m dt <o_I(m), o_J(m)>_W over the modal terminal data
/// I < p_count: p_T = ebar_I; otherwise w_T = e_{I - p_count}.
struct HumGramian {
  Eigen::MatrixXd matrix;
  int p_modes = 0;
  int w_modes = 0;
  TimeGrid tg;
  std::vector<Eigen::MatrixXd> observations;  // n x steps per terminal datum
  Eigen::MatrixXd p_start;                    // p_I(t_start), one column per datum
  Eigen::MatrixXd w_start;

  int size() const { return static_cast<int>(matrix.rows()); }
  /// u(xi) = sum_I xi_I o_I.
  Eigen::MatrixXd combine(const Eigen::VectorXd& xi) const;
};

HumGramian build_hum_gramian(const HumProblem& problem);

/// Lambda is singular along a direction the right-hand side needs and no
/// regularization was requested.
class UnachievableError : public std::runtime_error {
 public:
  UnachievableError(const std::string& what, Eigen::VectorXd mode)
      : std::runtime_error(what), mode_(std::move(mode)) {}
  const Eigen::VectorXd& null_mode() const { return mode_; }

 private:
  Eigen::VectorXd mode_;
};

struct PartialControlResult {
  ControlSignal control;
  Trajectory trajectory;
  Eigen::VectorXd xi;
  double projected_residual = 0.0;  // ||Pi y(end)||^2 + ||Pibar z(end)||^2
  double control_energy = 0.0;
  double gramian_condition = 0.0;
  double regularization = 0.0;
};

PartialControlResult synthesize_partial_control(const HumProblem& problem);
/// Reuses a Gramian built for the same problem window and families.
PartialControlResult synthesize_partial_control(const HumProblem& problem, const HumGramian& gram);

/// |<y(T), w_T> + <z(T), p_T> - <y0, w(t0)> - <z0, p(t0)> - sum dt <u, o>|.
double duality_residual(const CoupledModel& model, const TimeGrid& tg, const ControlSignal& control,
                        const Eigen::VectorXd& pT, const Eigen::VectorXd& wT,
                        const Eigen::VectorXd& y0, const Eigen::VectorXd& z0);

struct ControlBasedObservability {
  double estimate = 0.0;                // max over samples of N / O
  std::vector<double> ratios;           // N / O per sample
  std::vector<double> cost_ratios;      // control energy / N per sample
  std::vector<double> residuals;        // projected residual / N per sample
};

/// Samples terminal data in the modal span of the problem, sets
/// (y0, z0) = -(w, p)(t_start), synthesizes the HUM control and records
/// N = ||p(t_start)||^2 + ||w(t_start)||^2 against the observation norm O.
/// Returns +inf when nothing is observed.
ControlBasedObservability estimate_observability_from_control(const HumProblem& problem, int samples,
                                                              std::uint64_t seed);

}  // namespace nullctl

#endif  // NULLCTL_HUM_HPP
