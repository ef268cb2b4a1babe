#ifndef NULLCTL_OBSERVABILITY_HPP
#define NULLCTL_OBSERVABILITY_HPP

#include "nullctl/hum.hpp"
#include "nullctl/regression.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nullctl {

struct TelescopeParams {
  double ell = 1.0;   // accumulation point
  double ell1 = 0.5;  // first term
  double q = 0.5;     // increment ratio in (0,1)
};

/// ell[i] holds l_{i+1}; tau[i] holds tau_{i+1} = l_{i+2} - (l_{i+2} - l_{i+1}) / 6.
struct TelescopingSequence {
  TelescopeParams params;
  std::vector<double> ell;  // n_terms + 1 entries
  std::vector<double> tau;  // n_terms entries

  /// max |(l_{n+2} - l_{n+1}) - q (l_{n+1} - l_n)|.
  double ratio_defect() const;
};

TelescopingSequence telescoping_sequence(const TelescopeParams& params, int n_terms);

struct DensityRow {
  int n = 1;
  double lo = 0.0;   // l_n
  double hi = 0.0;   // l_{n+1}
  double tau = 0.0;  // tau_n
  double full = 0.0;  // |E ∩ (l_n, l_{n+1})|
  double head = 0.0;  // |E ∩ (l_n, tau_n)|
  bool third = false;  // full >= (l_{n+1} - l_n) / 3
  bool sixth = false;  // head >= (l_{n+1} - l_n) / 6
};

std::vector<DensityRow> density_check(const IntervalSet& E, const TelescopingSequence& seq);

enum class TimeNorm { L2Time, L1Time };

struct ObservabilityOptions {
  int p_modes = -1;  // terminal families; negative means k_modes
  int w_modes = -1;
  int starts = 32;   // random starts of the L1 ascent
  std::uint64_t seed = 1;
  double dt = 0.0;   // 0 selects default_time_grid
};

/// Sharpest C in N <= C D over the terminal span, where N = ||p(0)||^2 + ||w(0)||^2
/// and D is the squared L2 or L1 time norm of the observation. The L1 value is
/// the best found by multi-start ascent, so it is a lower bound.
struct ObservabilityEstimate {
  TimeNorm norm = TimeNorm::L2Time;
  bool finite = true;
  double value = 0.0;
  Eigen::VectorXd direction;  // terminal coefficients of the maximizer or the unobserved mode
  int iterations = 0;
  std::string note;
};

ObservabilityEstimate estimate_observability_constant(const CoupledModel& model,
                                                      const EigenBasis<double>& laplacian_basis,
                                                      const EigenBasis<double>& degenerate_basis,
                                                      TimeNorm norm, int k_modes,
                                                      const ObservabilityOptions& options = {});

/// A_n = (||p(l_n)||^2 + ||w(l_n)||^2)^{1/2} and the mean of
/// B(t) = ||p(t)||_{G2} + ||w(t)||_{G1} over grid times in E ∩ (l_n, tau_n).
struct TelescopeTrace {
  std::vector<double> A;
  std::vector<double> B_mean;  // NaN where no grid time falls in E ∩ (l_n, tau_n)
};

TelescopeTrace telescope_trace(const CoupledModel& model, const Eigen::VectorXd& pT,
                               const Eigen::VectorXd& wT, const TelescopingSequence& seq,
                               double dt = 0.0);

struct InterpolationFit {
  std::vector<double> times;      // snapped to the time grid
  std::vector<double> max_ratio;  // max over samples of R(t)
  std::vector<double> predictor;  // (T - t)^{sigma / (sigma - 1)}
  LinearFit fit;                  // log max_ratio against predictor
  double K_envelope = 0.0;        // smallest K with log R <= K (1 + predictor)
  double K_cap = 100.0;
  int excluded = 0;               // (sample, time) pairs with zero observation
  bool bounded = false;
};

/// R(t) = (||p||^2 + ||w||^2) / ((||p||_{G2}^2 + ||w||_{G1}^2)^{1/2} (||p_T||^2 + ||w_T||^2)^{1/2})
/// for random terminal data in the first k_modes of each basis.
InterpolationFit interpolation_blowup_fit(const CoupledModel& model,
                                          const EigenBasis<double>& laplacian_basis,
                                          const EigenBasis<double>& degenerate_basis,
                                          const std::vector<double>& times, double sigma,
                                          int k_modes, int samples, std::uint64_t seed,
                                          double K_cap = 100.0, double dt = 0.0);

enum class NegativeCase {
  ZUncontrolled = 1,  // chi_E = 1, c = 0: z ignores the control
  YUncontrolled = 2,  // chi_F = 1, b = 0: y ignores the control
};

struct NegativeReport {
  NegativeCase which = NegativeCase::ZUncontrolled;
  int controls = 0;
  double max_deviation = 0.0;   // max entry of |X(T; u) - X(T; 0)| over runs
  double free_norm = 0.0;       // ||X(T; 0)|| of the uncontrolled component
  double initial_norm = 0.0;    // its initial norm
  double controlled_spread = 0.0;  // same deviation for the other component
};

NegativeReport negative_demo(NegativeCase which, const CoupledModel& model,
                             const Eigen::VectorXd& y0, const Eigen::VectorXd& z0, int controls,
                             std::uint64_t seed, double dt = 0.0);

}  // namespace nullctl

#endif  // NULLCTL_OBSERVABILITY_HPP
