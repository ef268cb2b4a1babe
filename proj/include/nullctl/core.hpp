#ifndef NULLCTL_CORE_HPP
#define NULLCTL_CORE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace nullctl {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;

/// Bad input: violated precondition or type invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative or linear solver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Non-finite values appeared during time stepping.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}

  double time() const { return time_; }

 private:
  double time_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace nullctl

#endif  // NULLCTL_CORE_HPP
