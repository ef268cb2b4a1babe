#ifndef NULLCTL_TESTS_ORACLES_HPP
#define NULLCTL_TESTS_ORACLES_HPP

#include "nullctl/hum.hpp"

#include <map>
#include <utility>

namespace nullctl::testing {

/// Minimum-energy control from forward solves only: the terminal projection of
/// every unit control is assembled from the one-step propagator.
inline double dense_least_squares_energy(const CoupledModel& model, const EigenBasis<double>& lap,
                                         const EigenBasis<double>& deg, int k, const Eigen::VectorXd& y0,
                                         const Eigen::VectorXd& z0, const TimeGrid& tg) {
  const int n = model.n();
  const Eigen::VectorXd& w = model.grid.weights;
  auto step = [&](double t0, const Eigen::VectorXd& y, const Eigen::VectorXd& z, const Eigen::VectorXd& u) {
    const TimeGrid one{t0, tg.dt, 1};
    ControlSignal c = ControlSignal::zero(one, n);
    c.values.col(0) = u;
    const Trajectory tr = solve_forward(model, y, z, c, one);
    Eigen::VectorXd out(2 * n);
    out << tr.y.col(1), tr.z.col(1);
    return out;
  };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd phi(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2 * n);
    e[i] = 1.0;
    phi.col(i) = step(tg.t0, e.head(n), e.tail(n), zero);
  }
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(2 * k, 2 * n);
  proj.topLeftCorner(k, n) = lap.vectors.leftCols(k).transpose() * w.asDiagonal();
  proj.bottomRightCorner(k, n) = deg.vectors.leftCols(k).transpose() * w.asDiagonal();

  // Free terminal state through the same propagator.
  Eigen::VectorXd x(2 * n);
  x << y0, z0;
  for (int m = 0; m < tg.steps; ++m) x = phi * x;
  const Eigen::VectorXd target = -proj * x;

  const Eigen::VectorXd yg = model.y_gates(tg), zg = model.z_gates(tg);
  std::map<std::pair<double, double>, Eigen::MatrixXd> input;  // one-step response per gate pattern
  Eigen::MatrixXd a(2 * k, static_cast<Eigen::Index>(n) * tg.steps);
  Eigen::MatrixXd p = proj;  // proj * phi^(steps - 1 - m), filled from the last step backward
  for (int m = tg.steps - 1; m >= 0; --m) {
    const auto key = std::make_pair(yg[m], zg[m]);
    if (!input.count(key)) {
      Eigen::MatrixXd b(2 * n, n);
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        u[j] = 1.0;
        b.col(j) = step(tg.time(m), zero, zero, u);
      }
      input[key] = b;
    }
    a.middleCols(static_cast<Eigen::Index>(m) * n, n) = p * input[key];
    p = p * phi;
  }
  Eigen::VectorXd s(a.cols());
  for (int m = 0; m < tg.steps; ++m) s.segment(static_cast<Eigen::Index>(m) * n, n) = tg.dt * w;
  const Eigen::MatrixXd g = a * s.cwiseInverse().asDiagonal() * a.transpose();
  return target.dot(g.ldlt().solve(target));
}

}  // namespace nullctl::testing

#endif  // NULLCTL_TESTS_ORACLES_HPP
