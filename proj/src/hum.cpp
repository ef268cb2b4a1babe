#include "nullctl/hum.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace nullctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TimeGrid HumProblem::time_grid() const {
  return dt > 0.0 ? make_time_grid(t_start, t_end, dt)
                  : default_time_grid(model.setup, t_start, t_end);
}

void HumProblem::validate() const {
  require(t_start >= 0.0 && t_end <= model.setup.T * (1.0 + 1e-12) && t_start < t_end,
          "HUM window must lie inside [0, T]");
  require(k >= 1, "HUM mode count k must be positive");
  require(p_count() >= 0 && w_count() >= 0 && p_count() + w_count() >= 1,
          "HUM needs at least one terminal family");
  require(p_count() <= degenerate_basis.size() && w_count() <= laplacian_basis.size(),
          "HUM mode count exceeds the eigenbasis size");
  require(laplacian_basis.dimension() == model.n() && degenerate_basis.dimension() == model.n(),
          "eigenbases do not match the model grid");
  require(y0.size() == model.n() && z0.size() == model.n(),
          "initial data must have one entry per cell");
  require(y0.allFinite() && z0.allFinite(), "initial data must be finite");
  require(std::isfinite(regularization), "regularization must be finite");
}

MatrixXd HumGramian::combine(const VectorXd& xi) const {
  require(xi.size() == size(), "combine: coefficient length mismatch");
  MatrixXd u = MatrixXd::Zero(observations.front().rows(), observations.front().cols());
  for (int i = 0; i < size(); ++i) {
    if (xi[i] != 0.0) u += xi[i] * observations[i];
  }
  return u;
}

HumGramian build_hum_gramian(const HumProblem& problem) {
  problem.validate();
  const CoupledModel& model = problem.model;
  const int n = model.n();
  HumGramian g;
  g.p_modes = problem.p_count();
  g.w_modes = problem.w_count();
  g.tg = problem.time_grid();
  const int count = g.p_modes + g.w_modes;
  g.p_start.resize(n, count);
  g.w_start.resize(n, count);
  g.observations.reserve(count);

  // Columns scaled by sqrt(dt w_j) so that Lambda = Z^T Z.
  const VectorXd root_w = (g.tg.dt * model.grid.weights).cwiseSqrt();
  MatrixXd z(static_cast<Eigen::Index>(n) * g.tg.steps, count);
  for (int i = 0; i < count; ++i) {
    VectorXd pT = VectorXd::Zero(n), wT = VectorXd::Zero(n);
    if (i < g.p_modes) {
      pT = problem.degenerate_basis.vectors.col(i);
    } else {
      wT = problem.laplacian_basis.vectors.col(i - g.p_modes);
    }
    const AdjointTrajectory adj = solve_adjoint(model, pT, wT, g.tg);
    g.p_start.col(i) = adj.p.col(0);
    g.w_start.col(i) = adj.w.col(0);
    g.observations.push_back(observe(model, adj, g.tg));
    const MatrixXd scaled = root_w.asDiagonal() * g.observations.back();
    z.col(i) = Eigen::Map<const VectorXd>(scaled.data(), scaled.size());
  }
  g.matrix = z.transpose() * z;
  g.matrix = 0.5 * (g.matrix + g.matrix.transpose()).eval();
  return g;
}

namespace {

double inner(const VectorXd& a, const VectorXd& b, const VectorXd& w) {
  return (w.array() * a.array() * b.array()).sum();
}

/// Solves (Lambda + eps I) xi = beta through the eigendecomposition of Lambda,
/// followed by two refinement sweeps. With eps = 0 directions with eigenvalue
/// at or below 1e-14 mu_max are dropped, or rejected if beta needs them.
VectorXd solve_gramian(const MatrixXd& lambda, const VectorXd& beta, double eps,
                       double& condition) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(lambda);
  require(es.info() == Eigen::Success, "HUM Gramian eigendecomposition failed");
  const VectorXd& mu = es.eigenvalues();
  const MatrixXd& v = es.eigenvectors();
  const double mu_max = std::max(mu.maxCoeff(), 0.0);
  condition = mu[0] > 0.0 ? mu_max / mu[0] : std::numeric_limits<double>::infinity();
  const double beta_norm = beta.norm();
  if (beta_norm == 0.0) return VectorXd::Zero(beta.size());

  VectorXd inv(mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    if (eps > 0.0) {
      inv[i] = 1.0 / (std::max(mu[i], 0.0) + eps);
    } else if (mu[i] <= 1e-14 * mu_max || mu_max == 0.0) {
      const double need = std::abs(v.col(i).dot(beta));
      if (need > 1e-10 * beta_norm) {
        std::ostringstream msg;
        msg << "HUM Gramian eigenvalue " << mu[i] << " (max " << mu_max
            << ") is numerically zero along a direction the data requires (component " << need
            << ")";
        throw UnachievableError(msg.str(), v.col(i));
      }
      inv[i] = 0.0;
    } else {
      inv[i] = 1.0 / mu[i];
    }
  }
  auto apply_inverse = [&](const VectorXd& r) -> VectorXd {
    return v * inv.asDiagonal() * (v.transpose() * r);
  };
  VectorXd xi = apply_inverse(beta);
  for (int sweep = 0; sweep < 2; ++sweep) {
    const VectorXd r = beta - lambda * xi - eps * xi;
    xi += apply_inverse(r);
  }
  return xi;
}

}  // namespace

PartialControlResult synthesize_partial_control(const HumProblem& problem) {
  return synthesize_partial_control(problem, build_hum_gramian(problem));
}

PartialControlResult synthesize_partial_control(const HumProblem& problem, const HumGramian& gram) {
  problem.validate();
  require(gram.p_modes == problem.p_count() && gram.w_modes == problem.w_count(),
          "Gramian was built for different terminal families");
  const CoupledModel& model = problem.model;
  const VectorXd& w = model.grid.weights;
  const int count = gram.size();

  VectorXd beta(count);
  for (int i = 0; i < count; ++i) {
    beta[i] = -(inner(problem.z0, gram.p_start.col(i), w) + inner(problem.y0, gram.w_start.col(i), w));
  }
  PartialControlResult out;
  out.regularization = problem.regularization >= 0.0
                           ? problem.regularization
                           : 1e-12 * gram.matrix.trace() / (2.0 * problem.k);
  out.xi = solve_gramian(gram.matrix, beta, out.regularization, out.gramian_condition);

  out.control.times = gram.tg.times();
  out.control.values = gram.combine(out.xi);
  out.control_energy = out.control.energy(w);
  out.trajectory = solve_forward(model, problem.y0, problem.z0, out.control, gram.tg);

  const VectorXd yT = out.trajectory.y.col(gram.tg.steps);
  const VectorXd zT = out.trajectory.z.col(gram.tg.steps);
  out.projected_residual = problem.laplacian_basis.coefficients(yT, gram.w_modes).squaredNorm() +
                           problem.degenerate_basis.coefficients(zT, gram.p_modes).squaredNorm();
  return out;
}

double duality_residual(const CoupledModel& model, const TimeGrid& tg, const ControlSignal& control,
                        const VectorXd& pT, const VectorXd& wT, const VectorXd& y0,
                        const VectorXd& z0) {
  require(control.steps() == tg.steps, "duality_residual: control and time grid differ");
  for (int m = 0; m <= tg.steps; ++m) {
    require(std::abs(control.times[m] - tg.time(m)) <= 1e-12 * std::max(1.0, std::abs(tg.time(m))),
            "duality_residual: control and time grid differ");
  }
  const VectorXd& w = model.grid.weights;
  const Trajectory fwd = solve_forward(model, y0, z0, control, tg);
  const AdjointTrajectory adj = solve_adjoint(model, pT, wT, tg);
  const MatrixXd o = observe(model, adj, tg);
  double pairing = 0.0;
  for (int m = 0; m < tg.steps; ++m) pairing += tg.dt * inner(control.values.col(m), o.col(m), w);
  const double end = inner(fwd.y.col(tg.steps), wT, w) + inner(fwd.z.col(tg.steps), pT, w);
  const double start = inner(y0, adj.w.col(0), w) + inner(z0, adj.p.col(0), w);
  return std::abs(end - start - pairing);
}

ControlBasedObservability estimate_observability_from_control(const HumProblem& problem, int samples,
                                                              std::uint64_t seed) {
  require(samples >= 1, "need at least one sample");
  problem.validate();
  const CoupledModel& model = problem.model;
  const VectorXd& w = model.grid.weights;
  ControlBasedObservability out;

  const HumGramian gram = build_hum_gramian(problem);
  if (gram.matrix.trace() == 0.0) {
    out.estimate = std::numeric_limits<double>::infinity();
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < samples; ++s) {
    VectorXd coef(gram.size());
    for (int i = 0; i < coef.size(); ++i) coef[i] = normal(rng);
    // Adjoint data at t_start and observations are linear in the terminal coefficients.
    const VectorXd p0 = gram.p_start * coef;
    const VectorXd w0 = gram.w_start * coef;
    const double n_form = inner(p0, p0, w) + inner(w0, w0, w);
    const double o_form = coef.dot(gram.matrix * coef);

    HumProblem local{model, problem.laplacian_basis, problem.degenerate_basis, problem.t_start,
                     problem.t_end, problem.k, -w0, -p0, problem.regularization, problem.dt,
                     problem.p_modes, problem.w_modes};
    const PartialControlResult pc = synthesize_partial_control(local, gram);
    out.ratios.push_back(o_form > 0.0 ? n_form / o_form : std::numeric_limits<double>::infinity());
    out.cost_ratios.push_back(pc.control_energy / n_form);
    out.residuals.push_back(pc.projected_residual / n_form);
    out.estimate = std::max(out.estimate, out.ratios.back());
  }
  return out;
}

}  // namespace nullctl
