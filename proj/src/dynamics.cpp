#include "nullctl/dynamics.hpp"

#include "block_tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nullctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd TimeGrid::times() const {
  VectorXd t(steps + 1);
  for (int m = 0; m <= steps; ++m) t[m] = time(m);
  t[steps] = t_end();
  return t;
}

TimeGrid make_time_grid(double t0, double t1, double dt) {
  require(std::isfinite(t0) && std::isfinite(t1) && t1 > t0, "time window must have t1 > t0");
  require(std::isfinite(dt) && dt > 0.0, "time step must be positive");
  const double ratio = (t1 - t0) / dt;
  const double steps = std::round(ratio);
  require(steps >= 1.0 && std::abs(ratio - steps) <= 1e-9 * std::max(1.0, ratio),
          "time step must divide the window length");
  return {t0, (t1 - t0) / steps, static_cast<int>(steps)};
}

TimeGrid default_time_grid(const SwitchingSetup& setup, double t0, double t1) {
  require(std::isfinite(t0) && std::isfinite(t1) && t1 > t0, "time window must have t1 > t0");
  double dt_max = 1e-3 * setup.T;
  std::vector<double> breaks;
  for (const IntervalSet* set : {&setup.E, &setup.F}) {
    const IntervalSet local = set->intersect(t0, t1);
    for (const auto& piece : local.pieces()) {
      dt_max = std::min(dt_max, piece.length() / 50.0);
      for (double b : {piece.lo, piece.hi}) {
        if (b > t0 && b < t1) breaks.push_back(b);
      }
    }
  }
  const double len = t1 - t0;
  const int first = std::max(1, static_cast<int>(std::ceil(len / dt_max - 1e-9)));
  for (int steps = first; steps <= 16 * first + 64; ++steps) {
    const double dt = len / steps;
    bool aligned = true;
    for (double b : breaks) {
      const double r = (b - t0) / dt;
      if (std::abs(r - std::round(r)) > 1e-7) {
        aligned = false;
        break;
      }
    }
    if (aligned) return {t0, dt, steps};
  }
  throw ValidationError("no time step up to 16x the default aligns with every E/F endpoint");
}

CoupledModel::CoupledModel(Grid<double> g, Operators o, SwitchingSetup s, CouplingCoefficients c)
    : grid(std::move(g)), ops(std::move(o)), setup(std::move(s)), coeffs(std::move(c)) {
  setup.validate_geometry();
  require(ops.laplacian.size() == grid.n && ops.degenerate.size() == grid.n,
          "operators must match the grid");
  mask_g1 = region_mask(grid, setup.G1);
  mask_g2 = region_mask(grid, setup.G2);
}

VectorXd CoupledModel::y_gates(const TimeGrid& tg) const {
  VectorXd g(tg.steps);
  for (int m = 0; m < tg.steps; ++m) g[m] = setup.y_times().contains(tg.midpoint(m)) ? 1.0 : 0.0;
  return g;
}

VectorXd CoupledModel::z_gates(const TimeGrid& tg) const {
  VectorXd g(tg.steps);
  for (int m = 0; m < tg.steps; ++m) g[m] = setup.z_times().contains(tg.midpoint(m)) ? 1.0 : 0.0;
  return g;
}

Operators make_operators(const Grid<double>& grid, double alpha) {
  return {assemble_operator(grid, OperatorSpec::laplacian()),
          assemble_operator(grid, OperatorSpec::degenerate(alpha))};
}

ControlSignal ControlSignal::zero(const TimeGrid& tg, int n) {
  return {tg.times(), MatrixXd::Zero(n, tg.steps)};
}

double ControlSignal::energy(const VectorXd& weights) const {
  require(weights.size() == values.rows(), "control energy: weight length mismatch");
  double e = 0.0;
  for (int m = 0; m < steps(); ++m) {
    e += (times[m + 1] - times[m]) * (weights.array() * values.col(m).array().square()).sum();
  }
  return e;
}

ControlSignal concatenate(const std::vector<ControlSignal>& parts) {
  require(!parts.empty(), "concatenate: nothing to join");
  int steps = 0;
  for (const auto& p : parts) steps += p.steps();
  ControlSignal out;
  out.times.resize(steps + 1);
  out.values.resize(parts.front().values.rows(), steps);
  int at = 0;
  out.times[0] = parts.front().times[0];
  for (const auto& p : parts) {
    require(p.values.rows() == out.values.rows(), "concatenate: grid sizes differ");
    require(std::abs(p.times[0] - out.times[at]) <= 1e-12 * std::max(1.0, std::abs(p.times[0])),
            "concatenate: controls are not contiguous");
    out.times.segment(at + 1, p.steps()) = p.times.tail(p.steps());
    out.values.middleCols(at, p.steps()) = p.values;
    at += p.steps();
  }
  return out;
}

Trajectory concatenate(const std::vector<Trajectory>& parts) {
  require(!parts.empty(), "concatenate: nothing to join");
  int count = 1;
  for (const auto& p : parts) count += p.snapshots() - 1;
  Trajectory out;
  const int n = static_cast<int>(parts.front().y.rows());
  out.times.resize(count);
  out.y.resize(n, count);
  out.z.resize(n, count);
  out.times[0] = parts.front().times[0];
  out.y.col(0) = parts.front().y.col(0);
  out.z.col(0) = parts.front().z.col(0);
  int at = 0;
  for (const auto& p : parts) {
    require(std::abs(p.times[0] - out.times[at]) <= 1e-12 * std::max(1.0, std::abs(p.times[0])),
            "concatenate: trajectories are not contiguous");
    const int add = p.snapshots() - 1;
    out.times.segment(at + 1, add) = p.times.tail(add);
    out.y.middleCols(at + 1, add) = p.y.rightCols(add);
    out.z.middleCols(at + 1, add) = p.z.rightCols(add);
    at += add;
  }
  return out;
}

namespace {

using detail::BlockTridiagonal2;

VectorXd interleave(const VectorXd& a, const VectorXd& b) {
  VectorXd x(2 * a.size());
  for (int j = 0; j < a.size(); ++j) {
    x[2 * j] = a[j];
    x[2 * j + 1] = b[j];
  }
  return x;
}

/// One Crank-Nicolson step of x' = K x + f on a pair of operators with the
/// 2x2 coupling C: K = [[-first + C00, C01], [C10, -second + C11]].
class StepEngine {
 public:
  StepEngine(const StiffnessMatrix<double>& first, const StiffnessMatrix<double>& second, double dt)
      : first_(first), second_(second), dt_(dt) {}

  /// Solves (I - dt/2 K) x = rhs.
  VectorXd solve(const Eigen::Matrix2d& coupling, const VectorXd& rhs, double t) {
    const BlockTridiagonal2& lhs = implicit(coupling);
    VectorXd x = lhs.solve(rhs);
    const double scale = rhs.cwiseAbs().maxCoeff();
    double residual = (rhs - lhs.apply(x)).cwiseAbs().maxCoeff();
    if (residual > 1e-12 * scale) {
      x += lhs.solve(rhs - lhs.apply(x));
      residual = (rhs - lhs.apply(x)).cwiseAbs().maxCoeff();
    }
    if (!x.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite state at t = " << t;
      throw BlowupError(msg.str(), t);
    }
    if (residual > 1e-12 * scale) {
      std::ostringstream msg;
      msg << "block step residual " << residual << " above 1e-12 relative at t = " << t;
      throw ConvergenceError(msg.str(), 2, residual / scale);
    }
    return x;
  }

  /// (I + dt/2 K) x.
  VectorXd explicit_half(const Eigen::Matrix2d& coupling, const VectorXd& x) const {
    const int n = first_.size();
    VectorXd a(n), b(n);
    for (int j = 0; j < n; ++j) {
      a[j] = x[2 * j];
      b[j] = x[2 * j + 1];
    }
    const VectorXd la = first_.apply(a).cwiseQuotient(first_.weights);
    const VectorXd lb = second_.apply(b).cwiseQuotient(second_.weights);
    VectorXd out(2 * n);
    const double h = 0.5 * dt_;
    for (int j = 0; j < n; ++j) {
      out[2 * j] = a[j] + h * (-la[j] + coupling(0, 0) * a[j] + coupling(0, 1) * b[j]);
      out[2 * j + 1] = b[j] + h * (-lb[j] + coupling(1, 0) * a[j] + coupling(1, 1) * b[j]);
    }
    return out;
  }

 private:
  const BlockTridiagonal2& implicit(const Eigen::Matrix2d& coupling) {
    for (const auto& entry : cache_) {
      if (entry.first == coupling) return entry.second;
    }
    const int n = first_.size();
    const double h = 0.5 * dt_;
    BlockTridiagonal2 m(n);
    for (int j = 0; j < n; ++j) {
      m.diag(j) << 1.0 + h * first_.operator_entry(j, j) - h * coupling(0, 0), -h * coupling(0, 1),
          -h * coupling(1, 0), 1.0 + h * second_.operator_entry(j, j) - h * coupling(1, 1);
      if (j > 0) {
        m.lower(j) << h * first_.operator_entry(j, j - 1), 0.0, 0.0,
            h * second_.operator_entry(j, j - 1);
      }
      if (j + 1 < n) {
        m.upper(j) << h * first_.operator_entry(j, j + 1), 0.0, 0.0,
            h * second_.operator_entry(j, j + 1);
      }
    }
    if (!m.factor()) throw ConvergenceError("singular pivot block in the implicit step", 0, 0.0);
    cache_.emplace_back(coupling, std::move(m));
    return cache_.back().second;
  }

  const StiffnessMatrix<double>& first_;
  const StiffnessMatrix<double>& second_;
  double dt_;
  std::vector<std::pair<Eigen::Matrix2d, BlockTridiagonal2>> cache_;
};

void check_state(const CoupledModel& model, const VectorXd& a, const VectorXd& b) {
  require(a.size() == model.n() && b.size() == model.n(),
          "state vectors must have one entry per cell");
  require(a.allFinite() && b.allFinite(), "state vectors must be finite");
}

}  // namespace

Trajectory solve_forward(const CoupledModel& model, const VectorXd& y0, const VectorXd& z0,
                         const ControlSignal& control, const TimeGrid& tg) {
  check_state(model, y0, z0);
  require(tg.steps >= 1 && tg.dt > 0.0, "time grid must have at least one step");
  require(control.steps() == tg.steps && control.values.rows() == model.n(),
          "control must have one column per time step and one row per cell");
  require(std::abs(control.times[0] - tg.t0) <= 1e-12 * std::max(1.0, std::abs(tg.t0)) &&
              std::abs(control.times[tg.steps] - tg.t_end()) <=
                  1e-12 * std::max(1.0, std::abs(tg.t_end())),
          "control must be defined on the solver window");
  require(control.values.allFinite(), "control values must be finite");

  const int n = model.n();
  const VectorXd gy = model.y_gates(tg);
  const VectorXd gz = model.z_gates(tg);
  StepEngine engine(model.ops.laplacian, model.ops.degenerate, tg.dt);

  Trajectory traj;
  traj.times = tg.times();
  traj.y.resize(n, tg.steps + 1);
  traj.z.resize(n, tg.steps + 1);
  traj.y.col(0) = y0;
  traj.z.col(0) = z0;
  VectorXd x = interleave(y0, z0);
  for (int m = 0; m < tg.steps; ++m) {
    const double tm = tg.midpoint(m);
    Eigen::Matrix2d k;
    k << model.coeffs.a(tm), model.coeffs.b(tm), model.coeffs.c(tm), model.coeffs.d(tm);
    VectorXd rhs = engine.explicit_half(k, x);
    if (gy[m] != 0.0 || gz[m] != 0.0) {
      for (int j = 0; j < n; ++j) {
        const double u = control.values(j, m);
        rhs[2 * j] += tg.dt * gy[m] * model.mask_g1[j] * u;
        rhs[2 * j + 1] += tg.dt * gz[m] * model.mask_g2[j] * u;
      }
    }
    x = engine.solve(k, rhs, tg.time(m + 1));
    for (int j = 0; j < n; ++j) {
      traj.y(j, m + 1) = x[2 * j];
      traj.z(j, m + 1) = x[2 * j + 1];
    }
  }
  return traj;
}

AdjointTrajectory solve_adjoint(const CoupledModel& model, const VectorXd& pT, const VectorXd& wT,
                                const TimeGrid& tg) {
  check_state(model, pT, wT);
  require(tg.steps >= 1 && tg.dt > 0.0, "time grid must have at least one step");
  const int n = model.n();
  // Unknowns ordered (w, p) so the Laplacian block comes first, as in the forward solve.
  StepEngine engine(model.ops.laplacian, model.ops.degenerate, tg.dt);

  AdjointTrajectory adj;
  adj.times = tg.times();
  adj.p.resize(n, tg.steps + 1);
  adj.w.resize(n, tg.steps + 1);
  adj.p_mid.resize(n, tg.steps);
  adj.w_mid.resize(n, tg.steps);
  adj.p.col(tg.steps) = pT;
  adj.w.col(tg.steps) = wT;
  VectorXd phi = interleave(wT, pT);
  for (int m = tg.steps - 1; m >= 0; --m) {
    const double tm = tg.midpoint(m);
    Eigen::Matrix2d kt;
    kt << model.coeffs.a(tm), model.coeffs.c(tm), model.coeffs.b(tm), model.coeffs.d(tm);
    const VectorXd psi = engine.solve(kt, phi, tg.time(m));
    phi = 2.0 * psi - phi;
    for (int j = 0; j < n; ++j) {
      adj.w_mid(j, m) = psi[2 * j];
      adj.p_mid(j, m) = psi[2 * j + 1];
      adj.w(j, m) = phi[2 * j];
      adj.p(j, m) = phi[2 * j + 1];
    }
  }
  return adj;
}

MatrixXd observe(const CoupledModel& model, const AdjointTrajectory& adj, const TimeGrid& tg) {
  require(adj.w_mid.cols() == tg.steps && adj.w_mid.rows() == model.n(),
          "observe: adjoint trajectory does not match the time grid");
  const VectorXd gy = model.y_gates(tg);
  const VectorXd gz = model.z_gates(tg);
  MatrixXd o(model.n(), tg.steps);
  for (int m = 0; m < tg.steps; ++m) {
    o.col(m) = gy[m] * model.mask_g1.cwiseProduct(adj.w_mid.col(m)) +
               gz[m] * model.mask_g2.cwiseProduct(adj.p_mid.col(m));
  }
  return o;
}

VectorXd spectral_project(const VectorXd& v, const EigenBasis<double>& basis, int k,
                          SpectralPart part) {
  require(v.size() == basis.dimension(), "spectral_project: vector length mismatch");
  require(k >= 0 && k <= basis.size(), "spectral_project: k exceeds the basis size");
  const VectorXd low = basis.vectors.leftCols(k) * basis.coefficients(v, k);
  return part == SpectralPart::Low ? low : VectorXd(v - low);
}

namespace {

double sq_norm(const VectorXd& v, const VectorXd& w) {
  return (w.array() * v.array().square()).sum();
}

TimeGrid refine(const TimeGrid& tg) { return {tg.t0, 0.5 * tg.dt, 2 * tg.steps}; }

void finalize(CertificateReport& r, const VectorXd& fine_lhs) {
  r.discretization_error = 0.0;
  for (int m = 0; m < r.lhs.size(); ++m) {
    r.discretization_error = std::max(r.discretization_error, std::abs(r.lhs[m] - fine_lhs[2 * m]));
  }
  r.margin = 1e-6 * r.initial_energy + 2.0 * r.discretization_error;
  r.satisfied = true;
  r.max_excess = -std::numeric_limits<double>::infinity();
  r.max_relative_excess = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < r.lhs.size(); ++m) {
    const double excess = r.lhs[m] - r.rhs[m];
    r.max_excess = std::max(r.max_excess, excess);
    if (r.rhs[m] > 0.0) r.max_relative_excess = std::max(r.max_relative_excess, excess / r.rhs[m]);
    if (!(r.lhs[m] <= r.rhs[m] + r.margin)) r.satisfied = false;
  }
}

VectorXd forward_energy(const CoupledModel& model, const VectorXd& y0, const VectorXd& z0,
                        const TimeGrid& tg) {
  const Trajectory tr = solve_forward(model, y0, z0, ControlSignal::zero(tg, model.n()), tg);
  VectorXd e(tr.snapshots());
  for (int m = 0; m < tr.snapshots(); ++m) {
    e[m] = sq_norm(tr.y.col(m), model.grid.weights) + sq_norm(tr.z.col(m), model.grid.weights);
  }
  return e;
}

VectorXd adjoint_high_energy(const CoupledModel& model, const EigenBasis<double>& lap,
                             const EigenBasis<double>& deg, const VectorXd& pT, const VectorXd& wT,
                             int k, const TimeGrid& tg) {
  const AdjointTrajectory adj = solve_adjoint(model, pT, wT, tg);
  VectorXd e(tg.steps + 1);
  for (int m = 0; m <= tg.steps; ++m) {
    e[m] = sq_norm(spectral_project(adj.p.col(m), deg, k, SpectralPart::High), model.grid.weights) +
           sq_norm(spectral_project(adj.w.col(m), lap, k, SpectralPart::High), model.grid.weights);
  }
  return e;
}

}  // namespace

CertificateReport decay_certificate(const CoupledModel& model, const EigenBasis<double>& lap,
                                    const EigenBasis<double>& deg, const VectorXd& y0,
                                    const VectorXd& z0, int k, const TimeGrid& tg) {
  check_state(model, y0, z0);
  require(k >= 0 && k + 1 <= lap.size() && k + 1 <= deg.size(),
          "decay_certificate: bases need at least k + 1 modes");
  const VectorXd& w = model.grid.weights;
  const double low_y = std::sqrt(sq_norm(spectral_project(y0, lap, k, SpectralPart::Low), w));
  const double low_z = std::sqrt(sq_norm(spectral_project(z0, deg, k, SpectralPart::Low), w));
  require(low_y <= 1e-10 * std::max(1.0, std::sqrt(sq_norm(y0, w))) &&
              low_z <= 1e-10 * std::max(1.0, std::sqrt(sq_norm(z0, w))),
          "decay_certificate: initial data must have no component on the first k modes");

  CertificateReport r;
  r.times = tg.times();
  r.lhs = forward_energy(model, y0, z0, tg);
  r.initial_energy = r.lhs[0];
  const double rate = 2.0 * std::min(lap.values[k], deg.values[k]) - model.coeffs.tau();
  r.rhs = ((-rate) * (r.times.array() - tg.t0)).exp() * r.initial_energy;
  finalize(r, forward_energy(model, y0, z0, refine(tg)));
  return r;
}

CertificateReport adjoint_decay_check(const CoupledModel& model, const EigenBasis<double>& lap,
                                      const EigenBasis<double>& deg, const VectorXd& pT,
                                      const VectorXd& wT, int k, const TimeGrid& tg) {
  check_state(model, pT, wT);
  require(k >= 1 && k <= lap.size() && k <= deg.size(),
          "adjoint_decay_check: bases need at least k modes");
  CertificateReport r;
  r.times = tg.times();
  r.lhs = adjoint_high_energy(model, lap, deg, pT, wT, k, tg);
  r.initial_energy = sq_norm(pT, model.grid.weights) + sq_norm(wT, model.grid.weights);
  const double rate = -2.0 * std::min(deg.values[k - 1], lap.values[k - 1]) + model.coeffs.tau();
  r.rhs = (rate * (tg.t_end() - r.times.array())).exp() * r.initial_energy;
  finalize(r, adjoint_high_energy(model, lap, deg, pT, wT, k, refine(tg)));
  return r;
}

CertificateReport energy_bound_check(const CoupledModel& model, const VectorXd& y0,
                                     const VectorXd& z0, const TimeGrid& tg) {
  check_state(model, y0, z0);
  CertificateReport r;
  r.times = tg.times();
  r.lhs = forward_energy(model, y0, z0, tg);
  r.initial_energy = r.lhs[0];
  r.rhs = (model.coeffs.tau() * (r.times.array() - tg.t0)).exp() * r.initial_energy;
  finalize(r, forward_energy(model, y0, z0, refine(tg)));
  return r;
}

}  // namespace nullctl
