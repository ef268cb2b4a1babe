#include "nullctl/observability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace nullctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double TelescopingSequence::ratio_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i + 2 < ell.size(); ++i) {
    worst = std::max(worst, std::abs((ell[i + 2] - ell[i + 1]) - params.q * (ell[i + 1] - ell[i])));
  }
  return worst;
}

TelescopingSequence telescoping_sequence(const TelescopeParams& params, int n_terms) {
  require(params.q > 0.0 && params.q < 1.0, "telescoping ratio q must lie in (0,1)");
  require(params.ell1 > 0.0 && params.ell1 < params.ell, "telescoping needs 0 < ell1 < ell");
  require(n_terms >= 1, "telescoping needs at least one term");
  TelescopingSequence s;
  s.params = params;
  s.ell.push_back(params.ell1);
  const double span = params.ell - params.ell1;
  double qpow = 1.0;  // q^{n-1}
  for (int n = 1; n <= n_terms; ++n) {
    s.ell.push_back(s.ell.back() + span * (1.0 - params.q) * qpow);
    qpow *= params.q;
  }
  for (int n = 0; n < n_terms; ++n) {
    s.tau.push_back(s.ell[n + 1] - (s.ell[n + 1] - s.ell[n]) / 6.0);
  }
  return s;
}

std::vector<DensityRow> density_check(const IntervalSet& E, const TelescopingSequence& seq) {
  std::vector<DensityRow> rows;
  for (std::size_t i = 0; i < seq.tau.size(); ++i) {
    DensityRow r;
    r.n = static_cast<int>(i) + 1;
    r.lo = seq.ell[i];
    r.hi = seq.ell[i + 1];
    r.tau = seq.tau[i];
    const double len = r.hi - r.lo;
    r.full = E.overlap(r.lo, r.hi);
    r.head = E.overlap(r.lo, r.tau);
    // Relative slack for the rounding in interval endpoints.
    r.third = r.full >= len / 3.0 * (1.0 - 1e-12);
    r.sixth = r.head >= len / 6.0 * (1.0 - 1e-12);
    rows.push_back(r);
  }
  return rows;
}

namespace {

double sq_norm(const VectorXd& v, const VectorXd& w) {
  return (w.array() * v.array().square()).sum();
}

struct Forms {
  HumGramian gram;
  MatrixXd initial;  // N_IJ = <p_I(0), p_J(0)> + <w_I(0), w_J(0)>
};

Forms build_forms(const CoupledModel& model, const EigenBasis<double>& lap,
                  const EigenBasis<double>& deg, int k_modes, const ObservabilityOptions& opt) {
  require(k_modes >= 1, "k_modes must be positive");
  const VectorXd zero = VectorXd::Zero(model.n());
  HumProblem problem{model, lap, deg, 0.0, model.setup.T, k_modes, zero, zero, 0.0, opt.dt,
                     opt.p_modes, opt.w_modes};
  Forms f{build_hum_gramian(problem), MatrixXd()};
  const VectorXd& w = model.grid.weights;
  f.initial = f.gram.p_start.transpose() * w.asDiagonal() * f.gram.p_start +
              f.gram.w_start.transpose() * w.asDiagonal() * f.gram.w_start;
  f.initial = 0.5 * (f.initial + f.initial.transpose()).eval();
  return f;
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration(const MatrixXd& a, VectorXd& x, int& iterations) {
  x = VectorXd::Ones(a.rows());
  for (int i = 0; i < x.size(); ++i) x[i] += 0.1 * std::sin(1.0 + i);
  x.normalize();
  double value = x.dot(a * x);
  const int max_iter = 200000;
  for (iterations = 1; iterations <= max_iter; ++iterations) {
    VectorXd y = a * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
    const double next = x.dot(a * x);
    const double residual = (a * x - next * x).norm();
    const bool settled = std::abs(next - value) <= 1e-15 * std::abs(next);
    value = next;
    if (residual <= 1e-9 * std::abs(value) || (settled && residual <= 1e-6 * std::abs(value))) {
      return value;
    }
  }
  throw ConvergenceError("power iteration on the observability pencil did not converge", max_iter,
                         0.0);
}

}  // namespace

ObservabilityEstimate estimate_observability_constant(const CoupledModel& model,
                                                      const EigenBasis<double>& lap,
                                                      const EigenBasis<double>& deg, TimeNorm norm,
                                                      int k_modes,
                                                      const ObservabilityOptions& opt) {
  const Forms forms = build_forms(model, lap, deg, k_modes, opt);
  const MatrixXd& lambda = forms.gram.matrix;
  const MatrixXd& nmat = forms.initial;
  const int count = forms.gram.size();

  ObservabilityEstimate out;
  out.norm = norm;

  // Unobserved directions: Lambda numerically zero but N not.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(lambda);
  require(es.info() == Eigen::Success, "observation Gramian eigendecomposition failed");
  const VectorXd& mu = es.eigenvalues();
  const double mu_max = std::max(mu.maxCoeff(), 0.0);
  const double n_scale = std::max(nmat.trace(), std::numeric_limits<double>::min());
  std::vector<int> kept;
  for (int i = 0; i < count; ++i) {
    const VectorXd v = es.eigenvectors().col(i);
    if (mu_max == 0.0 || mu[i] <= 1e-12 * mu_max) {
      if (v.dot(nmat * v) > 1e-12 * n_scale) {
        out.finite = false;
        out.value = std::numeric_limits<double>::infinity();
        out.direction = v;
        out.note = "unobservable terminal direction: the observation vanishes while the initial "
                   "norm does not";
        return out;
      }
    } else {
      kept.push_back(i);
    }
  }

  // Restrict to the observed range and whiten Lambda there.
  MatrixXd r(count, kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    r.col(j) = es.eigenvectors().col(kept[j]) / std::sqrt(mu[kept[j]]);
  }
  const MatrixXd reduced = r.transpose() * nmat * r;
  VectorXd x;
  const double l2 = power_iteration(0.5 * (reduced + reduced.transpose()), x, out.iterations);
  VectorXd l2_dir = r * x;
  l2_dir.normalize();
  if (norm == TimeNorm::L2Time) {
    out.value = l2;
    out.direction = l2_dir;
    return out;
  }

  // L1 in time: per-step Grams of the G1 (w) and G2 (p) observation parts.
  const TimeGrid& tg = forms.gram.tg;
  const VectorXd& w = model.grid.weights;
  const VectorXd w1 = w.cwiseProduct(model.mask_g1);
  const VectorXd w2 = w.cwiseProduct(model.mask_g2);
  std::vector<MatrixXd> gw, gp;
  for (int m = 0; m < tg.steps; ++m) {
    MatrixXd om(model.n(), count);
    for (int i = 0; i < count; ++i) om.col(i) = forms.gram.observations[i].col(m);
    if (om.isZero(0.0)) continue;
    gw.push_back(om.transpose() * w1.asDiagonal() * om);
    gp.push_back(om.transpose() * w2.asDiagonal() * om);
  }
  const double dt = tg.dt;
  auto ratio = [&](const VectorXd& xi, VectorXd* grad) {
    double sw = 0.0, sp = 0.0;
    VectorXd dsw = VectorXd::Zero(count), dsp = VectorXd::Zero(count);
    for (std::size_t m = 0; m < gw.size(); ++m) {
      const VectorXd a = gw[m] * xi, b = gp[m] * xi;
      const double qa = xi.dot(a), qb = xi.dot(b);
      if (qa > 0.0) {
        sw += dt * std::sqrt(qa);
        dsw += dt * a / std::sqrt(qa);
      }
      if (qb > 0.0) {
        sp += dt * std::sqrt(qb);
        dsp += dt * b / std::sqrt(qb);
      }
    }
    const double d = sw * sw + sp * sp;
    const VectorXd nx = nmat * xi;
    const double nv = xi.dot(nx);
    if (grad) *grad = (2.0 * nx * d - nv * (2.0 * sw * dsw + 2.0 * sp * dsp)) / (d * d);
    return nv / d;
  };

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  double best = 0.0;
  VectorXd best_dir = l2_dir;
  int total_iterations = 0;
  for (int s = 0; s <= opt.starts; ++s) {
    VectorXd xi(count);
    if (s == 0) {
      xi = l2_dir;
    } else {
      for (int i = 0; i < count; ++i) xi[i] = normal(rng);
      xi.normalize();
    }
    VectorXd g;
    double value = ratio(xi, &g);
    double step = 0.5;
    for (int it = 0; it < 2000 && step > 1e-12; ++it, ++total_iterations) {
      VectorXd tangent = g - xi.dot(g) * xi;
      const double tn = tangent.norm();
      if (tn <= 1e-14 * std::abs(value)) break;
      VectorXd trial = (xi + step * tangent / tn).normalized();
      VectorXd trial_g;
      const double trial_value = ratio(trial, &trial_g);
      if (trial_value > value) {
        xi = trial;
        g = trial_g;
        value = trial_value;
        step = std::min(2.0 * step, 1.0);
      } else {
        step *= 0.5;
      }
    }
    if (value > best) {
      best = value;
      best_dir = xi;
    }
  }
  out.value = best;
  out.direction = best_dir;
  out.iterations = total_iterations;
  std::ostringstream note;
  note << "lower bound: best of " << opt.starts + 1 << " ascent starts";
  out.note = note.str();
  return out;
}

TelescopeTrace telescope_trace(const CoupledModel& model, const VectorXd& pT, const VectorXd& wT,
                               const TelescopingSequence& seq, double dt) {
  const double T = model.setup.T;
  require(seq.ell.back() <= T, "telescoping sequence must lie inside (0, T)");
  const TimeGrid tg = dt > 0.0 ? make_time_grid(0.0, T, dt) : default_time_grid(model.setup, 0.0, T);
  const AdjointTrajectory adj = solve_adjoint(model, pT, wT, tg);
  const VectorXd& w = model.grid.weights;
  const VectorXd w1 = w.cwiseProduct(model.mask_g1);
  const VectorXd w2 = w.cwiseProduct(model.mask_g2);
  auto index = [&](double t) {
    return std::clamp(static_cast<int>(std::lround(t / tg.dt)), 0, tg.steps);
  };
  TelescopeTrace tr;
  for (std::size_t n = 0; n < seq.tau.size(); ++n) {
    const int at = index(seq.ell[n]);
    tr.A.push_back(std::sqrt(sq_norm(adj.p.col(at), w) + sq_norm(adj.w.col(at), w)));
    double sum = 0.0;
    int hits = 0;
    for (int m = index(seq.ell[n]); m <= index(seq.tau[n]); ++m) {
      const double t = tg.time(m);
      if (t <= seq.ell[n] || t >= seq.tau[n] || !model.setup.E.contains(t)) continue;
      sum += std::sqrt(sq_norm(adj.p.col(m), w2)) + std::sqrt(sq_norm(adj.w.col(m), w1));
      ++hits;
    }
    tr.B_mean.push_back(hits > 0 ? sum / hits : std::numeric_limits<double>::quiet_NaN());
  }
  return tr;
}

InterpolationFit interpolation_blowup_fit(const CoupledModel& model, const EigenBasis<double>& lap,
                                          const EigenBasis<double>& deg,
                                          const std::vector<double>& times, double sigma,
                                          int k_modes, int samples, std::uint64_t seed,
                                          double K_cap, double dt) {
  require(sigma > 0.0 && sigma != 1.0, "interpolation fit needs sigma > 0 with sigma != 1");
  require(k_modes >= 1 && k_modes <= lap.size() && k_modes <= deg.size(),
          "interpolation fit: k_modes exceeds the eigenbasis size");
  require(samples >= 1 && times.size() >= 2, "interpolation fit needs samples and two times");
  const double T = model.setup.T;
  const TimeGrid tg = dt > 0.0 ? make_time_grid(0.0, T, dt) : default_time_grid(model.setup, 0.0, T);

  InterpolationFit fit;
  fit.K_cap = K_cap;
  std::vector<int> idx;
  for (double t : times) {
    require(t >= 0.0 && T - t >= tg.dt, "sample times must lie in [0, T - dt]");
    const int m = static_cast<int>(std::lround(t / tg.dt));
    idx.push_back(m);
    fit.times.push_back(tg.time(m));
    fit.max_ratio.push_back(0.0);
    fit.predictor.push_back(std::pow(T - tg.time(m), sigma / (sigma - 1.0)));
  }

  const VectorXd& w = model.grid.weights;
  const VectorXd w1 = w.cwiseProduct(model.mask_g1);
  const VectorXd w2 = w.cwiseProduct(model.mask_g2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < samples; ++s) {
    VectorXd a(k_modes), b(k_modes);
    for (int i = 0; i < k_modes; ++i) a[i] = normal(rng);
    for (int i = 0; i < k_modes; ++i) b[i] = normal(rng);
    const VectorXd pT = deg.vectors.leftCols(k_modes) * a;
    const VectorXd wT = lap.vectors.leftCols(k_modes) * b;
    const double terminal = std::sqrt(sq_norm(pT, w) + sq_norm(wT, w));
    const AdjointTrajectory adj = solve_adjoint(model, pT, wT, tg);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const VectorXd p = adj.p.col(idx[i]), q = adj.w.col(idx[i]);
      const double observed = std::sqrt(sq_norm(p, w2) + sq_norm(q, w1));
      if (!(observed > 0.0)) {
        ++fit.excluded;
        continue;
      }
      const double r = (sq_norm(p, w) + sq_norm(q, w)) / (observed * terminal);
      fit.max_ratio[i] = std::max(fit.max_ratio[i], r);
    }
  }

  std::vector<double> x, y;
  bool finite = true;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double r = fit.max_ratio[i];
    if (!(r > 0.0) || !std::isfinite(r)) {
      finite = false;
      continue;
    }
    x.push_back(fit.predictor[i]);
    y.push_back(std::log(r));
    fit.K_envelope = std::max(fit.K_envelope, std::log(r) / (1.0 + fit.predictor[i]));
  }
  if (x.size() >= 2) fit.fit = fit_line(x, y);
  fit.bounded = finite && x.size() >= 2 && fit.K_envelope <= K_cap;
  return fit;
}

NegativeReport negative_demo(NegativeCase which, const CoupledModel& model, const VectorXd& y0,
                             const VectorXd& z0, int controls, std::uint64_t seed, double dt) {
  const SwitchingSetup& s = model.setup;
  s.validate();
  require(s.mode == SwitchingMode::AlternatingIntervals,
          "the negative demonstration uses the alternating system");
  require(controls >= 1, "need at least one random control");
  if (which == NegativeCase::ZUncontrolled) {
    require(std::abs(s.E.measure() - s.T) <= 1e-12 * s.T, "case (1) needs chi_E = 1 on (0,T)");
    require(model.coeffs.c.sup_norm() == 0.0, "case (1) needs c = 0");
  } else {
    require(std::abs(s.F.measure() - s.T) <= 1e-12 * s.T, "case (2) needs chi_F = 1 on (0,T)");
    require(model.coeffs.b.sup_norm() == 0.0, "case (2) needs b = 0");
  }
  const TimeGrid tg = dt > 0.0 ? make_time_grid(0.0, s.T, dt) : default_time_grid(s, 0.0, s.T);
  const VectorXd& w = model.grid.weights;
  const bool z_case = which == NegativeCase::ZUncontrolled;

  const Trajectory free = solve_forward(model, y0, z0, ControlSignal::zero(tg, model.n()), tg);
  const VectorXd free_fixed = z_case ? free.z.col(tg.steps) : free.y.col(tg.steps);
  const VectorXd free_other = z_case ? free.y.col(tg.steps) : free.z.col(tg.steps);

  NegativeReport r;
  r.which = which;
  r.controls = controls;
  r.free_norm = std::sqrt(sq_norm(free_fixed, w));
  r.initial_norm = std::sqrt(sq_norm(z_case ? z0 : y0, w));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int c = 0; c < controls; ++c) {
    ControlSignal u = ControlSignal::zero(tg, model.n());
    for (int m = 0; m < tg.steps; ++m) {
      for (int j = 0; j < model.n(); ++j) u.values(j, m) = normal(rng);
    }
    const Trajectory run = solve_forward(model, y0, z0, u, tg);
    const VectorXd fixed = z_case ? run.z.col(tg.steps) : run.y.col(tg.steps);
    const VectorXd other = z_case ? run.y.col(tg.steps) : run.z.col(tg.steps);
    r.max_deviation = std::max(r.max_deviation, (fixed - free_fixed).cwiseAbs().maxCoeff());
    r.controlled_spread = std::max(r.controlled_spread, (other - free_other).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace nullctl
