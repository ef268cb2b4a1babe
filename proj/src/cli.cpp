#include "nullctl/cli.hpp"

#include "nullctl/lebeau_robbiano.hpp"
#include "nullctl/multiprecision.hpp"
#include "nullctl/observability.hpp"
#include "nullctl/spectral_inequality.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>

namespace nullctl::cli {

using json = nlohmann::ordered_json;
using Eigen::VectorXd;

namespace {

enum class Kind { Int, OptInt, Number, OptNumber, String, Interval, Intervals, NumberList, Coefficient };

struct KeySpec {
  KeyInfo info;
  Kind kind;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {{"seed", 1, "seed of the single generator behind all sampling"}, Kind::Int},
      {{"output_dir", "nullctl_output", "output directory"}, Kind::String},
      {{"T", 1.0, "horizon"}, Kind::Number},
      {{"n", 64, "cells of the space grid"}, Kind::Int},
      {{"alpha", 0.5, "degeneracy exponent in (0,2)"}, Kind::Number},
      {{"grading", 1.0, "mesh grading exponent toward x = 0 (1 is uniform)"}, Kind::Number},
      {{"mode", "alternating", "alternating (y on E, z on F = complement) or shared (both on E)"},
       Kind::String},
      {{"G1", json::array({json::array({0.1, 0.4})}), "y-control region, list of [lo, hi]"},
       Kind::Intervals},
      {{"G2", json::array({json::array({0.6, 0.9})}), "z-control region, list of [lo, hi]"},
       Kind::Intervals},
      {{"E", json::array({json::array({0.0, 1.0})}), "time set E, list of [lo, hi]"},
       Kind::Intervals},
      {{"E_periodic", 0, "if m > 0, E is the union over j < m of T (j/m + 1/(2m), (j+1)/m)"},
       Kind::Int},
      {{"E_cantor_level", -1, "if >= 0, E is the fat Cantor approximant of (0,T) at this level"},
       Kind::Int},
      {{"a", 0.0, "coupling a(t): number or {breaks, values}"}, Kind::Coefficient},
      {{"b", 0.0, "coupling b(t)"}, Kind::Coefficient},
      {{"c", 0.5, "coupling c(t)"}, Kind::Coefficient},
      {{"d", 0.0, "coupling d(t)"}, Kind::Coefficient},
      {{"init", "random", "initial data: random, eigen (first eigenvectors) or zero"}, Kind::String},
      {{"dt", 0.0, "time step; 0 selects the default aligned grid"}, Kind::Number},
      {{"operator", "both", "laplacian, degenerate or both"}, Kind::String},
      {{"precision", "auto", "double, mp (multiprecision) or auto"}, Kind::String},
      {{"eigen_count", 60, "eigenpairs computed by spectrum"}, Kind::Int},
      {{"fit_first", 10, "first mode of the growth fit"}, Kind::Int},
      {{"fit_last", 60, "last mode of the growth fit"}, Kind::Int},
      {{"region_laplacian", json::array({0.2, 0.3}), "observation region for the Laplacian"},
       Kind::Interval},
      {{"region_degenerate", json::array({0.5, 0.7}), "observation region for the degenerate operator"},
       Kind::Interval},
      {{"k_first", 2, "first k of the constant series"}, Kind::Int},
      {{"k_last", 15, "last k of the constant series"}, Kind::Int},
      {{"gamma", 1.9, "gamma entering sigma(alpha)"}, Kind::Number},
      {{"sigma", nullptr, "exponent sigma; null derives it from alpha and gamma"}, Kind::OptNumber},
      {{"hum_k", 2, "modes per family controlled by hum"}, Kind::Int},
      {{"t_start", 0.0, "hum window start"}, Kind::Number},
      {{"t_end", nullptr, "hum window end; null means T"}, Kind::OptNumber},
      {{"regularization", -1.0, "Tikhonov epsilon; negative selects the default"}, Kind::Number},
      {{"p_modes", -1, "degenerate terminal family size; negative means the mode count"}, Kind::Int},
      {{"w_modes", -1, "Laplacian terminal family size; negative means the mode count"}, Kind::Int},
      {{"C0", 64.0, "schedule constant, > 32"}, Kind::Number},
      {{"k_max", 3, "number of stages"}, Kind::Int},
      {{"rho_cap", nullptr, "mode cap; null means n/4 for lr and no cap for schedule"}, Kind::OptInt},
      {{"k_modes", 2, "modes per family in observability estimates"}, Kind::Int},
      {{"norms", "both", "L2, L1 or both"}, Kind::String},
      {{"starts", 32, "random starts of the L1 ascent"}, Kind::Int},
      {{"ell", nullptr, "telescoping accumulation point; null means T"}, Kind::OptNumber},
      {{"ell1", nullptr, "first telescoping point; null means T/2"}, Kind::OptNumber},
      {{"q", 0.5, "telescoping ratio in (0,1)"}, Kind::Number},
      {{"n_terms", 8, "telescoping terms"}, Kind::Int},
      {{"interp_times", json::array({0.0, 0.25, 0.5, 0.75, 0.9}), "sample times of the interpolation fit"},
       Kind::NumberList},
      {{"interp_samples", 16, "random terminal data of the interpolation fit"}, Kind::Int},
      {{"K_cap", 100.0, "bound on K for the interpolation verdict"}, Kind::Number},
      {{"negative_case", 1, "1: z uncontrolled (chi_E = 1, c = 0); 2: y uncontrolled (chi_F = 1, b = 0)"},
       Kind::Int},
      {{"controls", 16, "random controls of the negative demonstration"}, Kind::Int},
  };
  return specs;
}

const KeySpec* find_key(const std::string& name) {
  for (const KeySpec& k : key_specs()) {
    if (k.info.name == name) return &k;
  }
  return nullptr;
}

bool is_int(const json& v) {
  if (v.is_number_integer()) return true;
  return v.is_number_float() && std::isfinite(v.get<double>()) &&
         v.get<double>() == std::trunc(v.get<double>()) && std::abs(v.get<double>()) < 1e15;
}

bool is_pair(const json& v) {
  return v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number();
}

void check_type(const std::string& name, Kind kind, const json& v) {
  bool ok = false;
  switch (kind) {
    case Kind::Int: ok = is_int(v); break;
    case Kind::OptInt: ok = v.is_null() || is_int(v); break;
    case Kind::Number: ok = v.is_number(); break;
    case Kind::OptNumber: ok = v.is_null() || v.is_number(); break;
    case Kind::String: ok = v.is_string(); break;
    case Kind::Interval: ok = is_pair(v); break;
    case Kind::Intervals:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), is_pair);
      break;
    case Kind::NumberList:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
      break;
    case Kind::Coefficient:
      if (v.is_number()) {
        ok = true;
      } else if (v.is_object() && v.size() == 2 && v.contains("breaks") && v.contains("values")) {
        const auto numbers = [](const json& a) {
          return a.is_array() && std::all_of(a.begin(), a.end(), [](const json& x) { return x.is_number(); });
        };
        ok = numbers(v["breaks"]) && numbers(v["values"]);
      }
      break;
  }
  require(ok, "config key '" + name + "' has the wrong type: " + v.dump());
}

void set_key(json& config, const std::string& name, json value) {
  const KeySpec* spec = find_key(name);
  require(spec != nullptr, "unknown config key '" + name + "'");
  if (spec->kind == Kind::Int || spec->kind == Kind::OptInt) {
    if (!value.is_null() && is_int(value)) value = static_cast<long long>(value.get<double>());
  }
  check_type(name, spec->kind, value);
  config[name] = std::move(value);
}

// Typed accessors on a resolved config.
long long get_int(const json& c, const char* key) { return c.at(key).get<long long>(); }
double get_num(const json& c, const char* key) { return c.at(key).get<double>(); }
std::string get_str(const json& c, const char* key) { return c.at(key).get<std::string>(); }

int get_count(const json& c, const char* key, long long lo, long long hi) {
  const long long v = get_int(c, key);
  require(v >= lo && v <= hi, std::string("config key '") + key + "' must lie in [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double get_positive(const json& c, const char* key) {
  const double v = get_num(c, key);
  require(std::isfinite(v) && v > 0.0, std::string("config key '") + key + "' must be positive");
  return v;
}

std::string get_choice(const json& c, const char* key, std::initializer_list<const char*> allowed) {
  const std::string v = get_str(c, key);
  std::string list;
  for (const char* a : allowed) {
    if (v == a) return v;
    list += list.empty() ? a : std::string(", ") + a;
  }
  throw ValidationError(std::string("config key '") + key + "' must be one of: " + list);
}

IntervalSet intervals(const json& v) {
  std::vector<Interval> pieces;
  for (const json& p : v) pieces.push_back({p[0].get<double>(), p[1].get<double>()});
  return IntervalSet(std::move(pieces));
}

PiecewiseConstant coefficient(const json& v) {
  if (v.is_number()) return PiecewiseConstant::constant(v.get<double>());
  return PiecewiseConstant(v["breaks"].get<std::vector<double>>(), v["values"].get<std::vector<double>>());
}

/// Everything a model-based command needs, built and validated up front.
struct Context {
  const json& config;
  std::mt19937_64 rng;
  double T = 1.0;
  int n = 0;
  double alpha = 0.5;
  Grid<double> grid;

  explicit Context(const json& c)
      : config(c), rng(static_cast<std::uint64_t>(get_int(c, "seed"))) {
    T = get_positive(c, "T");
    n = get_count(c, "n", 8, 100000);
    alpha = get_num(c, "alpha");
    OperatorSpec::degenerate(alpha).validate();
    grid = make_grid<double>(n, get_num(c, "grading"));
  }

  SwitchingSetup setup() const {
    const int periodic = get_count(config, "E_periodic", 0, 1 << 20);
    const int level = get_count(config, "E_cantor_level", -1, 20);
    require(!(periodic > 0 && level >= 0), "E_periodic and E_cantor_level are exclusive");
    IntervalSet E;
    if (periodic > 0) {
      std::vector<Interval> pieces;
      for (int j = 0; j < periodic; ++j) {
        pieces.push_back({T * (j + 0.5) / periodic, T * (j + 1.0) / periodic});
      }
      E = IntervalSet(std::move(pieces));
    } else if (level >= 0) {
      E = IntervalSet::fat_cantor(0.0, T, level);
    } else {
      E = intervals(config.at("E"));
    }
    const IntervalSet G1 = intervals(config.at("G1")), G2 = intervals(config.at("G2"));
    const std::string mode = get_choice(config, "mode", {"alternating", "shared"});
    SwitchingSetup s = mode == "shared" ? SwitchingSetup::shared(T, G1, G2, E)
                                        : SwitchingSetup::alternating(T, G1, G2, E);
    s.validate();
    return s;
  }

  CouplingCoefficients coeffs() const {
    return {coefficient(config.at("a")), coefficient(config.at("b")), coefficient(config.at("c")),
            coefficient(config.at("d"))};
  }

  std::uint64_t next_seed() { return rng(); }

  /// y0, z0 per the init key; random draws come from the shared generator.
  std::pair<VectorXd, VectorXd> initial_data(const EigenBasis<double>& lap, const EigenBasis<double>& deg) {
    const std::string init = get_choice(config, "init", {"random", "eigen", "zero"});
    VectorXd y0 = VectorXd::Zero(n), z0 = VectorXd::Zero(n);
    if (init == "eigen") {
      y0 = lap.vectors.col(0);
      z0 = deg.vectors.col(0);
    } else if (init == "random") {
      std::normal_distribution<double> normal;
      for (int j = 0; j < n; ++j) y0[j] = normal(rng);
      for (int j = 0; j < n; ++j) z0[j] = normal(rng);
    }
    return {y0, z0};
  }
};

double weighted_norm(const VectorXd& v, const VectorXd& w) {
  return std::sqrt((w.array() * v.array().square()).sum());
}

// ---- spectrum ------------------------------------------------------------

template <typename Scalar>
void spectrum_for(const json& c, int n, double alpha, double grading, const std::string& which,
                  ReportBundle& out) {
  const int count = get_count(c, "eigen_count", 1, n);
  const int first = get_count(c, "fit_first", 1, count);
  const int last = get_count(c, "fit_last", first, count);
  const Grid<Scalar> grid = make_grid<Scalar>(n, grading);
  Table& values = out.add_table("eigenvalues", {"operator", "k", "eigenvalue"});
  Table& growth = out.add_table("growth", {"operator", "first", "last", "exponent", "prefactor", "residual"});
  for (const std::string op : {"laplacian", "degenerate"}) {
    if (which != "both" && which != op) continue;
    const OperatorSpec spec = op == "laplacian" ? OperatorSpec::laplacian() : OperatorSpec::degenerate(alpha);
    const EigenBasis<double> basis = eigendecompose(assemble_operator(grid, spec), count).to_double();
    for (int k = 0; k < basis.size(); ++k) values.add(op, k + 1, basis.values[k]);
    if (last - first + 1 >= 10) {
      const GrowthReport g = eigenvalue_growth_fit(basis.values, first, last);
      growth.add(op, g.first, g.last, g.exponent, g.prefactor, g.residual);
    }
  }
}

ReportBundle run_spectrum(const json& c) {
  ReportBundle out;
  const int n = get_count(c, "n", 8, 100000);
  const double alpha = get_num(c, "alpha");
  OperatorSpec::degenerate(alpha).validate();
  const std::string which = get_choice(c, "operator", {"laplacian", "degenerate", "both"});
  const std::string precision = get_choice(c, "precision", {"auto", "double", "mp"});
  if (precision == "mp") {
    spectrum_for<Mp>(c, n, alpha, get_num(c, "grading"), which, out);
  } else {
    spectrum_for<double>(c, n, alpha, get_num(c, "grading"), which, out);
  }
  return out;
}

// ---- spectral-constant ---------------------------------------------------

template <typename Scalar>
void constants_for(const json& c, int n, double alpha, double grading, const std::string& which,
                   ReportBundle& out) {
  const int k_first = get_count(c, "k_first", 1, n);
  const int k_last = get_count(c, "k_last", k_first, n);
  const double sigma = c.at("sigma").is_null() ? sigma_for_alpha(alpha, get_num(c, "gamma"))
                                               : get_positive(c, "sigma");
  const Grid<Scalar> grid = make_grid<Scalar>(n, grading);
  Table& series = out.add_table("series", {"operator", "k", "eigenvalue", "log_constant", "predictor",
                                           "ratio"});
  Table& fit = out.add_table("fit", {"operator", "sigma", "slope", "intercept", "r_squared", "ratio_min",
                                     "ratio_max", "ratio_spread", "all_finite", "positive_slope"});
  for (const std::string op : {"laplacian", "degenerate"}) {
    if (which != "both" && which != op) continue;
    const bool lap = op == "laplacian";
    const OperatorSpec spec = lap ? OperatorSpec::laplacian() : OperatorSpec::degenerate(alpha);
    const json& r = c.at(lap ? "region_laplacian" : "region_degenerate");
    const IntervalSet region = IntervalSet::single(r[0].get<double>(), r[1].get<double>());
    const EigenBasis<Scalar> basis = eigendecompose(assemble_operator(grid, spec), k_last);
    const ConstantSeries s = constant_series(basis, grid, region, k_first, k_last);
    const Predictor p = lap ? Predictor::sqrt_lambda() : Predictor::lambda_sigma(sigma);
    for (std::size_t i = 0; i < s.ks.size(); ++i) {
      const double x = p(s.lambdas[i]);
      series.add(op, s.ks[i], s.lambdas[i], s.log_constants[i], x, s.log_constants[i] / x);
    }
    if (s.ks.size() >= 6) {
      const ExponentCheck e = growth_exponent_check(s, p);
      fit.add(op, p.sigma, e.fit.slope, e.fit.intercept, e.fit.r_squared, e.ratio_min, e.ratio_max,
              e.ratio_spread, e.all_finite, e.positive_slope);
    }
  }
}

ReportBundle run_spectral_constant(const json& c) {
  ReportBundle out;
  const int n = get_count(c, "n", 8, 100000);
  const double alpha = get_num(c, "alpha");
  OperatorSpec::degenerate(alpha).validate();
  const std::string which = get_choice(c, "operator", {"laplacian", "degenerate", "both"});
  const std::string precision = get_choice(c, "precision", {"auto", "double", "mp"});
  // Restricted Grams are too ill-conditioned for double beyond a few modes.
  if (precision == "double") {
    constants_for<double>(c, n, alpha, get_num(c, "grading"), which, out);
  } else {
    constants_for<Mp>(c, n, alpha, get_num(c, "grading"), which, out);
  }
  return out;
}

// ---- hum -----------------------------------------------------------------

ReportBundle run_hum(const json& c) {
  Context ctx(c);
  const CoupledModel model(ctx.grid, make_operators(ctx.grid, ctx.alpha), ctx.setup(), ctx.coeffs());
  const int k = get_count(c, "hum_k", 1, ctx.n / 2);
  const int p_modes = get_count(c, "p_modes", -1, ctx.n / 2);
  const int w_modes = get_count(c, "w_modes", -1, ctx.n / 2);
  const int modes = std::max({k, p_modes, w_modes, 1});
  const EigenBasis<double> lap = eigendecompose(model.ops.laplacian, modes);
  const EigenBasis<double> deg = eigendecompose(model.ops.degenerate, modes);
  const auto [y0, z0] = ctx.initial_data(lap, deg);
  const double t_end = c.at("t_end").is_null() ? ctx.T : get_num(c, "t_end");
  const HumProblem problem{model, lap, deg, get_num(c, "t_start"), t_end, k, y0, z0,
                           get_num(c, "regularization"), get_num(c, "dt"), p_modes, w_modes};
  const HumGramian gram = build_hum_gramian(problem);
  const PartialControlResult r = synthesize_partial_control(problem, gram);

  const VectorXd& w = ctx.grid.weights;
  const double initial = std::pow(weighted_norm(y0, w), 2) + std::pow(weighted_norm(z0, w), 2);
  const int last = r.trajectory.snapshots() - 1;
  ReportBundle out;
  out.add_table("summary", {"k", "p_modes", "w_modes", "steps", "dt", "projected_residual",
                            "relative_residual", "control_energy", "gramian_condition", "regularization",
                            "initial_norm", "y_terminal", "z_terminal"})
      .add(k, gram.p_modes, gram.w_modes, gram.tg.steps, gram.tg.dt, r.projected_residual,
           initial > 0.0 ? std::sqrt(r.projected_residual / initial) : 0.0, r.control_energy,
           r.gramian_condition, r.regularization, std::sqrt(initial),
           weighted_norm(r.trajectory.y.col(last), w), weighted_norm(r.trajectory.z.col(last), w));
  Table& xi = out.add_table("coefficients", {"index", "family", "mode", "xi"});
  for (int i = 0; i < gram.size(); ++i) {
    const bool p = i < gram.p_modes;
    xi.add(i, p ? "p" : "w", p ? i + 1 : i - gram.p_modes + 1, r.xi[i]);
  }
  Table& u = out.add_table("control", {"t_start", "t_end", "control_norm"});
  for (int m = 0; m < r.control.steps(); ++m) {
    u.add(r.control.times[m], r.control.times[m + 1], weighted_norm(r.control.values.col(m), w));
  }
  return out;
}

// ---- lr ------------------------------------------------------------------

ReportBundle run_lr(const json& c) {
  Context ctx(c);
  const CoupledModel model(ctx.grid, make_operators(ctx.grid, ctx.alpha), ctx.setup(), ctx.coeffs());
  const int rho_cap = c.at("rho_cap").is_null() ? ctx.n / 4 : get_count(c, "rho_cap", 1, ctx.n / 4);
  const Schedule schedule = plan_schedule(ctx.T, get_num(c, "C0"), get_count(c, "k_max", 1, 50), rho_cap);
  const EigenBasis<double> lap = eigendecompose(model.ops.laplacian, rho_cap);
  const EigenBasis<double> deg = eigendecompose(model.ops.degenerate, rho_cap);
  const auto [y0, z0] = ctx.initial_data(lap, deg);
  const HypothesisReport h = validate_hypotheses(model.coeffs, model.setup);
  const SwitchingControlResult r = synthesize_switching_control(model, lap, deg, y0, z0, schedule);
  const BoundReport b = bound_tracking(r);

  ReportBundle out;
  Table& plan = out.add_table("schedule", {"stage", "t_start", "t_mid", "t_next", "rho"});
  for (const Stage& s : schedule.stages) plan.add(s.index, s.t_start, s.t_mid, s.t_next, s.rho);
  Table& st = out.add_table("stages", {"stage", "rho", "state_start", "state_mid", "state_next",
                                       "annihilation", "relative_annihilation", "control_energy",
                                       "gramian_condition", "alpha", "beta", "theta", "theta_formula",
                                       "contraction"});
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const StageRecord& s = r.stages[i];
    st.add(s.stage.index, s.stage.rho, s.state_start, s.state_mid, s.state_next, s.annihilation,
           r.initial_norm > 0.0 ? s.annihilation / r.initial_norm : 0.0, s.control_energy,
           s.gramian_condition, s.alpha, s.beta, s.theta, s.theta_formula, b.contraction[i]);
  }
  out.add_table("summary", {"h1", "h2", "l0", "i0", "lbar0", "ibar0", "initial_norm", "y_terminal",
                            "z_terminal", "terminal_ratio", "total_energy", "L_measured",
                            "contracting_after_first", "decreasing", "crossover_stage"})
      .add(h.h1, h.h2, h.l0, h.i0, h.lbar0, h.ibar0, r.initial_norm, r.y_terminal, r.z_terminal,
           r.initial_norm > 0.0 ? (r.y_terminal + r.z_terminal) / r.initial_norm : 0.0, b.total_energy,
           b.L_measured, b.contracting_after_first, b.decreasing, b.crossover_stage);
  const VectorXd& w = ctx.grid.weights;
  Table& u = out.add_table("control", {"t_start", "t_end", "control_norm", "outside_regions"});
  const VectorXd outside = (VectorXd::Ones(ctx.n) - model.mask_g1 - model.mask_g2).cwiseMax(0.0);
  for (int m = 0; m < r.control.steps(); ++m) {
    const VectorXd col = r.control.values.col(m);
    u.add(r.control.times[m], r.control.times[m + 1], weighted_norm(col, w),
          weighted_norm(col.cwiseProduct(outside), w));
  }
  return out;
}

// ---- observability -------------------------------------------------------

ReportBundle run_observability(const json& c) {
  Context ctx(c);
  const CoupledModel model(ctx.grid, make_operators(ctx.grid, ctx.alpha), ctx.setup(), ctx.coeffs());
  const int k_modes = get_count(c, "k_modes", 1, ctx.n / 2);
  const int p_modes = get_count(c, "p_modes", -1, ctx.n / 2);
  const int w_modes = get_count(c, "w_modes", -1, ctx.n / 2);
  const int modes = std::max({k_modes, p_modes, w_modes});
  const EigenBasis<double> lap = eigendecompose(model.ops.laplacian, modes);
  const EigenBasis<double> deg = eigendecompose(model.ops.degenerate, modes);
  const std::string norms = get_choice(c, "norms", {"L2", "L1", "both"});
  ObservabilityOptions opt;
  opt.p_modes = p_modes;
  opt.w_modes = w_modes;
  opt.starts = get_count(c, "starts", 0, 100000);
  opt.dt = get_num(c, "dt");
  const double dt = opt.dt;

  ReportBundle out;
  Table& est = out.add_table("constants", {"norm", "k_modes", "finite", "value", "iterations", "note"});
  for (const auto& [name, norm] : {std::pair{"L2", TimeNorm::L2Time}, std::pair{"L1", TimeNorm::L1Time}}) {
    if (norms != "both" && norms != name) continue;
    opt.seed = ctx.next_seed();
    const ObservabilityEstimate e = estimate_observability_constant(model, lap, deg, norm, k_modes, opt);
    est.add(name, k_modes, e.finite, e.value, e.iterations, e.note);
  }

  TelescopeParams tp;
  tp.ell = c.at("ell").is_null() ? ctx.T : get_num(c, "ell");
  tp.ell1 = c.at("ell1").is_null() ? 0.5 * tp.ell : get_num(c, "ell1");
  tp.q = get_num(c, "q");
  require(tp.ell <= ctx.T, "telescoping accumulation point must not exceed T");
  const TelescopingSequence seq = telescoping_sequence(tp, get_count(c, "n_terms", 1, 200));
  const std::vector<DensityRow> rows = density_check(model.setup.E, seq);
  std::normal_distribution<double> normal;
  VectorXd a(k_modes), bcoef(k_modes);
  for (int i = 0; i < k_modes; ++i) a[i] = normal(ctx.rng);
  for (int i = 0; i < k_modes; ++i) bcoef[i] = normal(ctx.rng);
  const TelescopeTrace trace = telescope_trace(model, deg.vectors.leftCols(k_modes) * a,
                                               lap.vectors.leftCols(k_modes) * bcoef, seq, dt);
  Table& tel = out.add_table("telescoping", {"n", "ell_n", "ell_next", "tau_n", "measure_full",
                                             "measure_head", "third", "sixth", "A", "B_mean"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DensityRow& r = rows[i];
    tel.add(r.n, r.lo, r.hi, r.tau, r.full, r.head, r.third, r.sixth, trace.A[i], trace.B_mean[i]);
  }
  out.add_table("telescoping_check", {"ratio_defect", "sum_defect"})
      .add(seq.ratio_defect(), std::abs((seq.ell.back() - seq.ell.front()) -
                                        (tp.ell - tp.ell1) * (1.0 - std::pow(tp.q, seq.tau.size()))));

  const double sigma = c.at("sigma").is_null() ? sigma_for_alpha(ctx.alpha, get_num(c, "gamma"))
                                               : get_positive(c, "sigma");
  const InterpolationFit fit = interpolation_blowup_fit(
      model, lap, deg, c.at("interp_times").get<std::vector<double>>(), sigma, k_modes,
      get_count(c, "interp_samples", 1, 100000), ctx.next_seed(), get_positive(c, "K_cap"), dt);
  Table& it = out.add_table("interpolation", {"t", "max_ratio", "log_max_ratio", "predictor"});
  for (std::size_t i = 0; i < fit.times.size(); ++i) {
    it.add(fit.times[i], fit.max_ratio[i], std::log(fit.max_ratio[i]), fit.predictor[i]);
  }
  out.add_table("interpolation_fit", {"sigma", "slope", "intercept", "r_squared", "K_envelope", "K_cap",
                                      "excluded", "bounded"})
      .add(sigma, fit.fit.slope, fit.fit.intercept, fit.fit.r_squared, fit.K_envelope, fit.K_cap,
           fit.excluded, fit.bounded);
  return out;
}

// ---- negative ------------------------------------------------------------

ReportBundle run_negative(const json& c) {
  Context ctx(c);
  const CoupledModel model(ctx.grid, make_operators(ctx.grid, ctx.alpha), ctx.setup(), ctx.coeffs());
  const int which = get_count(c, "negative_case", 1, 2);
  const EigenBasis<double> lap = eigendecompose(model.ops.laplacian, 1);
  const EigenBasis<double> deg = eigendecompose(model.ops.degenerate, 1);
  const auto [y0, z0] = ctx.initial_data(lap, deg);
  const NegativeReport r = negative_demo(static_cast<NegativeCase>(which), model, y0, z0,
                                         get_count(c, "controls", 1, 100000), ctx.next_seed(),
                                         get_num(c, "dt"));
  // Closed form for eigenvector data when the uncontrolled equation has no zeroth-order term.
  double predicted = std::numeric_limits<double>::quiet_NaN();
  if (get_str(c, "init") == "eigen") {
    if (which == 1 && model.coeffs.d.sup_norm() == 0.0) predicted = std::exp(-deg.values[0] * ctx.T) * r.initial_norm;
    if (which == 2 && model.coeffs.a.sup_norm() == 0.0) predicted = std::exp(-lap.values[0] * ctx.T) * r.initial_norm;
  }
  ReportBundle out;
  out.add_table("report", {"case", "controls", "max_deviation", "free_norm", "predicted_free_norm",
                           "initial_norm", "controlled_spread"})
      .add(which, r.controls, r.max_deviation, r.free_norm, predicted, r.initial_norm, r.controlled_spread);
  return out;
}

// ---- schedule ------------------------------------------------------------

ReportBundle run_schedule(const json& c) {
  const double T = get_positive(c, "T");
  const int cap = c.at("rho_cap").is_null() ? std::numeric_limits<int>::max()
                                            : get_count(c, "rho_cap", 1, std::numeric_limits<int>::max());
  const Schedule s = plan_schedule(T, get_num(c, "C0"), get_count(c, "k_max", 1, 50), cap);
  ReportBundle out;
  Table& t = out.add_table("stages", {"t_start", "t_mid", "t_next", "rho"});
  for (const Stage& st : s.stages) t.add(st.t_start, st.t_mid, st.t_next, st.rho);
  return out;
}

json base_manifest(const std::string& command, const json& config) {
  json m = json::object();
  m["tool"] = "nullctl";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = config.at("seed");
  m["config"] = config;
  return m;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> list = {"spectrum", "spectral-constant", "hum", "lr",
                                                "observability", "negative", "schedule"};
  return list;
}

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> out;
    for (const KeySpec& k : key_specs()) out.push_back(k.info);
    return out;
  }();
  return keys;
}

json resolve_config(const Invocation& inv) {
  json config = json::object();
  for (const KeySpec& k : key_specs()) config[k.info.name] = k.info.default_value;
  if (!inv.config_path.empty()) {
    std::ifstream in(inv.config_path);
    require(static_cast<bool>(in), "cannot open config file " + inv.config_path);
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError("config file " + inv.config_path + " is not valid JSON: " + e.what());
    }
    require(file.is_object(), "config file must hold a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) set_key(config, it.key(), it.value());
  }
  for (const std::string& o : inv.overrides) {
    const auto eq = o.find('=');
    require(eq != std::string::npos && eq > 0, "override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq), text = o.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    set_key(config, key, value);
  }
  if (inv.seed) config["seed"] = *inv.seed;
  return config;
}

ReportBundle execute(const std::string& command, const json& config) {
  ReportBundle out;
  if (command == "spectrum") {
    out = run_spectrum(config);
  } else if (command == "spectral-constant") {
    out = run_spectral_constant(config);
  } else if (command == "hum") {
    out = run_hum(config);
  } else if (command == "lr") {
    out = run_lr(config);
  } else if (command == "observability") {
    out = run_observability(config);
  } else if (command == "negative") {
    out = run_negative(config);
  } else if (command == "schedule") {
    out = run_schedule(config);
  } else {
    throw ValidationError("unknown command '" + command + "'");
  }
  out.command = command;
  out.manifest = base_manifest(command, config);
  return out;
}

std::string output_directory(const Invocation& inv, const json& config) {
  if (inv.output_dir) return *inv.output_dir;
  if (const char* env = std::getenv("NULLCTL_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.at("output_dir").get<std::string>();
}

int run(const Invocation& inv, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  json config;
  std::string directory;
  try {
    require(std::find(commands().begin(), commands().end(), inv.command) != commands().end(),
            "unknown command '" + inv.command + "'");
    config = resolve_config(inv);
    directory = output_directory(inv, config);
  } catch (const ValidationError& e) {
    err << "nullctl: validation error: " << e.what() << "\n";
    return kValidation;
  }

  ReportBundle bundle;
  int status = kSuccess;
  try {
    bundle = execute(inv.command, config);
    bundle.manifest["status"] = "ok";
  } catch (const ValidationError& e) {
    err << "nullctl: validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    // Solver failures: report a diagnostics table instead of results.
    std::string kind = "error";
    int iterations = 0;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double time = std::numeric_limits<double>::quiet_NaN();
    if (const auto* ce = dynamic_cast<const ConvergenceError*>(&e)) {
      kind = "convergence";
      iterations = ce->iterations();
      residual = ce->residual();
    } else if (const auto* be = dynamic_cast<const BlowupError*>(&e)) {
      kind = "blowup";
      time = be->time();
    } else if (dynamic_cast<const UnachievableError*>(&e) != nullptr) {
      kind = "unachievable";
    }
    err << "nullctl: " << kind << " failure: " << e.what() << "\n";
    bundle = ReportBundle{};
    bundle.command = inv.command;
    bundle.manifest = base_manifest(inv.command, config);
    bundle.manifest["status"] = kind;
    bundle.add_table("diagnostics", {"kind", "message", "iterations", "residual", "time"})
        .add(kind, std::string(e.what()), iterations, residual, time);
    status = kFailure;
  }

  json tables = json::array();
  for (const Table& t : bundle.tables) tables.push_back(inv.command + "_" + t.name() + ".csv");
  bundle.manifest["tables"] = tables;
  bundle.manifest["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    emit_report(bundle, directory);
  } catch (const IoError& e) {
    err << "nullctl: i/o failure: " << e.what() << "; " << e.written().size()
        << " file(s) written before the failure\n";
    return kFailure;
  }
  return status;
}

}  // namespace nullctl::cli
