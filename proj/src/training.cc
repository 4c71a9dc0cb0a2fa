#include "lcf/training.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Cholesky>

#include "overloaded.h"

namespace lcf {
namespace {

using detail::Overloaded;

constexpr std::uint64_t kStreamPosterior = 1;
constexpr std::uint64_t kStreamEm = 7;
constexpr std::uint64_t kStreamLawMeans = 8;

// Partners of world `a` for the lookahead input, optionally along unfair
// paths only.
std::vector<World> partners_for(const StructuralModel& scm, Attribute a,
                                const PathMask* mask) {
  if (!mask) return alternate_worlds(scm, a);
  const auto& lin = std::get<LinearAdditiveScm>(scm);
  std::vector<World> out;
  for (Attribute alt : attribute_domain(scm)) {
    if (alt != a) out.push_back(path_dependent_world(lin, a, alt, *mask));
  }
  return out;
}

double mean_outcome(const StructuralModel& scm, const ExogenousSample& u,
                    const std::vector<World>& worlds) {
  KahanSum acc;
  for (const auto& w : worlds) acc.add(forward(scm, u, w).y);
  return acc.value() / static_cast<double>(worlds.size());
}

// Exogenous coordinates used by h(u).
Vector h_features(const ExogenousSample& u, HInputs h) {
  switch (h) {
    case HInputs::kUx:
      return u.ux;
    case HInputs::kAll:
      return u.responsive();
    case HInputs::kNone:
      return Vector();
  }
  return Vector();
}

// θ over the responsive coordinates from the fitted h coefficients.
Vector expand_theta(const Vector& h_coef, HInputs h, Eigen::Index ux_dim,
                    Eigen::Index responsive_dim) {
  if (h == HInputs::kNone) return Vector();
  Vector theta = Vector::Zero(responsive_dim);
  if (h == HInputs::kUx) {
    theta.head(ux_dim) = h_coef;
  } else {
    theta = h_coef;
  }
  return theta;
}

void require_nonempty(const Dataset& data) {
  if (data.records.empty()) throw InvalidArgument("training data is empty");
  data.validate();
}

// Lookahead design. Column 0 holds phi(y̌) (the p1 column), followed by
// y̌ when with_linear, then the intercept, then h features.
struct LookaheadDesign {
  GramSystem sys{0};
  Eigen::Index h_cols = 0;
  bool with_linear = true;
  double y_check_min = std::numeric_limits<double>::infinity();
  double y_check_max = -std::numeric_limits<double>::infinity();
};

LookaheadDesign build_lookahead(const Dataset& data, const StructuralModel& scm,
                                const TrainConfig& cfg,
                                const std::function<double(double)>& phi,
                                bool with_linear, HInputs h,
                                const PathMask* mask) {
  const auto draws = draw_posteriors(scm, data, cfg.m, cfg.seed, cfg.mcmc);
  LookaheadDesign out;
  out.with_linear = with_linear;
  out.h_cols = h_features(draws.front().front(), h).size();
  const Eigen::Index cols = 1 + (with_linear ? 1 : 0) + 1 + out.h_cols;
  out.sys = GramSystem(cols);
  Vector row(cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& rec = data.records[i];
    const auto partners = partners_for(scm, rec.a, mask);
    for (const auto& u : draws[i]) {
      const double yc = mean_outcome(scm, u, partners);
      out.y_check_min = std::min(out.y_check_min, yc);
      out.y_check_max = std::max(out.y_check_max, yc);
      Eigen::Index c = 0;
      row[c++] = phi(yc);
      if (with_linear) row[c++] = yc;
      row[c++] = 1.0;
      if (out.h_cols) row.tail(out.h_cols) = h_features(u, h);
      out.sys.add_row(row, rec.y);
    }
  }
  return out;
}

struct FixedP1Fit {
  Vector coef;  // full coefficient vector, coef[0] = p1
  double loss = 0.0;
  double condition = 0.0;
};

FixedP1Fit solve_with_p1(const GramSystem& sys, double p1, const TrainConfig& cfg) {
  const GramSystem rest = sys.fix_column(0, p1);
  FixedP1Fit fit;
  fit.coef = Vector(sys.cols());
  fit.coef[0] = p1;
  SolveInfo info;
  Vector r = solve_normal_equations(rest, &info);
  fit.condition = info.condition;
  if (cfg.optimizer == Optimizer::kGradientDescent) {
    r = descend(rest, cfg.descent, Vector::Zero(rest.cols()));
  }
  fit.coef.tail(rest.cols()) = r;
  fit.loss = sys.loss(fit.coef);
  return fit;
}

// Chooses p1 by mode and solves for the rest. `upper` is the open (or, for
// inclusive, closed) upper bound for p1; `perfect` is the perfect-mode value.
FixedP1Fit solve_lookahead(const GramSystem& sys, const TrainConfig& cfg,
                           double perfect, double upper, bool inclusive) {
  switch (cfg.p1_mode) {
    case P1Mode::kPerfect:
      return solve_with_p1(sys, perfect, cfg);
    case P1Mode::kRelaxed: {
      const bool ok = cfg.p1_value > 0.0 &&
                      (inclusive ? cfg.p1_value <= upper : cfg.p1_value < upper);
      if (!ok) {
        std::ostringstream os;
        os << "relaxed p1 = " << cfg.p1_value << " outside (0, " << upper
           << (inclusive ? "]" : ")");
        throw InvalidArgument(os.str());
      }
      return solve_with_p1(sys, cfg.p1_value, cfg);
    }
    case P1Mode::kTrainable: {
      const double lo = 1e-6 * upper;
      const double hi = (1.0 - 1e-6) * upper;
      if (cfg.optimizer == Optimizer::kGradientDescent) {
        DescentConfig dc = cfg.descent;
        dc.bounded_column = 0;
        dc.bound = upper;
        Vector init = Vector::Zero(sys.cols());
        init[0] = 0.5 * upper;
        FixedP1Fit fit;
        fit.coef = descend(sys, dc, init);
        fit.loss = sys.loss(fit.coef);
        SolveInfo info;
        solve_normal_equations(sys.fix_column(0, fit.coef[0]), &info);
        fit.condition = info.condition;
        return fit;
      }
      // Profile loss is a convex quadratic in p1: clamp the free optimum.
      const Vector free = solve_normal_equations(sys);
      return solve_with_p1(sys, std::clamp(free[0], lo, hi), cfg);
    }
  }
  throw InvalidArgument("unknown p1 mode");
}

struct Unpacked {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  Vector h;
};

Unpacked unpack(const LookaheadDesign& d, const Vector& coef) {
  Unpacked u;
  Eigen::Index c = 0;
  u.p1 = coef[c++];
  if (d.with_linear) u.p2 = coef[c++];
  u.p3 = coef[c++];
  u.h = coef.tail(d.h_cols);
  return u;
}

std::string solver_name(const TrainConfig& cfg) {
  if (cfg.optimizer == Optimizer::kNormalEquations) return "normal-equations";
  return cfg.descent.adam ? "adam" : "gradient-descent";
}

Eigen::Index ux_size(const StructuralModel& scm) {
  return std::visit(
      Overloaded{[](const LinearAdditiveScm& m) { return m.d(); },
                 [](const MultiplicativeBinaryScm& m) { return m.d(); },
                 [](const ScalarMonotoneScm&) { return Eigen::Index{1}; },
                 [](const LawSchoolScm&) { return Eigen::Index{1}; }},
      scm);
}

FitReport finish_lookahead(const FixedP1Fit& fit, const TrainConfig& cfg,
                           double bound, const char* method) {
  FitReport rep;
  rep.method = method;
  rep.train_loss = fit.loss;
  rep.condition = fit.condition;
  rep.T = bound;
  rep.p1 = fit.coef[0];
  rep.solver = solver_name(cfg);
  return rep;
}

// Lookahead fit over the linear-type families (quadratic or power φ).
FitReport fit_lookahead_common(const Dataset& data, const StructuralModel& scm,
                               const TrainConfig& cfg, const PathMask* mask,
                               std::optional<double> exponent, const char* method) {
  cfg.validate();
  require_nonempty(data);
  validate(scm);
  const double T = compute_T(scm, cfg.eta);
  std::function<double(double)> phi = [](double y) { return y * y; };
  if (exponent) {
    const double e = *exponent;
    phi = [e](double y) {
      if (y < 0.0) throw InvalidArgument("power-g: negative counterfactual in training data");
      return std::pow(y, e);
    };
  }
  const auto design = build_lookahead(data, scm, cfg, phi, true, cfg.h_inputs, mask);
  const auto fit = solve_lookahead(design.sys, cfg, T / 2.0, T, false);
  const auto u = unpack(design, fit.coef);
  FitReport rep = finish_lookahead(fit, cfg, T, method);
  const Vector theta =
      expand_theta(u.h, cfg.h_inputs, ux_size(scm), responsive_dimension(scm));
  if (exponent) {
    rep.spec = PowerG{u.p1, u.p2, u.p3, *exponent, theta};
  } else {
    rep.spec = LcfQuadratic{u.p1, u.p2, u.p3, theta};
  }
  return rep;
}

}  // namespace

std::string to_string(P1Mode m) {
  switch (m) {
    case P1Mode::kPerfect:
      return "perfect";
    case P1Mode::kRelaxed:
      return "relaxed";
    case P1Mode::kTrainable:
      return "train";
  }
  return "?";
}

std::string to_string(Optimizer o) {
  return o == Optimizer::kNormalEquations ? "normal-equations" : "gradient-descent";
}

std::string to_string(HInputs h) {
  switch (h) {
    case HInputs::kUx:
      return "ux";
    case HInputs::kAll:
      return "all";
    case HInputs::kNone:
      return "none";
  }
  return "?";
}

HInputs parse_h_inputs(const std::string& s) {
  if (s == "ux") return HInputs::kUx;
  if (s == "all") return HInputs::kAll;
  if (s == "none") return HInputs::kNone;
  throw InvalidArgument("h_inputs must be ux, all or none, got '" + s + "'");
}

void TrainConfig::validate() const {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be > 0");
  if (optimizer == Optimizer::kGradientDescent) {
    if (!(descent.lr > 0.0)) throw InvalidArgument("learning rate must be > 0");
    if (descent.epochs < 1) throw InvalidArgument("epochs must be >= 1");
  }
}

std::vector<CounterfactualBundle> sample_posterior_batch(
    const StructuralModel& scm, const Record& record, std::size_t m,
    std::uint64_t seed, const McmcConfig& mcmc) {
  const auto sampler = abduct(scm, record.x, record.a, mcmc);
  const auto draws = sampler.draw(m, seed);
  std::vector<Attribute> alts;
  for (Attribute a : attribute_domain(scm)) {
    if (a != record.a) alts.push_back(a);
  }
  std::vector<CounterfactualBundle> out;
  out.reserve(m);
  for (const auto& u : draws) {
    CounterfactualBundle b;
    b.u = u;
    b.alternates = alts;
    KahanSum acc;
    for (Attribute a : alts) {
      b.y_checks.push_back(counterfactual(scm, u, a).y);
      acc.add(b.y_checks.back());
    }
    b.y_check_mean = acc.value() / static_cast<double>(alts.size());
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<std::vector<ExogenousSample>> draw_posteriors(
    const StructuralModel& scm, const Dataset& data, std::size_t m,
    std::uint64_t seed, const McmcConfig& mcmc) {
  std::vector<std::vector<ExogenousSample>> out(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const auto& r = data.records[i];
    out[i] = abduct(scm, r.x, r.a, mcmc).draw(m, derive_seed(seed, kStreamPosterior, i));
  });
  return out;
}

LinearEstimate estimate_linear_scm(const Dataset& data,
                                   const LinearAdditiveScm& priors_from) {
  require_nonempty(data);
  const Eigen::Index d = data.d();
  const std::size_t n = data.size();
  if (static_cast<Eigen::Index>(priors_from.prior_ux.size()) != d) {
    throw InvalidArgument("priors must declare one distribution per feature");
  }
  if (n < static_cast<std::size_t>(d) + 10) {
    throw InvalidArgument("need at least d + 10 records to estimate the model");
  }
  const double a0 = data.records.front().a;
  const bool varies = std::any_of(data.records.begin(), data.records.end(),
                                  [&](const Record& r) { return r.a != a0; });
  if (!varies) throw InvalidArgument("attribute is constant: design is degenerate");

  LinearEstimate est;
  est.scm = priors_from;
  est.scm.alpha = Vector(d);
  est.scm.beta = Vector(d);
  est.feature_intercepts = Vector(d);
  const double dof = static_cast<double>(n) - 2.0;

  for (Eigen::Index i = 0; i < d; ++i) {
    GramSystem sys(2);
    for (const auto& r : data.records) sys.add_row((Vector(2) << r.a, 1.0).finished(), r.x[i]);
    const Vector c = solve_normal_equations(sys);
    const double resid_var = sys.loss(c) * static_cast<double>(n) / dof;
    const double var_u = priors_from.prior_ux[i].variance();
    if (!(resid_var > 0.0) || !(var_u > 0.0)) {
      throw NumericalError("feature " + std::to_string(i + 1) +
                           ": non-positive variance estimate");
    }
    est.scm.beta[i] = c[0];
    est.scm.alpha[i] = std::sqrt(resid_var / var_u);
    est.feature_intercepts[i] = c[1];
    const double implied = est.scm.alpha[i] * priors_from.prior_ux[i].mean();
    if (std::abs(implied - c[1]) > 0.1 * std::max(1.0, std::abs(c[1]))) {
      std::ostringstream os;
      os << "feature " << i + 1 << ": intercept " << c[1]
         << " disagrees with alpha·E[U] = " << implied;
      est.warnings.push_back(os.str());
    }
  }

  GramSystem ysys(d + 1);
  Vector row(d + 1);
  for (const auto& r : data.records) {
    row.head(d) = r.x;
    row[d] = 1.0;
    ysys.add_row(row, r.y);
  }
  const Vector c = solve_normal_equations(ysys);
  est.scm.w = c.head(d);
  est.outcome_intercept = c[d];
  const double resid_var =
      ysys.loss(c) * static_cast<double>(n) / (static_cast<double>(n) - d - 1.0);
  const double var_uy = priors_from.prior_uy.variance();
  if (!(resid_var > 0.0)) throw NumericalError("outcome: non-positive residual variance");
  est.scm.gamma = std::sqrt(resid_var / var_uy);
  est.scm.attr_domain = data.attr_domain.empty() ? priors_from.attr_domain : data.attr_domain;
  est.scm.validate();
  return est;
}

FitReport fit_unfair(const Dataset& data, const TrainConfig& cfg) {
  require_nonempty(data);
  const Eigen::Index d = data.d();
  GramSystem sys(d + 1);
  Vector row(d + 1);
  for (const auto& r : data.records) {
    row.head(d) = r.x;
    row[d] = 1.0;
    sys.add_row(row, r.y);
  }
  SolveInfo info;
  Vector c = solve_normal_equations(sys, &info);
  if (cfg.optimizer == Optimizer::kGradientDescent) {
    c = descend(sys, cfg.descent, Vector::Zero(d + 1));
  }
  FitReport rep;
  rep.spec = Unfair{c.head(d), c[d]};
  rep.method = "UF";
  rep.train_loss = sys.loss(c);
  rep.condition = info.condition;
  rep.solver = solver_name(cfg);
  return rep;
}

FitReport fit_cf(const Dataset& data, const StructuralModel& scm,
                 const TrainConfig& cfg) {
  cfg.validate();
  require_nonempty(data);
  const auto draws = draw_posteriors(scm, data, cfg.m, cfg.seed, cfg.mcmc);
  const Eigen::Index k = draws.front().front().responsive_size();
  GramSystem sys(k + 1);
  Vector row(k + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (const auto& u : draws[i]) {
      row.head(k) = u.responsive();
      row[k] = 1.0;
      sys.add_row(row, data.records[i].y);
    }
  }
  SolveInfo info;
  Vector c = solve_normal_equations(sys, &info);
  if (cfg.optimizer == Optimizer::kGradientDescent) {
    c = descend(sys, cfg.descent, Vector::Zero(k + 1));
  }
  FitReport rep;
  rep.spec = CfBaseline{c.head(k), c[k]};
  rep.method = "CF";
  rep.train_loss = sys.loss(c);
  rep.condition = info.condition;
  rep.solver = solver_name(cfg);
  return rep;
}

FitReport fit_lcf_quadratic(const Dataset& data, const StructuralModel& scm,
                            const TrainConfig& cfg) {
  if (!std::holds_alternative<LinearAdditiveScm>(scm) &&
      !std::holds_alternative<LawSchoolScm>(scm)) {
    throw UnsupportedPair("lcf-quadratic needs a linear-additive or law-school model");
  }
  return fit_lookahead_common(data, scm, cfg, nullptr, std::nullopt, "Ours");
}

FitReport fit_path_dependent(const Dataset& data, const StructuralModel& scm,
                             const PathMask& mask, const TrainConfig& cfg) {
  const auto* lin = std::get_if<LinearAdditiveScm>(&scm);
  if (!lin) throw UnsupportedPair("path-dependent training needs a linear-additive model");
  if (static_cast<Eigen::Index>(mask.unfair.size()) != lin->d()) {
    throw InvalidArgument("path mask length must equal d");
  }
  return fit_lookahead_common(data, scm, cfg, &mask, std::nullopt, "Ours-PD");
}

FitReport fit_power_g(const Dataset& data, const StructuralModel& scm,
                      const TrainConfig& cfg, double exponent) {
  if (!(exponent > 1.0)) throw InvalidArgument("power-g: exponent must be > 1");
  if (!std::holds_alternative<LinearAdditiveScm>(scm)) {
    throw UnsupportedPair("power-g needs a linear-additive model");
  }
  return fit_lookahead_common(data, scm, cfg, nullptr, exponent, "Ours-PowerG");
}

FitReport fit_scalar_quadratic(const Dataset& data, const StructuralModel& scm,
                               const TrainConfig& cfg) {
  cfg.validate();
  require_nonempty(data);
  const auto* m = std::get_if<ScalarMonotoneScm>(&scm);
  if (!m) throw UnsupportedPair("scalar-quadratic needs the scalar family");
  const double bound = scalar_p1_bound(*m, cfg.eta);
  const bool increasing = check_scalar_shape(*m).increasing;
  auto phi = [](double y) { return y * y; };
  const HInputs h = cfg.h_inputs == HInputs::kNone ? HInputs::kNone : HInputs::kUx;
  auto design = build_lookahead(data, scm, cfg, phi, false, h, nullptr);
  auto fit = solve_lookahead(design.sys, cfg, bound / 2.0, bound, true);
  auto u = unpack(design, fit.coef);
  double theta = design.h_cols ? u.h[0] : 0.0;
  if (increasing ? theta < 0.0 : theta > 0.0) {
    // h must move with f̃: refit at the boundary θ = 0.
    const GramSystem reduced = design.sys.select({0, 1});
    LookaheadDesign d2;
    d2.sys = reduced;
    d2.with_linear = false;
    d2.h_cols = 0;
    fit = solve_lookahead(reduced, cfg, bound / 2.0, bound, true);
    u = unpack(d2, fit.coef);
    theta = 0.0;
    design = std::move(d2);
  }
  FitReport rep = finish_lookahead(fit, cfg, bound, "Ours-Scalar");
  rep.spec = ScalarQuadratic{u.p1, u.p3, theta};
  return rep;
}

FitReport fit_multiplicative_convex(const Dataset& data,
                                    const StructuralModel& scm,
                                    const TrainConfig& cfg) {
  cfg.validate();
  require_nonempty(data);
  if (!std::holds_alternative<MultiplicativeBinaryScm>(scm)) {
    throw UnsupportedPair("multiplicative-convex needs the multiplicative family");
  }
  const double T = compute_T(scm, cfg.eta);
  const auto design = build_lookahead(data, scm, cfg, [](double y) { return y * y; },
                                      true, HInputs::kNone, nullptr);
  const auto fit = solve_lookahead(design.sys, cfg, T / 2.0, T, false);
  const auto u = unpack(design, fit.coef);
  FitReport rep = finish_lookahead(fit, cfg, T, "Ours-Mult");
  rep.spec = MultiplicativeConvex{u.p1, u.p2, u.p3};
  return rep;
}

// ---------------------------------------------------------------------------
// Law-school MC-EM.

namespace {

std::vector<double> flatten(const LawSchoolScm& s) {
  return {s.wG_K, s.wG_R, s.wG_S, s.bG, s.sigmaG, s.wL_K,
          s.wL_R, s.wL_S, s.bL,   s.wF_K, s.wF_R,  s.wF_S};
}

LawEvidence evidence(const Record& r, bool with_f) {
  if (r.x.size() != 3) throw InvalidArgument("law-school records need x = [r, g, l]");
  LawEvidence ev{r.x[0], r.a, r.x[1], r.x[2], std::nullopt};
  if (with_f) ev.f = r.y;
  return ev;
}

// Poisson log-linear regression by Newton steps, warm-started at `coef`.
Vector poisson_newton(const std::vector<Vector>& rows, const std::vector<double>& counts,
                      Vector coef) {
  const Eigen::Index k = coef.size();
  for (int it = 0; it < 50; ++it) {
    Vector grad = Vector::Zero(k);
    Matrix hess = Matrix::Zero(k, k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double mu = std::exp(std::min(rows[i].dot(coef), 30.0));
      grad += (counts[i] - mu) * rows[i];
      hess.selfadjointView<Eigen::Lower>().rankUpdate(rows[i], mu);
    }
    const Matrix h = hess.selfadjointView<Eigen::Lower>();
    Eigen::LDLT<Matrix> ldlt(h);
    if (ldlt.info() != Eigen::Success) throw NumericalError("poisson regression: singular Hessian");
    const Vector step = ldlt.solve(grad);
    coef += step;
    if (!coef.allFinite()) throw NumericalError("poisson regression diverged");
    if (step.cwiseAbs().maxCoeff() < 1e-10) break;
  }
  return coef;
}

LawSchoolScm initial_law_guess(const Dataset& data) {
  LawSchoolScm s;
  GramSystem gsys(3), fsys(2), lsys(3);
  for (const auto& r : data.records) {
    const double rr = r.x[0];
    gsys.add_row((Vector(3) << rr, r.a, 1.0).finished(), r.x[1]);
    fsys.add_row((Vector(2) << rr, r.a).finished(), r.y);
    lsys.add_row((Vector(3) << rr, r.a, 1.0).finished(), std::log(r.x[2] + 0.5));
  }
  const Vector g = solve_normal_equations(gsys);
  const Vector f = solve_normal_equations(fsys);
  const Vector l = solve_normal_equations(lsys);
  const double g_sd = std::sqrt(gsys.loss(g));
  const double f_sd = std::sqrt(fsys.loss(f));
  const double l_sd = std::sqrt(lsys.loss(l));
  s.wG_R = g[0];
  s.wG_S = g[1];
  s.bG = g[2];
  s.wG_K = 0.7 * g_sd;
  s.sigmaG = 0.7 * g_sd;
  s.wF_R = f[0];
  s.wF_S = f[1];
  s.wF_K = std::max(0.5 * f_sd, 1e-3);
  s.wL_R = l[0];
  s.wL_S = l[1];
  s.bL = l[2];
  s.wL_K = 0.5 * l_sd;
  return s;
}

}  // namespace

LawFitReport estimate_law_params(const Dataset& data, const LawFitConfig& cfg) {
  require_nonempty(data);
  if (cfg.draws < 1 || cfg.max_rounds < 1) {
    throw InvalidArgument("law EM needs draws >= 1 and max_rounds >= 1");
  }
  for (const auto& r : data.records) {
    if (r.x.size() != 3 || !(r.x[2] >= 0.0) || std::floor(r.x[2]) != r.x[2]) {
      throw InvalidArgument("law-school records need x = [r, g, l] with integer l >= 0");
    }
  }
  LawFitReport rep;
  LawSchoolScm cur = initial_law_guess(data);
  if (!data.attr_domain.empty()) cur.attr_domain = data.attr_domain;
  const std::size_t n = data.size();
  std::vector<std::vector<double>> ks(n);

  for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
    McmcConfig mc = cfg.mcmc;
    mc.samples = cfg.draws;
    parallel_for(n, [&](std::size_t i) {
      ks[i] = posterior_sample_k(cur, evidence(data.records[i], true), mc,
                                 derive_seed(cfg.seed, kStreamEm, i))
                  .samples;
    });

    LawSchoolScm next = cur;
    GramSystem gsys(4), fsys(3);
    std::vector<Vector> lrows;
    std::vector<double> lcounts;
    lrows.reserve(n * cfg.draws);
    lcounts.reserve(n * cfg.draws);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = data.records[i];
      const double rr = r.x[0];
      for (double k : ks[i]) {
        const Vector row4 = (Vector(4) << k, rr, r.a, 1.0).finished();
        gsys.add_row(row4, r.x[1]);
        fsys.add_row(row4.head(3), r.y);
        lrows.push_back(row4);
        lcounts.push_back(r.x[2]);
      }
    }
    const Vector g = solve_normal_equations(gsys);
    const Vector f = solve_normal_equations(fsys);
    next.wG_K = g[0];
    next.wG_R = g[1];
    next.wG_S = g[2];
    next.bG = g[3];
    next.sigmaG = std::sqrt(gsys.loss(g));
    next.wF_K = f[0];
    next.wF_R = f[1];
    next.wF_S = f[2];
    const Vector l = poisson_newton(
        lrows, lcounts, (Vector(4) << cur.wL_K, cur.wL_R, cur.wL_S, cur.bL).finished());
    next.wL_K = l[0];
    next.wL_R = l[1];
    next.wL_S = l[2];
    next.bL = l[3];

    const auto a = flatten(cur);
    const auto b = flatten(next);
    double change = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) change = std::max(change, std::abs(a[j] - b[j]));
    rep.max_change.push_back(change);
    cur = next;
    rep.rounds = round + 1;
    if (change < cfg.tolerance) {
      rep.converged = true;
      break;
    }
  }
  cur.validate();
  rep.scm = cur;
  std::ostringstream os;
  os << (rep.converged ? "converged" : "not converged") << " after " << rep.rounds
     << " rounds; last max parameter change "
     << (rep.max_change.empty() ? 0.0 : rep.max_change.back());
  rep.diagnostics = os.str();
  return rep;
}

std::vector<double> law_posterior_means(const LawSchoolScm& scm, const Dataset& data,
                                        const McmcConfig& mcmc, std::uint64_t seed) {
  std::vector<double> out(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const auto res = posterior_sample_k(scm, evidence(data.records[i], false), mcmc,
                                        derive_seed(seed, kStreamLawMeans, i));
    KahanSum acc;
    for (double k : res.samples) acc.add(k);
    out[i] = acc.value() / static_cast<double>(res.samples.size());
  });
  return out;
}

}  // namespace lcf
