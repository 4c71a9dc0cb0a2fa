#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lcf/common.h"
#include "lcf/distribution.h"

namespace lcf {

// One draw of every exogenous variable of a model.
//
// `ux` and `uy` are the coordinates that respond to a deployed predictor
// (the strategic response moves them along the prediction gradient).
// `noise` holds structural noise that is fixed per draw and never responds,
// `context` holds observed root covariates (e.g. race in the law-school
// model) that are immutable.
struct ExogenousSample {
  Vector ux;
  std::optional<double> uy;
  Vector noise;
  Vector context;

  Eigen::Index responsive_size() const {
    return ux.size() + (uy.has_value() ? 1 : 0);
  }
  // [ux..., uy] (uy omitted when absent).
  Vector responsive() const;
  ExogenousSample with_responsive(const Vector& values) const;
};

// X = alpha ⊙ U_X + beta·A,  Y = wᵀX + gamma·U_Y.
struct LinearAdditiveScm {
  Vector alpha;
  Vector beta;
  Vector w;
  double gamma = 1.0;
  std::vector<Distribution> prior_ux;  // one per feature
  Distribution prior_uy = Distribution::uniform(0.0, 1.0);
  std::vector<Attribute> attr_domain;

  Eigen::Index d() const { return alpha.size(); }
  void validate() const;
};

// X = A·(alpha ⊙ U_X + beta),  Y = wᵀX + gamma·U_Y,  A ∈ {a1, a2}.
struct MultiplicativeBinaryScm {
  Vector alpha;
  Vector beta;
  Vector w;
  double gamma = 1.0;
  std::vector<Distribution> prior_ux;
  Distribution prior_uy = Distribution::uniform(0.0, 1.0);
  std::vector<Attribute> attr_domain;  // exactly two values

  Eigen::Index d() const { return alpha.size(); }
  void validate() const;
};

// A scalar function together with its derivative and the open lower bound
// of its valid domain.
struct ScalarFunction {
  std::string name;  // "power" for the built-in, anything else is custom
  double exponent = 0.0;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double domain_lower = -std::numeric_limits<double>::infinity();

  // s ↦ s^q on s > 0, 0 < q < 1.
  static ScalarFunction power(double q);
  bool in_domain(double s) const { return s > domain_lower; }
};

// Attribute offset u0(a).
struct AttributeMap {
  std::string name;  // "exp", "identity" or custom
  std::function<double(double)> value;

  static AttributeMap exp();
  static AttributeMap identity();
};

// Scalar exogenous u; X = [alpha·u + u0(A)], Y = f̃(X).
struct ScalarMonotoneScm {
  ScalarFunction f_tilde;
  double alpha = 1.0;
  AttributeMap u0;
  double lipschitz_M = 1.0;  // of Γ(s) = f̃(s)·f̃'(s)
  Distribution prior_u = Distribution::uniform(0.0, 1.0);
  std::vector<Attribute> attr_domain;

  // Range of alpha·u + u0(a) over prior support and attribute domain.
  std::pair<double, double> argument_range() const;
  void validate() const;
};

// Numerical shape checks of f̃ on the argument range, on a 10⁴-point grid.
struct ScalarShapeReport {
  bool monotone = false;
  bool increasing = false;
  bool strictly_concave = false;
  bool gamma_nonnegative = false;
  double empirical_M = 0.0;  // max |ΔΓ/Δs| over grid neighbours
  bool lipschitz_M_ok = false;
  std::vector<std::string> warnings;
};
ScalarShapeReport check_scalar_shape(const ScalarMonotoneScm& scm);

// Law-school model with latent knowledge K ~ N(0,1):
//   G ~ N(wG_K K + wG_R R + wG_S S + bG, sigmaG)
//   L ~ Poisson(exp(wL_K K + wL_R R + wL_S S + bL))
//   F ~ N(wF_K K + wF_R R + wF_S S, 1)
// Features X = [R, G, L], attribute A = S, outcome Y = F.
struct LawSchoolScm {
  double wG_K = 1, wG_R = 0, wG_S = 0, bG = 0, sigmaG = 1;
  double wL_K = 0, wL_R = 0, wL_S = 0, bL = 0;
  double wF_K = 1, wF_R = 0, wF_S = 0;
  std::vector<Attribute> attr_domain{0.0, 1.0};

  void validate() const;
};

using StructuralModel = std::variant<LinearAdditiveScm, MultiplicativeBinaryScm,
                                     ScalarMonotoneScm, LawSchoolScm>;

std::string family_name(const StructuralModel& scm);
const std::vector<Attribute>& attribute_domain(const StructuralModel& scm);
void validate(const StructuralModel& scm);
bool in_domain(const std::vector<Attribute>& domain, Attribute a);

// Attribute assignment that defines a world. Linear models may assign a
// per-feature attribute (path-dependent counterfactuals); all other
// families use `attribute` only.
struct World {
  Attribute attribute = 0.0;
  std::optional<Vector> feature_attributes;

  static World uniform(Attribute a) { return World{a, std::nullopt}; }
};

struct Outcome {
  Vector x;
  double y = 0.0;
};

// Structural equations evaluated at u under attribute a.
Outcome forward(const StructuralModel& scm, const ExogenousSample& u,
                Attribute a);
Outcome forward(const StructuralModel& scm, const ExogenousSample& u,
                const World& world);

// Same equations with A replaced by a_check. Equal to forward; exists so
// simulation code states intent.
Outcome counterfactual(const StructuralModel& scm, const ExogenousSample& u,
                       Attribute a_check);

// Unfair-path features are recomputed under a_check, the others are held at
// the observed x.
struct PathMask {
  std::vector<bool> unfair;
  static PathMask all(std::size_t d, bool value) {
    return PathMask{std::vector<bool>(d, value)};
  }
};

double path_dependent_counterfactual(const LinearAdditiveScm& scm,
                                     const Vector& x, Attribute a,
                                     Attribute a_check, const PathMask& mask,
                                     const ExogenousSample& u);

// World in which unfair-path features see a_check and the rest see a.
World path_dependent_world(const LinearAdditiveScm& scm, Attribute a,
                           Attribute a_check, const PathMask& mask);

// ∂y/∂u and ∂x/∂u over the responsive coordinates.
Vector outcome_gradient(const StructuralModel& scm, const ExogenousSample& u,
                        const World& world);
Matrix feature_jacobian(const StructuralModel& scm, const ExogenousSample& u,
                        const World& world);

// Number of responsive exogenous coordinates for the model.
Eigen::Index responsive_dimension(const StructuralModel& scm);

// ---------------------------------------------------------------------------
// Law-school posterior over K.

struct McmcConfig {
  std::size_t samples = 500;
  std::size_t burn_in = 200;
  std::size_t thinning = 1;
  double proposal_scale = 0.5;
};

struct LawEvidence {
  double r = 0, s = 0, g = 0, l = 0;
  std::optional<double> f;  // included only when estimating parameters
};

struct McmcResult {
  std::vector<double> samples;
  double acceptance_rate = 0.0;
  double mode = 0.0;
};

// Log-rate of L, clamped to ≤ 30. Each clamp increments a process-wide
// counter readable through poisson_clamp_count().
double law_log_rate(const LawSchoolScm& scm, double k, double r, double s);
std::uint64_t poisson_clamp_count();

double law_log_posterior(const LawSchoolScm& scm, const LawEvidence& ev,
                         double k);

// Random-walk Metropolis over K started at the posterior mode.
McmcResult posterior_sample_k(const LawSchoolScm& scm, const LawEvidence& ev,
                              const McmcConfig& cfg, std::uint64_t seed);

// Smallest n with P(Poisson(rate) ≤ n) ≥ v.
double poisson_quantile(double v, double rate);

// ---------------------------------------------------------------------------
// Abduction.

// Posterior over the exogenous variables given X = x, A = a. Conditions on
// (X, A) only; the observed label never enters.
class PosteriorSampler {
 public:
  PosteriorSampler(StructuralModel scm, Vector x, Attribute a,
                   McmcConfig mcmc = {});

  // m draws, deterministic given seed.
  std::vector<ExogenousSample> draw(std::size_t m, std::uint64_t seed) const;

  // Coordinates of ux fixed by the evidence (true for every family except
  // the law-school model).
  bool deterministic_ux() const;
  // The deterministic part of the posterior (ux, and context).
  const ExogenousSample& deterministic_part() const { return fixed_; }
  double last_acceptance_rate() const { return last_acceptance_; }

 private:
  StructuralModel scm_;
  Vector x_;
  Attribute a_;
  McmcConfig mcmc_;
  ExogenousSample fixed_;
  mutable double last_acceptance_ = 1.0;
};

PosteriorSampler abduct(const StructuralModel& scm, const Vector& x,
                        Attribute a, const McmcConfig& mcmc = {});

}  // namespace lcf
