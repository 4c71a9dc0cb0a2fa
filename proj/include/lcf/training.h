#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcf/dataset.h"
#include "lcf/linalg.h"
#include "lcf/predictors.h"
#include "lcf/scm.h"

namespace lcf {

enum class P1Mode { kPerfect, kRelaxed, kTrainable };
enum class Optimizer { kNormalEquations, kGradientDescent };
// Exogenous coordinates fed to h(u): u_X only, all responsive coordinates,
// or none (h ≡ 0).
enum class HInputs { kUx, kAll, kNone };

std::string to_string(P1Mode m);
std::string to_string(Optimizer o);
std::string to_string(HInputs h);
HInputs parse_h_inputs(const std::string& s);

struct TrainConfig {
  std::size_t m = 100;
  double eta = 10.0;
  P1Mode p1_mode = P1Mode::kPerfect;
  double p1_value = 0.0;  // relaxed mode only
  Optimizer optimizer = Optimizer::kNormalEquations;
  DescentConfig descent;
  std::uint64_t seed = 0;
  HInputs h_inputs = HInputs::kUx;
  McmcConfig mcmc;

  void validate() const;
};

// One posterior draw with the counterfactual outcome under every alternate
// attribute.
struct CounterfactualBundle {
  ExogenousSample u;
  std::vector<Attribute> alternates;
  std::vector<double> y_checks;
  double y_check_mean = 0.0;
};

std::vector<CounterfactualBundle> sample_posterior_batch(
    const StructuralModel& scm, const Record& record, std::size_t m,
    std::uint64_t seed, const McmcConfig& mcmc = {});

// Posterior draws for every record; record i uses a seed derived from
// (seed, i), so results do not depend on the worker count.
std::vector<std::vector<ExogenousSample>> draw_posteriors(
    const StructuralModel& scm, const Dataset& data, std::size_t m,
    std::uint64_t seed, const McmcConfig& mcmc = {});

struct LinearEstimate {
  LinearAdditiveScm scm;
  Vector feature_intercepts;  // α_i·E[U_i] implied by the regressions
  double outcome_intercept = 0.0;
  std::vector<std::string> warnings;
};

// Per-feature regression of x_i on a, then y on x. Var(U) comes from the
// priors of `priors_from`.
LinearEstimate estimate_linear_scm(const Dataset& data,
                                   const LinearAdditiveScm& priors_from);

struct FitReport {
  PredictorSpec spec;
  std::string method;
  double train_loss = 0.0;
  double condition = 0.0;
  double T = 0.0;  // bound used for p1 (1/(ηM) for the scalar family)
  double p1 = 0.0;
  std::string solver;
};

FitReport fit_unfair(const Dataset& data, const TrainConfig& cfg = {});
FitReport fit_cf(const Dataset& data, const StructuralModel& scm,
                 const TrainConfig& cfg);
FitReport fit_lcf_quadratic(const Dataset& data, const StructuralModel& scm,
                            const TrainConfig& cfg);
FitReport fit_path_dependent(const Dataset& data, const StructuralModel& scm,
                             const PathMask& mask, const TrainConfig& cfg);
FitReport fit_power_g(const Dataset& data, const StructuralModel& scm,
                      const TrainConfig& cfg, double exponent = 1.5);
FitReport fit_scalar_quadratic(const Dataset& data, const StructuralModel& scm,
                               const TrainConfig& cfg);
FitReport fit_multiplicative_convex(const Dataset& data,
                                    const StructuralModel& scm,
                                    const TrainConfig& cfg);

// Law-school parameter estimation by Monte-Carlo EM.
struct LawFitConfig {
  std::size_t max_rounds = 20;
  double tolerance = 1e-4;
  std::size_t draws = 100;  // posterior samples per record per E-step
  McmcConfig mcmc{100, 100, 1, 0.5};
  std::uint64_t seed = 0;
};

struct LawFitReport {
  LawSchoolScm scm;
  std::size_t rounds = 0;
  bool converged = false;
  std::vector<double> max_change;  // per round
  std::string diagnostics;
};

// Records must hold x = [r, g, l], a = s, y = f.
LawFitReport estimate_law_params(const Dataset& data, const LawFitConfig& cfg);

// Posterior mean of K per record given (r, s, g, l).
std::vector<double> law_posterior_means(const LawSchoolScm& scm,
                                        const Dataset& data,
                                        const McmcConfig& mcmc,
                                        std::uint64_t seed);

}  // namespace lcf
