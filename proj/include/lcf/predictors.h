#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lcf/common.h"
#include "lcf/scm.h"

namespace lcf {

// ŷ = θᵀx + c
struct Unfair {
  Vector theta;
  double c = 0.0;
};

// ŷ = φᵀu + c over the responsive exogenous coordinates.
struct CfBaseline {
  Vector phi;
  double c = 0.0;
};

// ŷ = p1·y̌² + p2·y̌ + p3 + θᵀu. An empty θ means h ≡ 0.
struct LcfQuadratic {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  Vector theta;
};

// ŷ = p1·y̌^e + p2·y̌ + p3 + θᵀu, defined for y̌ ≥ 0.
struct PowerG {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double exponent = 1.5;
  Vector theta;
};

// ŷ = p1·y̌² + p2 + θ·u for a scalar u (h(u) = θ·u, monotone).
struct ScalarQuadratic {
  double p1 = 0.0;
  double p2 = 0.0;
  double theta = 0.0;
};

// ŷ = p1·y̌² + p2·y̌ + p3
struct MultiplicativeConvex {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
};

using PredictorSpec = std::variant<Unfair, CfBaseline, LcfQuadratic, PowerG,
                                   ScalarQuadratic, MultiplicativeConvex>;

std::string variant_name(const PredictorSpec& spec);
void validate(const PredictorSpec& spec);

// Whatever the variant needs: Unfair reads x, CfBaseline reads u, the
// lookahead families read y̌ (the counterfactual, or its mean over all
// alternate attributes) and u.
struct PredictorInput {
  std::optional<double> y_check;
  std::optional<ExogenousSample> u;
  std::optional<Vector> x;
};

double predict(const PredictorSpec& spec, const PredictorInput& input);

bool uses_counterfactual(const PredictorSpec& spec);

// Worlds whose outcomes feed the predictor in `own`: every other value of
// the attribute domain.
std::vector<World> alternate_worlds(const StructuralModel& scm, Attribute own);

// Predictor input seen in world `own` whose counterfactual partners are
// `partners` (y̌ is the mean of their outcomes).
PredictorInput world_input(const StructuralModel& scm,
                           const ExogenousSample& u, const World& own,
                           const std::vector<World>& partners);

class UnsupportedPair : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// ∇_u ŷ over the responsive coordinates, including the chain terms through
// y̌(u) and x(u).
Vector grad_wrt_u(const PredictorSpec& spec, const StructuralModel& scm,
                  const ExogenousSample& u, const World& own,
                  const std::vector<World>& partners);
Vector grad_wrt_u(const PredictorSpec& spec, const StructuralModel& scm,
                  const ExogenousSample& u, Attribute a_factual,
                  Attribute a_counterfactual);

// Central differences, h_i = 1e-6·max(1, |u_i|), recomputing y̌ and x at
// every perturbed point.
Vector finite_diff_grad(const PredictorSpec& spec, const StructuralModel& scm,
                        const ExogenousSample& u, const World& own,
                        const std::vector<World>& partners);
Vector finite_diff_grad(const PredictorSpec& spec, const StructuralModel& scm,
                        const ExogenousSample& u, Attribute a_factual,
                        Attribute a_counterfactual);

// T = 1/(η(‖w⊙α‖² + γ²)); a1·a2‖w⊙α‖² for the multiplicative family and
// 1/(η·wF_K²) for the law-school model. The scalar family has no T, see
// scalar_p1_bound.
double compute_T(const StructuralModel& scm, double eta);
// Largest admissible p1 for ScalarQuadratic: 1/(η·M).
double scalar_p1_bound(const ScalarMonotoneScm& scm, double eta);

struct ConditionReport {
  bool convex_ok = false;
  bool additive_ok = false;
  double lipschitz_K = 0.0;
  double lipschitz_bound = 0.0;
  bool satisfied = false;
};

struct CounterfactualRange {
  double lo;
  double hi;
};

// Sufficient conditions for relaxed lookahead fairness. PowerG needs the
// range of y̌ it will be evaluated on (lo > 0).
ConditionReport check_relaxed_conditions(
    const PredictorSpec& spec, const StructuralModel& scm, double eta,
    std::optional<CounterfactualRange> range = std::nullopt);

}  // namespace lcf
