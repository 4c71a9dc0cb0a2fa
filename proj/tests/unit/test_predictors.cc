#include <gtest/gtest.h>

#include <cmath>

#include "../support.h"
#include "lcf/predictors.h"
#include "lcf/presets.h"

namespace lcf {
namespace {

using testing::linear_sample;
using testing::vec;

TEST(Predict, DirectEvaluation) {
  PredictorInput in;
  in.y_check = 1.7;
  EXPECT_DOUBLE_EQ(predict(LcfQuadratic{0.25, 0, 0, {}}, in), 0.7225);

  PredictorInput xin;
  xin.x = vec({0.5});
  EXPECT_DOUBLE_EQ(predict(Unfair{vec({1.0}), 0.0}, xin), 0.5);

  PredictorInput uin;
  uin.u = linear_sample({0.4}, 0.1);
  EXPECT_DOUBLE_EQ(predict(CfBaseline{vec({1.0, 1.0}), 0.0}, uin), 0.5);
}

TEST(Predict, MissingInputsRejected) {
  EXPECT_THROW(predict(LcfQuadratic{0.25, 0, 0, {}}, PredictorInput{}), InvalidArgument);
  EXPECT_THROW(predict(Unfair{vec({1.0}), 0.0}, PredictorInput{}), InvalidArgument);
}

TEST(ComputeT, Formula) {
  const StructuralModel toy = presets::linear_toy();
  EXPECT_DOUBLE_EQ(compute_T(toy, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(compute_T(toy, 10.0), 0.05);
  EXPECT_THROW(compute_T(toy, 0.0), InvalidArgument);
  // ‖w⊙α‖² + γ² for the fixed d = 10 model.
  const auto b = presets::appendix_b();
  const double s = b.w.cwiseProduct(b.alpha).squaredNorm() + b.gamma * b.gamma;
  EXPECT_NEAR(s, 0.87954, 1e-5);
  EXPECT_NEAR(compute_T(StructuralModel{b}, 10.0), 0.11370, 1e-5);
  const StructuralModel mul = presets::multiplicative_toy();
  EXPECT_DOUBLE_EQ(compute_T(mul, 1.0), 1.0 / 3.0);
}

TEST(Gradient, LinearToyExamples) {
  const StructuralModel toy = presets::linear_toy();
  const auto u = linear_sample({0.5}, 0.2);
  Vector g = grad_wrt_u(LcfQuadratic{0.25, 0, 0, {}}, toy, u, 0.0, 1.0);
  EXPECT_NEAR(g[0], 0.85, 1e-15);
  EXPECT_NEAR(g[1], 0.85, 1e-15);

  g = grad_wrt_u(LcfQuadratic{0.0, 0, 0, vec({0.3, -0.7})}, toy, u, 0.0, 1.0);
  EXPECT_EQ(g[0], 0.3);
  EXPECT_EQ(g[1], -0.7);

  for (double a : {0.0, 1.0}) {
    g = grad_wrt_u(Unfair{vec({1.0}), 0.0}, toy, u, a, 1.0 - a);
    EXPECT_EQ(g[0], 1.0);
    EXPECT_EQ(g[1], 0.0);
  }
}

TEST(Gradient, ConstantPredictorHasZeroGradient) {
  const StructuralModel toy = presets::linear_toy();
  const auto u = linear_sample({0.5}, 0.2);
  const Vector fd = finite_diff_grad(CfBaseline{vec({0.0, 0.0}), 2.0}, toy, u, 0.0, 1.0);
  EXPECT_LE(fd.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gradient, PowerGAtNegativeCounterfactualReportsError) {
  // y̌ = 0 + β·1 + γ·u_Y with β = -1 is negative for small u.
  auto m = presets::linear_toy();
  m.beta[0] = -1.0;
  const StructuralModel scm = m;
  const auto u = linear_sample({0.0}, 1e-9);
  EXPECT_THROW(finite_diff_grad(PowerG{0.1, 0, 0, 1.5, {}}, scm, u, 0.0, 1.0),
               NumericalError);
  EXPECT_THROW(grad_wrt_u(PowerG{0.1, 0, 0, 1.5, {}}, scm, u, 0.0, 1.0),
               InvalidArgument);
}

TEST(Gradient, AnalyticMatchesFiniteDifferencesOnRandomLinear) {
  Rng rng(41);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 1 + rep % 5;
    const StructuralModel scm = testing::random_linear(rng, d);
    const auto u = testing::random_sample(rng, d);
    Vector theta(d + 1);
    for (int i = 0; i <= d; ++i) theta[i] = c(rng);
    const LcfQuadratic spec{std::abs(c(rng)), c(rng), c(rng), theta};
    const Vector an = grad_wrt_u(spec, scm, u, 0.0, 1.0);
    const Vector fd = finite_diff_grad(spec, scm, u, 0.0, 1.0);
    EXPECT_LE((an - fd).norm(), 1e-5 * std::max(1.0, an.norm()));
  }
}

TEST(Gradient, NonBinaryDomainUsesMeanCounterfactual) {
  auto m = presets::linear_toy();
  m.attr_domain = {0.0, 1.0, 2.0};
  const StructuralModel scm = m;
  const auto u = linear_sample({0.5}, 0.2);
  const auto in = world_input(scm, u, World::uniform(0.0), alternate_worlds(scm, 0.0));
  // Alternates 1 and 2 give 1.7 and 2.7.
  EXPECT_NEAR(*in.y_check, 2.2, 1e-15);
  const LcfQuadratic spec{0.25, 0.1, 0, {}};
  const auto partners = alternate_worlds(scm, 0.0);
  const Vector an = grad_wrt_u(spec, scm, u, World::uniform(0.0), partners);
  const Vector fd = finite_diff_grad(spec, scm, u, World::uniform(0.0), partners);
  EXPECT_NEAR(an[0], 2 * 0.25 * 2.2 + 0.1, 1e-14);
  EXPECT_LE((an - fd).norm(), 1e-6);
}

TEST(Conditions, LcfQuadratic) {
  const StructuralModel scm = presets::appendix_b();
  const double T = compute_T(scm, 10.0);
  auto rep = check_relaxed_conditions(LcfQuadratic{T / 2, 0, 0, {}}, scm, 10.0);
  EXPECT_TRUE(rep.satisfied);
  EXPECT_DOUBLE_EQ(rep.lipschitz_K, T);
  rep = check_relaxed_conditions(LcfQuadratic{1.5 * T, 0, 0, {}}, scm, 10.0);
  EXPECT_FALSE(rep.satisfied);
}

TEST(Conditions, ScalarQuadraticAtHalfBound) {
  const auto m = presets::scalar_e();
  const StructuralModel scm = m;
  const double p1 = 1.0 / (2 * 10.0 * m.lipschitz_M);
  const auto rep = check_relaxed_conditions(ScalarQuadratic{p1, 0.0, 0.0}, scm, 10.0);
  EXPECT_TRUE(rep.satisfied);
  const auto bad = check_relaxed_conditions(ScalarQuadratic{p1, 0.0, -1.0}, scm, 10.0);
  EXPECT_FALSE(bad.satisfied);
}

TEST(Conditions, PowerGNeedsRange) {
  const StructuralModel scm = presets::appendix_b();
  const double T = compute_T(scm, 10.0);
  EXPECT_THROW(check_relaxed_conditions(PowerG{T / 2, 0, 0, 1.5, {}}, scm, 10.0),
               InvalidArgument);
  const auto rep = check_relaxed_conditions(PowerG{T / 2, 0, 0, 1.5, {}}, scm, 10.0,
                                            CounterfactualRange{0.5, 6.0});
  EXPECT_TRUE(rep.satisfied);
}

TEST(Conditions, UnsupportedPairs) {
  const StructuralModel scm = presets::appendix_b();
  EXPECT_THROW(check_relaxed_conditions(MultiplicativeConvex{0.1, 0, 0}, scm, 1.0),
               UnsupportedPair);
  EXPECT_THROW(check_relaxed_conditions(Unfair{}, scm, 1.0), UnsupportedPair);
}

}  // namespace
}  // namespace lcf
