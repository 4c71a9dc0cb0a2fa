#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "../support.h"
#include "lcf/presets.h"
#include "lcf/scm.h"

namespace lcf {
namespace {

using testing::linear_sample;
using testing::vec;

TEST(Forward, LinearToy) {
  const StructuralModel scm = presets::linear_toy();
  auto out = forward(scm, linear_sample({0.5}, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(out.x[0], 0.5);
  EXPECT_DOUBLE_EQ(out.y, 0.7);
  out = forward(scm, linear_sample({0.0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(out.x[0], 1.0);
  EXPECT_DOUBLE_EQ(out.y, 1.0);
}

TEST(Forward, ScalarFamily) {
  const StructuralModel scm = presets::scalar_e();
  ExogenousSample u;
  u.ux = vec({1.0});
  const auto out = forward(scm, u, 0.0);
  EXPECT_NEAR(out.y, std::pow(1.5987, 2.0 / 3.0), 1e-12);
  EXPECT_NEAR(out.y, 1.3673, 1e-4);
}

TEST(Forward, RejectsBadInputs) {
  const StructuralModel scm = presets::linear_toy();
  EXPECT_THROW(forward(scm, linear_sample({0.5, 0.1}, 0.2), 0.0), InvalidArgument);
  EXPECT_THROW(forward(scm, linear_sample({0.5}, 0.2), 3.0), InvalidArgument);
}

TEST(Counterfactual, LinearAndMultiplicative) {
  const StructuralModel lin = presets::linear_toy();
  const auto u = linear_sample({0.5}, 0.2);
  auto cf = counterfactual(lin, u, 1.0);
  EXPECT_DOUBLE_EQ(cf.x[0], 1.5);
  EXPECT_DOUBLE_EQ(cf.y, 1.7);
  const auto same = counterfactual(lin, u, 0.0);
  const auto fact = forward(lin, u, 0.0);
  EXPECT_EQ(same.y, fact.y);

  const StructuralModel mul = presets::multiplicative_toy();
  cf = counterfactual(mul, u, 2.0);
  EXPECT_DOUBLE_EQ(cf.x[0], 1.0);
  EXPECT_DOUBLE_EQ(cf.y, 1.2);
}

TEST(Abduct, LinearToyDeterministicUx) {
  const auto sampler = abduct(presets::linear_toy(), vec({0.5}), 0.0);
  const auto draws = sampler.draw(200, 7);
  double mean = 0.0;
  for (const auto& u : draws) {
    EXPECT_DOUBLE_EQ(u.ux[0], 0.5);
    ASSERT_TRUE(u.uy.has_value());
    EXPECT_GT(*u.uy, 0.0);
    EXPECT_LT(*u.uy, 1.0);
    mean += *u.uy;
  }
  EXPECT_NEAR(mean / 200.0, 0.5, 0.1);
  EXPECT_TRUE(sampler.deterministic_ux());
}

TEST(Abduct, Multiplicative) {
  const auto sampler = abduct(presets::multiplicative_toy(), vec({0.5}), 1.0);
  EXPECT_DOUBLE_EQ(sampler.deterministic_part().ux[0], 0.5);
}

TEST(Abduct, AppendixBRoundTrip) {
  const auto scm = presets::appendix_b();
  ExogenousSample u;
  u.ux = Vector::Constant(10, 0.3);
  u.uy = 0.4;
  const auto x = forward(scm, u, 1.0).x;
  const auto sampler = abduct(scm, x, 1.0);
  EXPECT_LE((sampler.deterministic_part().ux - u.ux).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Abduct, SameSeedSameDraws) {
  const auto sampler = abduct(presets::appendix_b(), Vector::Constant(10, 0.5), 0.0);
  const auto a = sampler.draw(20, 99);
  const auto b = sampler.draw(20, 99);
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_EQ(*a[j].uy, *b[j].uy);
}

TEST(PathDependent, Examples) {
  LinearAdditiveScm scm;
  scm.alpha = vec({1, 1});
  scm.beta = vec({1, 2});
  scm.w = vec({1, 1});
  scm.gamma = 1.0;
  scm.prior_ux.assign(2, Distribution::uniform(0, 1));
  scm.attr_domain = {0.0, 1.0};
  const auto u = linear_sample({0.1, 0.2}, 0.3);
  const StructuralModel model = scm;
  const Vector x = forward(model, u, 0.0).x;
  EXPECT_NEAR(path_dependent_counterfactual(scm, x, 0, 1, PathMask{{true, false}}, u),
              1.6, 1e-12);
  EXPECT_NEAR(path_dependent_counterfactual(scm, x, 0, 1, PathMask::all(2, true), u),
              counterfactual(model, u, 1.0).y, 1e-12);
  EXPECT_NEAR(path_dependent_counterfactual(scm, x, 0, 1, PathMask::all(2, false), u),
              forward(model, u, 0.0).y, 1e-12);
}

TEST(Gradients, OutcomeGradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const StructuralModel scm = testing::random_linear(rng, 4);
    const auto u = testing::random_sample(rng, 4);
    const Vector g = outcome_gradient(scm, u, World::uniform(1.0));
    const Vector base = u.responsive();
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      Vector p = base, m = base;
      p[i] += 1e-6;
      m[i] -= 1e-6;
      const double fd = (forward(scm, u.with_responsive(p), 1.0).y -
                         forward(scm, u.with_responsive(m), 1.0).y) /
                        2e-6;
      EXPECT_NEAR(g[i], fd, 1e-7);
    }
  }
}

TEST(ScalarShape, AppendixEModel) {
  const auto scm = presets::scalar_e();
  EXPECT_NO_THROW(scm.validate());
  const auto rep = check_scalar_shape(scm);
  EXPECT_TRUE(rep.increasing);
  EXPECT_TRUE(rep.strictly_concave);
  EXPECT_TRUE(rep.gamma_nonnegative);
  // The declared M is smaller than the grid estimate on this domain.
  EXPECT_FALSE(rep.lipschitz_M_ok);
  EXPECT_FALSE(rep.warnings.empty());
}

TEST(ScalarShape, RejectsConvexFunction) {
  auto scm = presets::scalar_e();
  scm.f_tilde.value = [](double s) { return s * s; };
  scm.f_tilde.derivative = [](double s) { return 2 * s; };
  EXPECT_THROW(scm.validate(), InvalidArgument);
}

TEST(Law, PosteriorConcentratesWhenGIsNearlyExact) {
  LawSchoolScm scm;
  scm.wG_K = 2.0;
  scm.wG_R = 0.5;
  scm.wG_S = 0.3;
  scm.bG = 1.0;
  scm.sigmaG = 1e-3;
  scm.wL_K = 0.0;
  scm.bL = 2.0;
  const LawEvidence ev{1.0, 1.0, 3.2, 7.0, std::nullopt};
  const double k_star = (3.2 - 0.5 - 0.3 - 1.0) / 2.0;
  const auto res = posterior_sample_k(scm, ev, McmcConfig{}, 11);
  const double mean =
      std::accumulate(res.samples.begin(), res.samples.end(), 0.0) / res.samples.size();
  EXPECT_NEAR(mean, k_star, 0.01);
}

TEST(Law, UninformativeLikelihoodGivesPrior) {
  LawSchoolScm scm;
  scm.wG_K = scm.wL_K = scm.wF_K = 0.0;
  McmcConfig cfg;
  cfg.samples = 2000;
  cfg.proposal_scale = 2.0;
  const auto res = posterior_sample_k(scm, LawEvidence{0, 0, 0.3, 2, std::nullopt}, cfg, 5);
  double mean = 0, sq = 0;
  for (double k : res.samples) {
    mean += k;
    sq += k * k;
  }
  mean /= res.samples.size();
  const double var = sq / res.samples.size() - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.1);
  EXPECT_NEAR(var, 1.0, 0.15);
}

TEST(Law, GenerationOracle) {
  const auto scm = presets::law_semisynthetic();
  ExogenousSample u;
  u.ux = vec({1.2});
  u.noise = vec({0.1, 0.4, -0.2});
  u.context = vec({1.0});
  const auto out = forward(StructuralModel{scm}, u, 1.0);
  const LawEvidence ev{out.x[0], 1.0, out.x[1], out.x[2], std::nullopt};
  McmcConfig cfg;
  cfg.samples = 3000;
  const auto res = posterior_sample_k(scm, ev, cfg, 17);
  double mean = 0, sq = 0;
  for (double k : res.samples) {
    mean += k;
    sq += k * k;
  }
  mean /= res.samples.size();
  const double sd = std::sqrt(sq / res.samples.size() - mean * mean);
  EXPECT_LT(std::abs(mean - 1.2), 3 * sd);
  EXPECT_GT(res.acceptance_rate, 0.05);
}

TEST(Law, AbductedSamplesReproduceEvidence) {
  const auto scm = presets::law_semisynthetic();
  ExogenousSample u;
  u.ux = vec({-0.4});
  u.noise = vec({0.7, 0.9, 0.3});
  u.context = vec({0.0});
  const StructuralModel model = scm;
  const auto out = forward(model, u, 0.0);
  const auto sampler = abduct(model, out.x, 0.0);
  for (const auto& d : sampler.draw(50, 3)) {
    const auto again = forward(model, d, 0.0);
    EXPECT_NEAR(again.x[1], out.x[1], 1e-9);
    EXPECT_EQ(again.x[2], out.x[2]);
  }
}

TEST(Law, PoissonQuantile) {
  EXPECT_EQ(poisson_quantile(0.5, 1e-3), 0.0);
  EXPECT_EQ(poisson_quantile(0.999999, 1e-3), 1.0);
  EXPECT_THROW(poisson_quantile(1.0, 2.0), InvalidArgument);
}

TEST(Law, LogRateClampIsCounted) {
  LawSchoolScm scm;
  scm.bL = 100.0;
  const auto before = poisson_clamp_count();
  EXPECT_EQ(law_log_rate(scm, 0.0, 0.0, 0.0), 30.0);
  EXPECT_EQ(poisson_clamp_count(), before + 1);
}

TEST(Validation, Models) {
  auto lin = presets::linear_toy();
  lin.alpha[0] = 0.0;
  EXPECT_THROW(lin.validate(), InvalidArgument);
  auto mul = presets::multiplicative_toy();
  mul.attr_domain = {0.0, 1.0};
  EXPECT_THROW(mul.validate(), InvalidArgument);
  EXPECT_NO_THROW(presets::appendix_b().validate());
  EXPECT_NO_THROW(presets::multiplicative_f().validate());
  EXPECT_NO_THROW(presets::law_semisynthetic().validate());
}

}  // namespace
}  // namespace lcf
