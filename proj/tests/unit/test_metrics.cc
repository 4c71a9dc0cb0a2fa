#include <gtest/gtest.h>

#include <random>

#include "../support.h"
#include "lcf/metrics.h"
#include "lcf/presets.h"

namespace lcf {
namespace {

using testing::vec;

SimulationResult gaps(double before, double after) {
  SimulationResult r;
  r.gap_before = before;
  r.gap_after = after;
  return r;
}

TEST(Mse, Examples) {
  EXPECT_EQ(mse({{1.0, 1.0}, {2.5, 2.5}}), 0.0);
  EXPECT_DOUBLE_EQ(mse({{0.0, 1.0}, {1.0, 1.0}}), 0.5);
  EXPECT_THROW(mse({}), InvalidArgument);
}

TEST(Mse, StreamingMatchesOnePass) {
  Rng rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<PredictionPair> pairs;
  MseAccumulator acc;
  for (int i = 0; i < 100000; ++i) {
    pairs.push_back({z(rng), z(rng)});
    acc.add(pairs.back().y_hat, pairs.back().y);
  }
  long double s = 0;
  for (const auto& p : pairs) s += (long double)(p.y - p.y_hat) * (p.y - p.y_hat);
  const double ref = static_cast<double>(s / pairs.size());
  EXPECT_NEAR(acc.value(), ref, 1e-12 * ref);
  EXPECT_EQ(acc.value(), mse(pairs));
}

TEST(Afce, Examples) {
  EXPECT_DOUBLE_EQ(afce({gaps(1.0, 0.5), gaps(1.0, 1.5)}), 1.0);
  EXPECT_THROW(afce({}), InvalidArgument);
}

TEST(Uir, Examples) {
  EXPECT_EQ(uir({gaps(1.0, 1.0), gaps(2.0, 2.0)}).percent, 0.0);
  EXPECT_EQ(uir({gaps(1.0, 0.0), gaps(2.0, 0.0)}).percent, 100.0);
  EXPECT_DOUBLE_EQ(uir({gaps(1.0, 0.5), gaps(3.0, 1.5)}).percent, 50.0);
  const auto u = uir({gaps(0.0, 0.0), gaps(0.0, 0.0)});
  EXPECT_FALSE(u.defined);
  EXPECT_TRUE(uir({gaps(1.0, 0.5)}).defined);
}

TEST(Uir, ScaleInvariant) {
  Rng rng(2);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<SimulationResult> a;
  for (int i = 0; i < 50; ++i) a.push_back(gaps(u01(rng), u01(rng)));
  for (double c : {0.5, 2.0, 8.0}) {
    std::vector<SimulationResult> b = a;
    for (auto& r : b) {
      r.gap_before *= c;
      r.gap_after *= c;
    }
    EXPECT_EQ(uir(a).percent, uir(b).percent) << c;
  }
}

TEST(EvalReport, CsvRoundTrip) {
  EvalReport r;
  r.method = "Ours";
  r.mse = 0.06410000000000001;
  r.afce = 1e-17;
  r.uir_percent = 99.99999999;
  r.n = 200;
  r.m = 100;
  r.seed = 4;
  r.eta = 10.0;
  r.p1 = 0.05684781435559828;
  const auto back = EvalReport::from_csv_row(r.csv_row());
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.mse, r.mse);
  EXPECT_EQ(back.afce, r.afce);
  EXPECT_EQ(back.uir_percent, r.uir_percent);
  EXPECT_EQ(back.n, r.n);
  EXPECT_EQ(back.m, r.m);
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(back.eta, r.eta);
  EXPECT_EQ(back.p1, r.p1);
  r.uir_defined = false;
  EXPECT_FALSE(EvalReport::from_csv_row(r.csv_row()).uir_defined);
  EXPECT_EQ(EvalReport::csv_header(), "method,mse,afce,uir,n,m,seed,eta,p1");
  EXPECT_THROW(EvalReport::from_csv_row("a,b"), InvalidArgument);
  EXPECT_THROW(EvalReport::from_csv_row("x,1,2,3,4,5,6,7,zz"), InvalidArgument);
}

TEST(Histogram, SharedEdges) {
  const auto bins = histogram_pair({0.0, 1.0, 2.0}, {3.0, 4.0}, 4);
  ASSERT_EQ(bins.size(), 4u);
  EXPECT_EQ(bins.front().lo, 0.0);
  EXPECT_EQ(bins.back().hi, 4.0);
  std::size_t f = 0, c = 0;
  for (const auto& b : bins) {
    f += b.factual_count;
    c += b.counterfactual_count;
  }
  EXPECT_EQ(f, 3u);
  EXPECT_EQ(c, 2u);
  EXPECT_EQ(bins.back().counterfactual_count, 2u);  // 3 and 4 share the closed last bin
  EXPECT_THROW(histogram_pair({}, {1.0}, 3), InvalidArgument);
  EXPECT_THROW(histogram_pair({1.0}, {1.0}, 0), InvalidArgument);
}

TEST(Density, PerfectPredictorHistogramsIdentical) {
  const StructuralModel scm = presets::appendix_b();
  const double T = compute_T(scm, 10.0);
  LcfQuadratic q;
  q.p1 = T / 2.0;
  q.p2 = 0.3;
  q.p3 = 0.1;
  q.theta = Vector::Constant(11, 0.05);
  q.theta[10] = 0.0;
  Record rec;
  rec.x = Vector::Constant(10, 0.5);
  rec.a = 1.0;
  rec.y = 1.0;
  const auto bins = density_export(scm, q, rec, 500, 20, {10.0}, 3);
  for (const auto& b : bins) EXPECT_EQ(b.factual_count, b.counterfactual_count);
}

TEST(Density, UnfairHistogramsShiftedByGap) {
  const auto lin = presets::appendix_b();
  const StructuralModel scm = lin;
  Unfair uf{Vector::Constant(10, 0.2), 0.0};
  Record rec{Vector::Constant(10, 0.5), 1.0, 1.0};
  const std::size_t m = 2000, nb = 200;
  const auto bins = density_export(scm, uf, rec, m, nb, {10.0}, 4);
  // Earth mover distance from the cumulative counts.
  double emd = 0.0;
  long cf = 0, cc = 0;
  for (const auto& b : bins) {
    cf += static_cast<long>(b.factual_count);
    cc += static_cast<long>(b.counterfactual_count);
    emd += std::abs(cf - cc) / static_cast<double>(m) * (b.hi - b.lo);
  }
  const double shift = std::abs(lin.w.dot(lin.beta));
  const double width = bins.front().hi - bins.front().lo;
  EXPECT_NEAR(emd, shift, 2.0 * width);
}

TEST(Density, DeterministicDrawsSingleBin) {
  const StructuralModel scm = presets::scalar_e();
  ScalarQuadratic s{0.1, 0.0, 0.2};
  Record rec{vec({1.5}), 0.0, 1.0};
  const auto bins = density_export(scm, s, rec, 100, 10, {10.0}, 5);
  int fb = 0, cb = 0;
  for (const auto& b : bins) {
    fb += b.factual_count > 0;
    cb += b.counterfactual_count > 0;
  }
  EXPECT_EQ(fb, 1);
  EXPECT_EQ(cb, 1);
  EXPECT_THROW(density_export(scm, s, rec, 99, 10, {10.0}, 5), InvalidArgument);
}

TEST(Violation, CfBaselinePreservesGaps) {
  const StructuralModel scm = presets::linear_toy();
  CfBaseline cf{vec({0.7, -0.4}), 0.2};
  Rng rng(6);
  std::vector<ExogenousSample> us;
  for (int i = 0; i < 100; ++i) us.push_back(testing::random_sample(rng, 1));
  const auto rep = lcf_violation_check(scm, cf, us, 0.0, 1.0, {10.0});
  EXPECT_LE(rep.max_rel_deviation, 1e-9);
  EXPECT_TRUE(rep.precondition_met);
  EXPECT_EQ(rep.samples, 100u);
}

TEST(Violation, NullEffectAndContract) {
  auto lin = presets::linear_toy();
  lin.beta = vec({0.0});
  const StructuralModel scm = lin;
  const auto u = testing::linear_sample({0.3}, 0.4);
  const auto rep = lcf_violation_check(scm, Unfair{vec({1.0}), 0.0}, {u}, 0.0, 1.0, {1.0});
  EXPECT_FALSE(rep.precondition_met);
  EXPECT_NE(rep.note.find("precondition unmet"), std::string::npos);
  EXPECT_EQ(rep.max_abs_deviation, 0.0);
  LcfQuadratic q{0.1, 0.0, 0.0, Vector()};
  EXPECT_THROW(lcf_violation_check(scm, q, {u}, 0.0, 1.0, {1.0}), InvalidArgument);
}

}  // namespace
}  // namespace lcf
