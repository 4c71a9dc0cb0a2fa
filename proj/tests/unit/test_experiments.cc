#include <gtest/gtest.h>

#include <filesystem>

#include "lcf/experiments.h"
#include "lcf/presets.h"

namespace lcf {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small(const std::string& experiment) {
  ExperimentConfig c = default_config(experiment);
  c.seeds = {0, 1};
  c.n = 150;
  c.m = 20;
  return c;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), root).string()] = read_text(e.path().string());
    }
  }
  return out;
}

TEST(Correlation, Basics) {
  EXPECT_DOUBLE_EQ(correlation({1, 2, 3}, {2, 4, 6}), 1.0);
  EXPECT_DOUBLE_EQ(correlation({1, 2, 3}, {3, 2, 1}), -1.0);
  EXPECT_THROW(correlation({1}, {1}), InvalidArgument);
}

TEST(Aggregate, SampleStd) {
  std::vector<SeedRun> runs(3);
  const double mse[] = {1.0, 2.0, 3.0};
  for (int i = 0; i < 3; ++i) {
    MethodRun mr;
    mr.fit.method = "UF";
    mr.eval.report.mse = mse[i];
    runs[i].methods.push_back(mr);
  }
  const auto rows = aggregate(runs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].mse_mean, 2.0);
  EXPECT_DOUBLE_EQ(rows[0].mse_std, 1.0);
  EXPECT_EQ(aggregate_csv(rows).substr(0, 62),
            "method,mse_mean,mse_std,afce_mean,afce_std,uir_mean,uir_std\nUF");
}

TEST(Evaluate, CountsAndInvariants) {
  const StructuralModel scm = presets::appendix_b();
  GenSpec g;
  g.n = 40;
  const auto data = gen_synthetic(g);
  EvalOptions opt;
  opt.m = 10;
  opt.keep_draws = true;
  const auto ev = evaluate_predictor(scm, Unfair{Vector::Constant(10, 0.3), 0.1}, data, opt,
                                     "UF", 0.0);
  EXPECT_EQ(ev.samples, 400u);
  EXPECT_EQ(ev.draws.size(), 400u);
  EXPECT_EQ(ev.report.n, 40u);
  for (const auto& d : ev.draws) {
    EXPECT_NEAR(d.result.gap_after, d.result.gap_before, 1e-9 * d.result.gap_before);
  }
  EXPECT_NEAR(ev.report.uir_percent, 0.0, 1e-9);
  EXPECT_THROW(evaluate_predictor(scm, Unfair{}, Dataset{}, opt, "UF", 0.0), InvalidArgument);
}

TEST(Experiment, Table1SmallDeterministic) {
  const auto cfg = small("table1");
  const auto a = run_experiment(cfg);
  ASSERT_EQ(a.runs.size(), 2u);
  ASSERT_EQ(a.aggregate.size(), 3u);
  EXPECT_EQ(a.aggregate[2].method, "Ours");
  EXPECT_LE(a.aggregate[2].afce_mean, 1e-6);
  EXPECT_NEAR(a.aggregate[0].uir_mean, 0.0, 1e-9);

  const fs::path root = fs::temp_directory_path() / "lcf_exp_test";
  fs::remove_all(root);
  write_artifacts(a, (root / "one").string());
  write_artifacts(run_experiment(cfg), (root / "two").string());
  const auto one = read_tree(root / "one");
  const auto two = read_tree(root / "two");
  EXPECT_EQ(one, two);
  for (const char* f : {"config.json", "aggregate.csv", "summary.txt", "seed_0/reports.csv",
                        "seed_0/split.json", "seed_0/models.json", "seed_0/manifest.txt",
                        "seed_1/draws_Ours.csv"}) {
    EXPECT_TRUE(one.count(f)) << f;
  }
  EXPECT_NE(one.at("seed_0/manifest.txt").find("config_hash: "), std::string::npos);
  fs::remove_all(root);
}

TEST(Experiment, SweepFollowsGapLaw) {
  auto cfg = small("sweep");
  cfg.seeds = {3};
  const auto res = run_experiment(cfg);
  const auto& rows = res.runs[0].sweep;
  ASSERT_EQ(rows.size(), 18u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& base = rows[k - k % 9];
    const double expect =
        (1 - 2 * rows[k].p1 / rows[k].T) * base.afce / (1 - 2 * base.p1 / base.T);
    EXPECT_NEAR(rows[k].afce, expect, 1e-6 * base.afce) << k;
    if (k % 9) EXPECT_LT(rows[k].afce, rows[k - 1].afce);
  }
  EXPECT_NE(sweep_csv(res.runs).find("seed,eta,T,p1"), std::string::npos);
}

TEST(Experiment, EstimatedModeRuns) {
  auto cfg = small("table1");
  cfg.seeds = {0};
  cfg.n = 400;
  cfg.scm_mode = "estimated";
  const auto res = run_experiment(cfg);
  const auto& est = std::get<LinearAdditiveScm>(res.runs[0].scm);
  EXPECT_NE(est.alpha[0], presets::appendix_b().alpha[0]);
  EXPECT_LE(res.aggregate[2].afce_mean, 1e-6);
}

TEST(Experiment, AuditAndDensity) {
  auto cfg = small("audit");
  cfg.seeds = {0};
  const auto audit = run_experiment(cfg);
  EXPECT_NE(audit.audit.find("UF: max |gap_after - gap_before|"), std::string::npos);
  cfg = small("density");
  cfg.seeds = {0};
  cfg.density_m = 200;
  const auto dens = run_experiment(cfg);
  std::size_t ours = 0;
  for (const auto& r : dens.runs[0].density) {
    if (r.method == "Ours") {
      ++ours;
      EXPECT_EQ(r.bin.factual_count, r.bin.counterfactual_count);
    }
  }
  EXPECT_EQ(ours, cfg.density_bins);
}

}  // namespace
}  // namespace lcf
