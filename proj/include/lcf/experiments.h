#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcf/config.h"
#include "lcf/data.h"
#include "lcf/dataset.h"
#include "lcf/metrics.h"
#include "lcf/training.h"

namespace lcf {

struct ExperimentConfig {
  // table1 | table4 | table5 | table6 | law-semisynthetic | sweep | density | audit
  std::string experiment = "table1";
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t n = 1000;
  std::size_t m = 100;
  double eta = 10.0;
  P1Mode p1_mode = P1Mode::kPerfect;
  double p1_value = 0.0;
  Optimizer optimizer = Optimizer::kNormalEquations;
  DescentConfig descent;
  HInputs h_inputs = HInputs::kUx;
  std::string scm_mode = "known";  // known | estimated
  std::optional<StructuralModel> scm;  // overrides the experiment's preset
  std::string data_path;               // external CSV instead of generated data
  std::string data_schema = "generic";
  std::vector<double> sweep_etas{1.0, 10.0};
  std::size_t sweep_points = 9;  // T/512 ... T/2
  std::size_t density_bins = 30;
  std::size_t density_m = 1000;
  std::size_t density_record = 0;  // index into the test split
  McmcConfig mcmc{500, 200, 1, 0.5};
  LawFitConfig law_fit;
  bool write_draws = true;
  bool parallel_seeds = false;

  void validate() const;
};

ExperimentConfig experiment_from_json(const Json& j);
Json experiment_to_json(const ExperimentConfig& cfg);
// Fills experiment-specific defaults (n, m, draw output) for keys absent
// from a config.
ExperimentConfig default_config(const std::string& experiment);

struct EvalOptions {
  std::size_t m = 100;
  double eta = 10.0;
  std::uint64_t seed = 0;
  McmcConfig mcmc;
  bool keep_draws = false;
  std::optional<PathMask> mask;
};

struct Evaluation {
  EvalReport report;
  std::size_t samples = 0;
  std::size_t strict_decreases = 0;  // draws with gap_after < gap_before
  std::size_t positive_gaps = 0;     // draws with gap_before > 0
  double max_gap_after = 0.0;
  std::vector<DrawResult> draws;
};

// Test-set evaluation: m posterior draws per record; MSE against the
// observed label, gaps from simulate_pair against every alternate
// attribute.
Evaluation evaluate_predictor(const StructuralModel& scm, const PredictorSpec& spec,
                              const Dataset& test, const EvalOptions& opt,
                              const std::string& method, double p1);

struct MethodRun {
  FitReport fit;
  Evaluation eval;
};

struct SweepRow {
  std::uint64_t seed = 0;
  double eta = 0.0;
  double T = 0.0;
  double p1 = 0.0;
  double mse = 0.0;
  double afce = 0.0;
  double uir = 0.0;
};

struct DensityRow {
  std::string method;
  DensityBin bin;
};

struct SeedRun {
  std::uint64_t seed = 0;
  Split split;
  StructuralModel scm;  // model used for training and evaluation
  std::vector<MethodRun> methods;
  std::vector<SweepRow> sweep;
  std::vector<DensityRow> density;
  std::map<std::string, double> extras;
  std::vector<std::string> notes;
};

struct AggregateRow {
  std::string method;
  double mse_mean = 0, mse_std = 0;
  double afce_mean = 0, afce_std = 0;
  double uir_mean = 0, uir_std = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRun> runs;
  std::vector<AggregateRow> aggregate;
  std::string audit;  // audit experiment only
};

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed);
ExperimentResult run_experiment(const ExperimentConfig& cfg);
std::vector<AggregateRow> aggregate(const std::vector<SeedRun>& runs);

// Writes config.json, aggregate.csv, per-seed reports, splits, models and
// the experiment-specific tables under out_dir.
void write_artifacts(const ExperimentResult& result, const std::string& out_dir);

std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string sweep_csv(const std::vector<SeedRun>& runs);
std::string density_csv(const std::vector<DensityRow>& rows);

// Pearson correlation.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lcf
