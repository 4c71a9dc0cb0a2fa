#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcf/dataset.h"
#include "lcf/predictors.h"
#include "lcf/response.h"
#include "lcf/scm.h"

namespace lcf {

// Streaming mean of (y − ŷ)² with compensated summation.
class MseAccumulator {
 public:
  void add(double y_hat, double y);
  std::size_t count() const { return sum_.count(); }
  double value() const;

 private:
  KahanSum sum_;
};

struct PredictionPair {
  double y_hat = 0.0;
  double y = 0.0;
};

double mse(const std::vector<PredictionPair>& pairs);
double afce(const std::vector<SimulationResult>& results);

struct UirResult {
  double percent = 0.0;
  bool defined = false;
};
// (1 − Σ gap_after / Σ gap_before)·100; undefined when Σ gap_before = 0.
UirResult uir(const std::vector<SimulationResult>& results);

struct EvalReport {
  std::string method;
  double mse = 0.0;
  double afce = 0.0;
  double uir_percent = 0.0;
  bool uir_defined = true;
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  double eta = 0.0;
  double p1 = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
  static EvalReport from_csv_row(const std::string& line);
  std::string to_text() const;
};

struct DensityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t factual_count = 0;
  std::size_t counterfactual_count = 0;
};

// Histograms of y' and y̌' over m posterior draws of one record, on shared
// bin edges.
std::vector<DensityBin> density_export(const StructuralModel& scm,
                                       const PredictorSpec& spec,
                                       const Record& record, std::size_t m,
                                       std::size_t bins, const ResponseConfig& cfg,
                                       std::uint64_t seed,
                                       const McmcConfig& mcmc = {});

// Same binning applied to precomputed futures.
std::vector<DensityBin> histogram_pair(const std::vector<double>& factual,
                                       const std::vector<double>& counterfactual,
                                       std::size_t bins);

struct ViolationReport {
  double max_abs_deviation = 0.0;  // max |gap_after − gap_before|
  double max_rel_deviation = 0.0;  // relative to max(1, gap_before)
  bool precondition_met = false;   // some gap_before > 0
  std::size_t samples = 0;
  std::string note;
};

// Gap preservation check for Unfair / CfBaseline on a linear-additive
// model. Any other predictor variant is rejected.
ViolationReport lcf_violation_check(const StructuralModel& scm,
                                    const PredictorSpec& spec,
                                    const std::vector<ExogenousSample>& samples,
                                    Attribute a, Attribute a_check,
                                    const ResponseConfig& cfg);

}  // namespace lcf
