#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcf/dataset.h"
#include "lcf/metrics.h"
#include "lcf/scm.h"

namespace lcf {

struct GenSpec {
  // appendix-b | multiplicative-f | scalar-e | law-semisynthetic | custom
  std::string preset = "appendix-b";
  std::optional<StructuralModel> scm;  // required for custom, overrides presets
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  // Probability of each attr_domain value; empty means uniform.
  std::vector<double> attr_probs;
  // Law-school only: Pr{R = 1} for the binary race covariate.
  double race_p = 0.3;

  void validate() const;
};

// Model behind a GenSpec (preset or custom).
StructuralModel gen_model(const GenSpec& spec);

// Draws exogenous variables from the priors and attributes from attr_probs;
// record i depends only on (seed, i). The true draws are kept in `truth`.
Dataset gen_synthetic(const GenSpec& spec);

enum class CsvSchema { kGeneric, kLaw, kLoan };
CsvSchema parse_schema(const std::string& s);

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_skipped = 0;
  std::vector<std::string> skip_reasons;  // first few only
};

// Header-driven loading. generic: x1..xd, a, y. law: sex, race, ugpa, lsat,
// fya (x = [race, ugpa, lsat], a = sex, y = fya). loan: gender, income,
// coapp_income, married, area, amount (a = gender, y = amount). Text
// categories get integer codes recorded in metadata.
Dataset load_csv(const std::string& path, CsvSchema schema,
                 LoadReport* report = nullptr);

void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

// One header line plus one row per report.
void save_reports(const std::vector<EvalReport>& reports, const std::string& path);
std::vector<EvalReport> load_reports(const std::string& path);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace lcf
