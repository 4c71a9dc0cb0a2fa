#pragma once

#include <ostream>
#include <vector>

#include "lcf/predictors.h"
#include "lcf/scm.h"

namespace lcf {

struct ResponseConfig {
  double eta = 1.0;
  void validate() const;
};

// u' = u + eta·grad over the responsive coordinates. Noise and context are
// carried over unchanged.
ExogenousSample respond(const ExogenousSample& u, const Vector& grad,
                        const ResponseConfig& cfg);

Outcome future_outcome(const StructuralModel& scm, const ExogenousSample& u_prime,
                       Attribute a);

struct SimulationResult {
  double y = 0.0;
  double y_check = 0.0;
  double y_prime = 0.0;
  double y_check_prime = 0.0;
  double gap_before = 0.0;
  double gap_after = 0.0;
};

// Generic form: each world responds to the predictor it faces, whose y̌ is
// the mean outcome over that world's partners.
SimulationResult simulate_worlds(const StructuralModel& scm,
                                 const PredictorSpec& spec,
                                 const ExogenousSample& u,
                                 const World& factual,
                                 const std::vector<World>& factual_partners,
                                 const World& counterfactual,
                                 const std::vector<World>& counterfactual_partners,
                                 const ResponseConfig& cfg);

// Factual world a, counterfactual world a_check. The factual predictor reads
// the counterfactual outcome and vice versa (mean over all alternates when
// the domain has more than two values).
SimulationResult simulate_pair(const StructuralModel& scm,
                               const PredictorSpec& spec,
                               const ExogenousSample& u, Attribute a,
                               Attribute a_check, const ResponseConfig& cfg);

// Counterfactual world changes the attribute along unfair paths only.
// scm must be linear-additive.
SimulationResult simulate_path_dependent(const StructuralModel& scm,
                                         const PredictorSpec& spec,
                                         const ExogenousSample& u, Attribute a,
                                         Attribute a_check, const PathMask& mask,
                                         const ResponseConfig& cfg);

// |1 − 2 p1 / T| · |y − y̌|
double closed_form_gap(double p1, double T, double y, double y_check);

struct DrawResult {
  std::size_t record_id = 0;
  std::size_t draw_id = 0;
  SimulationResult result;
};

// Columns: record_id, draw_id, y, y_check, y_prime, y_check_prime.
void write_draw_stream(std::ostream& out, const std::vector<DrawResult>& rows);

}  // namespace lcf
