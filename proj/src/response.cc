#include "lcf/response.h"

#include <cmath>

namespace lcf {

void ResponseConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InvalidArgument("eta must be a positive finite number");
  }
}

ExogenousSample respond(const ExogenousSample& u, const Vector& grad,
                        const ResponseConfig& cfg) {
  cfg.validate();
  if (grad.size() != u.responsive_size()) {
    throw InvalidArgument("gradient length " + std::to_string(grad.size()) +
                          " != responsive dimension " +
                          std::to_string(u.responsive_size()));
  }
  return u.with_responsive(u.responsive() + cfg.eta * grad);
}

Outcome future_outcome(const StructuralModel& scm, const ExogenousSample& u_prime,
                       Attribute a) {
  return forward(scm, u_prime, a);
}

SimulationResult simulate_worlds(const StructuralModel& scm,
                                 const PredictorSpec& spec,
                                 const ExogenousSample& u,
                                 const World& factual,
                                 const std::vector<World>& factual_partners,
                                 const World& counterfactual,
                                 const std::vector<World>& counterfactual_partners,
                                 const ResponseConfig& cfg) {
  cfg.validate();
  SimulationResult r;
  r.y = forward(scm, u, factual).y;
  r.y_check = forward(scm, u, counterfactual).y;

  const Vector g_f = grad_wrt_u(spec, scm, u, factual, factual_partners);
  const Vector g_cf = grad_wrt_u(spec, scm, u, counterfactual, counterfactual_partners);
  r.y_prime = forward(scm, respond(u, g_f, cfg), factual).y;
  r.y_check_prime = forward(scm, respond(u, g_cf, cfg), counterfactual).y;

  r.gap_before = std::abs(r.y - r.y_check);
  r.gap_after = std::abs(r.y_prime - r.y_check_prime);
  if (!std::isfinite(r.y_prime) || !std::isfinite(r.y_check_prime)) {
    throw NumericalError("simulation produced a non-finite future outcome");
  }
  return r;
}

SimulationResult simulate_pair(const StructuralModel& scm,
                               const PredictorSpec& spec,
                               const ExogenousSample& u, Attribute a,
                               Attribute a_check, const ResponseConfig& cfg) {
  const auto& domain = attribute_domain(scm);
  if (!in_domain(domain, a) || !in_domain(domain, a_check)) {
    throw InvalidArgument("attribute outside the model's domain");
  }
  return simulate_worlds(scm, spec, u, World::uniform(a), alternate_worlds(scm, a),
                         World::uniform(a_check), alternate_worlds(scm, a_check),
                         cfg);
}

SimulationResult simulate_path_dependent(const StructuralModel& scm,
                                         const PredictorSpec& spec,
                                         const ExogenousSample& u, Attribute a,
                                         Attribute a_check, const PathMask& mask,
                                         const ResponseConfig& cfg) {
  const auto* linear = std::get_if<LinearAdditiveScm>(&scm);
  if (!linear) {
    throw InvalidArgument("path-dependent simulation needs a linear-additive model");
  }
  const World factual = World::uniform(a);
  const World pd = path_dependent_world(*linear, a, a_check, mask);
  return simulate_worlds(scm, spec, u, factual, {pd}, pd,
                         {factual}, cfg);
}

double closed_form_gap(double p1, double T, double y, double y_check) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  return std::abs(1.0 - 2.0 * p1 / T) * std::abs(y - y_check);
}

void write_draw_stream(std::ostream& out, const std::vector<DrawResult>& rows) {
  out << "record_id,draw_id,y,y_check,y_prime,y_check_prime\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    out << row.record_id << ',' << row.draw_id << ',' << format_double(r.y) << ','
        << format_double(r.y_check) << ',' << format_double(r.y_prime) << ','
        << format_double(r.y_check_prime) << '\n';
  }
}

}  // namespace lcf
