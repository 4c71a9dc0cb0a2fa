#include "lcf/metrics.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lcf {

void MseAccumulator::add(double y_hat, double y) {
  const double e = y - y_hat;
  sum_.add(e * e);
}

double MseAccumulator::value() const {
  if (sum_.count() == 0) throw InvalidArgument("mse of an empty stream");
  return sum_.value() / static_cast<double>(sum_.count());
}

double mse(const std::vector<PredictionPair>& pairs) {
  MseAccumulator acc;
  for (const auto& p : pairs) acc.add(p.y_hat, p.y);
  return acc.value();
}

double afce(const std::vector<SimulationResult>& results) {
  if (results.empty()) throw InvalidArgument("afce of an empty stream");
  KahanSum acc;
  for (const auto& r : results) acc.add(r.gap_after);
  return acc.value() / static_cast<double>(results.size());
}

UirResult uir(const std::vector<SimulationResult>& results) {
  if (results.empty()) throw InvalidArgument("uir of an empty stream");
  KahanSum before, after;
  for (const auto& r : results) {
    before.add(r.gap_before);
    after.add(r.gap_after);
  }
  UirResult out;
  if (!(before.value() > 0.0)) return out;
  out.defined = true;
  out.percent = (1.0 - after.value() / before.value()) * 100.0;
  return out;
}

std::string EvalReport::csv_header() { return "method,mse,afce,uir,n,m,seed,eta,p1"; }

std::string EvalReport::csv_row() const {
  std::ostringstream os;
  os << method << ',' << format_double(mse) << ',' << format_double(afce) << ','
     << (uir_defined ? format_double(uir_percent) : std::string("undefined")) << ','
     << n << ',' << m << ',' << seed << ',' << format_double(eta) << ','
     << format_double(p1);
  return os.str();
}

EvalReport EvalReport::from_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() != 9) {
    throw InvalidArgument("report row needs 9 fields, got " + std::to_string(f.size()));
  }
  EvalReport r;
  try {
    r.method = f[0];
    r.mse = std::stod(f[1]);
    r.afce = std::stod(f[2]);
    r.uir_defined = f[3] != "undefined";
    r.uir_percent = r.uir_defined ? std::stod(f[3]) : 0.0;
    r.n = std::stoull(f[4]);
    r.m = std::stoull(f[5]);
    r.seed = std::stoull(f[6]);
    r.eta = std::stod(f[7]);
    r.p1 = std::stod(f[8]);
  } catch (const std::logic_error&) {
    throw InvalidArgument("report row has an unparseable field: " + line);
  }
  return r;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "method: " << method << "\n"
     << "mse: " << format_double(mse) << "\n"
     << "afce: " << format_double(afce) << "\n"
     << "uir_percent: "
     << (uir_defined ? format_double(uir_percent) : std::string("undefined")) << "\n"
     << "n: " << n << "\nm: " << m << "\nseed: " << seed << "\n"
     << "eta: " << format_double(eta) << "\np1: " << format_double(p1) << "\n";
  return os.str();
}

namespace {

// Futures that agree to rounding error must land in the same bin.
double snap(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const double scale = std::pow(10.0, 11 - std::floor(std::log10(std::abs(v))));
  return std::round(v * scale) / scale;
}

}  // namespace

std::vector<DensityBin> histogram_pair(const std::vector<double>& factual,
                                       const std::vector<double>& counterfactual,
                                       std::size_t bins) {
  if (bins < 1) throw InvalidArgument("need at least one bin");
  if (factual.empty() || counterfactual.empty()) {
    throw InvalidArgument("histogram of an empty series");
  }
  std::vector<double> f, c;
  for (double v : factual) f.push_back(snap(v));
  for (double v : counterfactual) c.push_back(snap(v));
  double lo = std::min(*std::min_element(f.begin(), f.end()),
                       *std::min_element(c.begin(), c.end()));
  double hi = std::max(*std::max_element(f.begin(), f.end()),
                       *std::max_element(c.begin(), c.end()));
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<DensityBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  auto index = [&](double v) {
    const auto i = static_cast<std::size_t>(std::floor((v - lo) / width));
    return std::min(i, bins - 1);
  };
  for (double v : f) ++out[index(v)].factual_count;
  for (double v : c) ++out[index(v)].counterfactual_count;
  return out;
}

std::vector<DensityBin> density_export(const StructuralModel& scm,
                                       const PredictorSpec& spec,
                                       const Record& record, std::size_t m,
                                       std::size_t bins, const ResponseConfig& cfg,
                                       std::uint64_t seed, const McmcConfig& mcmc) {
  if (m < 100) throw InvalidArgument("density export needs m >= 100");
  const auto draws = abduct(scm, record.x, record.a, mcmc).draw(m, seed);
  const auto alts = alternate_worlds(scm, record.a);
  const Attribute a_check = alts.front().attribute;
  std::vector<double> f(m), c(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto r = simulate_pair(scm, spec, draws[j], record.a, a_check, cfg);
    f[j] = r.y_prime;
    c[j] = r.y_check_prime;
  }
  return histogram_pair(f, c, bins);
}

ViolationReport lcf_violation_check(const StructuralModel& scm,
                                    const PredictorSpec& spec,
                                    const std::vector<ExogenousSample>& samples,
                                    Attribute a, Attribute a_check,
                                    const ResponseConfig& cfg) {
  if (!std::holds_alternative<Unfair>(spec) && !std::holds_alternative<CfBaseline>(spec)) {
    throw InvalidArgument("violation check applies to unfair and cf-baseline predictors only");
  }
  if (!std::holds_alternative<LinearAdditiveScm>(scm)) {
    throw InvalidArgument("violation check needs a linear-additive model");
  }
  ViolationReport rep;
  rep.samples = samples.size();
  for (const auto& u : samples) {
    const auto r = simulate_pair(scm, spec, u, a, a_check, cfg);
    const double dev = std::abs(r.gap_after - r.gap_before);
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
    rep.max_rel_deviation =
        std::max(rep.max_rel_deviation, dev / std::max(1.0, r.gap_before));
    if (r.gap_before > 0.0) rep.precondition_met = true;
  }
  rep.note = rep.precondition_met
                 ? "gaps preserved up to the reported deviation"
                 : "precondition unmet: factual and counterfactual outcomes coincide";
  return rep;
}

}  // namespace lcf
