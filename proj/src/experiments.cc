#include "lcf/experiments.h"

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "lcf/presets.h"

namespace lcf {
namespace {

constexpr std::uint64_t kStreamTrain = 11;
constexpr std::uint64_t kStreamEval = 12;
constexpr std::uint64_t kStreamSplit = 13;
constexpr std::uint64_t kStreamData = 14;
constexpr std::uint64_t kStreamEm = 15;
constexpr std::uint64_t kStreamDensity = 16;
constexpr std::uint64_t kStreamAudit = 17;
constexpr std::uint64_t kStreamLawMeans = 18;

const std::set<std::string>& known_experiments() {
  static const std::set<std::string> s{"table1", "table4", "table5", "table6",
                                       "law-semisynthetic", "sweep", "density", "audit"};
  return s;
}

std::string preset_for(const std::string& experiment) {
  if (experiment == "table5") return "scalar-e";
  if (experiment == "table6") return "multiplicative-f";
  if (experiment == "law-semisynthetic") return "law-semisynthetic";
  return "appendix-b";
}

double mean_of(const std::vector<double>& v) {
  KahanSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

// Sample standard deviation (0 for a single value).
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  KahanSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(v.size() - 1));
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig t;
  t.m = cfg.m;
  t.eta = cfg.eta;
  t.p1_mode = cfg.p1_mode;
  t.p1_value = cfg.p1_value;
  t.optimizer = cfg.optimizer;
  t.descent = cfg.descent;
  t.seed = derive_seed(seed, kStreamTrain);
  t.h_inputs = cfg.h_inputs;
  t.mcmc = cfg.mcmc;
  return t;
}

EvalOptions eval_options(const ExperimentConfig& cfg, std::uint64_t seed, double eta) {
  EvalOptions o;
  o.m = cfg.m;
  o.eta = eta;
  o.seed = derive_seed(seed, kStreamEval);
  o.mcmc = cfg.mcmc;
  o.keep_draws = cfg.write_draws;
  return o;
}

Dataset load_or_generate(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.data_path.empty()) {
    LoadReport rep;
    Dataset d = load_csv(cfg.data_path, parse_schema(cfg.data_schema), &rep);
    return d;
  }
  GenSpec g;
  g.preset = preset_for(cfg.experiment);
  if (cfg.scm) {
    g.preset = "custom";
    g.scm = cfg.scm;
  }
  g.n = cfg.n;
  g.seed = derive_seed(seed, kStreamData);
  return gen_synthetic(g);
}

MethodRun run_method(const std::string& method, const Dataset& train,
                     const Dataset& test, const StructuralModel& scm,
                     const ExperimentConfig& cfg, std::uint64_t seed) {
  const TrainConfig tc = train_config(cfg, seed);
  MethodRun run;
  if (method == "UF") {
    run.fit = fit_unfair(train, tc);
  } else if (method == "CF") {
    run.fit = fit_cf(train, scm, tc);
  } else if (method == "Ours") {
    run.fit = fit_lcf_quadratic(train, scm, tc);
  } else if (method == "Ours-PowerG") {
    run.fit = fit_power_g(train, scm, tc, 1.5);
  } else if (method == "Ours-Scalar") {
    run.fit = fit_scalar_quadratic(train, scm, tc);
  } else if (method == "Ours-Mult") {
    run.fit = fit_multiplicative_convex(train, scm, tc);
  } else {
    throw InvalidArgument("unknown method " + method);
  }
  run.fit.method = method;
  run.eval = evaluate_predictor(scm, run.fit.spec, test, eval_options(cfg, seed, cfg.eta),
                                method, run.fit.p1);
  return run;
}

std::vector<std::string> methods_for(const std::string& experiment) {
  if (experiment == "table4") return {"UF", "CF", "Ours-PowerG"};
  if (experiment == "table5") return {"UF", "CF", "Ours-Scalar"};
  if (experiment == "table6") return {"UF", "CF", "Ours-Mult"};
  return {"UF", "CF", "Ours"};
}

StructuralModel model_for(const ExperimentConfig& cfg, const Dataset& train,
                          std::uint64_t seed, SeedRun& run) {
  StructuralModel known = cfg.scm ? *cfg.scm : [&]() {
    GenSpec g;
    g.preset = preset_for(cfg.experiment);
    return gen_model(g);
  }();
  if (std::holds_alternative<LawSchoolScm>(known)) {
    if (cfg.scm_mode == "known") return known;
    LawFitConfig lf = cfg.law_fit;
    lf.seed = derive_seed(seed, kStreamEm);
    const auto rep = estimate_law_params(train, lf);
    run.notes.push_back("law parameters: " + rep.diagnostics);
    run.extras["em_rounds"] = static_cast<double>(rep.rounds);
    run.extras["em_converged"] = rep.converged ? 1.0 : 0.0;
    return rep.scm;
  }
  if (cfg.scm_mode == "known") return known;
  const auto* lin = std::get_if<LinearAdditiveScm>(&known);
  if (!lin) {
    throw InvalidArgument("estimated scm_mode is available for linear-additive and "
                          "law-school models only");
  }
  const auto est = estimate_linear_scm(train, *lin);
  for (const auto& w : est.warnings) run.notes.push_back("estimate: " + w);
  return est.scm;
}

void run_law_extras(const ExperimentConfig& cfg, const Dataset& test,
                    const StructuralModel& scm, std::uint64_t seed, SeedRun& run) {
  const auto& law = std::get<LawSchoolScm>(scm);
  GenSpec g;
  g.preset = "law-semisynthetic";
  const auto truth_model = cfg.scm ? *cfg.scm : gen_model(g);
  if (const auto* t = std::get_if<LawSchoolScm>(&truth_model)) {
    run.extras["wF_K_true"] = t->wF_K;
  }
  run.extras["wF_K_estimated"] = law.wF_K;
  if (!test.truth) return;
  McmcConfig mc = cfg.mcmc;
  const auto means = law_posterior_means(law, test, mc, derive_seed(seed, kStreamLawMeans));
  std::vector<double> truth;
  for (const auto& u : *test.truth) truth.push_back(u.ux[0]);
  run.extras["k_correlation"] = correlation(means, truth);
}

void run_sweep(const ExperimentConfig& cfg, const Dataset& train, const Dataset& test,
               std::uint64_t seed, SeedRun& run) {
  for (double eta : cfg.sweep_etas) {
    const double T = compute_T(run.scm, eta);
    for (std::size_t k = 0; k < cfg.sweep_points; ++k) {
      // T/512 · 2^k, ending at T/2 for the default 9 points.
      const double p1 = T / 512.0 * std::pow(2.0, static_cast<double>(k));
      if (!(p1 < T)) throw InvalidArgument("sweep grid leaves (0, T)");
      ExperimentConfig c = cfg;
      c.eta = eta;
      c.p1_mode = P1Mode::kRelaxed;
      c.p1_value = p1;
      TrainConfig tc = train_config(c, seed);
      const auto fit = fit_lcf_quadratic(train, run.scm, tc);
      EvalOptions eo = eval_options(c, seed, eta);
      eo.keep_draws = false;
      const auto ev = evaluate_predictor(run.scm, fit.spec, test, eo, "Ours", p1);
      run.sweep.push_back(SweepRow{seed, eta, T, p1, ev.report.mse, ev.report.afce,
                                   ev.report.uir_percent});
    }
  }
}

void run_density(const ExperimentConfig& cfg, const Dataset& test, std::uint64_t seed,
                 SeedRun& run) {
  if (cfg.density_record >= test.size()) {
    throw InvalidArgument("density_record is outside the test split");
  }
  const Record& rec = test.records[cfg.density_record];
  for (const auto& mr : run.methods) {
    const auto bins = density_export(run.scm, mr.fit.spec, rec, cfg.density_m,
                                     cfg.density_bins, ResponseConfig{cfg.eta},
                                     derive_seed(seed, kStreamDensity), cfg.mcmc);
    for (const auto& b : bins) run.density.push_back(DensityRow{mr.fit.method, b});
  }
}

std::string run_audit(const ExperimentConfig& cfg, const Dataset& test, std::uint64_t seed,
                      SeedRun& run) {
  std::ostringstream os;
  os << "seed " << seed << "\n";
  std::vector<ExogenousSample> samples;
  std::vector<Attribute> attrs;
  const auto draws = draw_posteriors(run.scm, test, std::min<std::size_t>(cfg.m, 10),
                                     derive_seed(seed, kStreamAudit), cfg.mcmc);
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (const auto& u : draws[i]) {
      samples.push_back(u);
      attrs.push_back(test.records[i].a);
    }
  }
  for (const auto& mr : run.methods) {
    os << mr.fit.method << ": ";
    if (std::holds_alternative<Unfair>(mr.fit.spec) ||
        std::holds_alternative<CfBaseline>(mr.fit.spec)) {
      if (!std::holds_alternative<LinearAdditiveScm>(run.scm)) {
        os << "violation check skipped (model is not linear-additive)\n";
        continue;
      }
      double worst_abs = 0.0, worst_rel = 0.0;
      bool pre = false;
      for (std::size_t s = 0; s < samples.size(); ++s) {
        const Attribute a = attrs[s];
        const Attribute ac = alternate_worlds(run.scm, a).front().attribute;
        const auto rep = lcf_violation_check(run.scm, mr.fit.spec, {samples[s]}, a, ac,
                                             ResponseConfig{cfg.eta});
        worst_abs = std::max(worst_abs, rep.max_abs_deviation);
        worst_rel = std::max(worst_rel, rep.max_rel_deviation);
        pre = pre || rep.precondition_met;
      }
      os << "max |gap_after - gap_before| = " << format_double(worst_abs)
         << ", relative " << format_double(worst_rel)
         << (pre ? "" : " (precondition unmet)") << "\n";
      run.extras["audit_max_rel_" + mr.fit.method] = worst_rel;
    } else {
      std::optional<CounterfactualRange> range;
      if (std::holds_alternative<PowerG>(mr.fit.spec)) {
        range = CounterfactualRange{1e-9, 1e9};
      }
      const auto rep = check_relaxed_conditions(mr.fit.spec, run.scm, cfg.eta, range);
      os << "conditions convex=" << rep.convex_ok << " additive=" << rep.additive_ok
         << " K=" << format_double(rep.lipschitz_K)
         << " bound=" << format_double(rep.lipschitz_bound)
         << " satisfied=" << rep.satisfied << "\n";
    }
  }
  return os.str();
}

void write_models(const SeedRun& run, const std::string& path) {
  Json j;
  j["scm"] = scm_to_json(run.scm);
  Json methods = Json::array();
  for (const auto& mr : run.methods) {
    methods.push_back(Json{{"method", mr.fit.method},
                           {"predictor", predictor_to_json(mr.fit.spec)},
                           {"train_loss", mr.fit.train_loss},
                           {"condition", mr.fit.condition},
                           {"T", mr.fit.T},
                           {"solver", mr.fit.solver}});
  }
  j["methods"] = methods;
  write_text(path, j.dump(2) + "\n");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!known_experiments().count(experiment)) {
    throw ConfigError("experiment: unknown experiment '" + experiment + "'");
  }
  if (seeds.empty()) throw ConfigError("seeds: need at least one seed");
  if (n < 10) throw ConfigError("n: need at least 10 records");
  if (m < 1) throw ConfigError("m: must be >= 1");
  if (!(eta > 0.0)) throw ConfigError("eta: must be > 0");
  if (scm_mode != "known" && scm_mode != "estimated") {
    throw ConfigError("scm_mode: expected 'known' or 'estimated'");
  }
  if (experiment == "sweep") {
    if (sweep_etas.empty()) throw ConfigError("sweep_etas: empty");
    if (sweep_points < 1 || sweep_points > 9) {
      throw ConfigError("sweep_points: must be in [1, 9] so that p1 <= T/2");
    }
  }
  if (p1_mode == P1Mode::kRelaxed && !(p1_value > 0.0)) {
    throw ConfigError("p1: relaxed mode needs a positive value");
  }
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "law-semisynthetic") {
    c.n = 5000;
    c.m = 500;
    c.eta = 10.0;
    c.scm_mode = "estimated";
    c.write_draws = false;
    c.seeds = {0};
  }
  if (experiment == "sweep" || experiment == "density" || experiment == "audit") {
    c.write_draws = false;
  }
  if (experiment == "density") c.seeds = {0};
  return c;
}

ExperimentConfig experiment_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  const std::string exp = get_string_or(j, "experiment", "table1", "");
  ExperimentConfig c = default_config(exp);
  static const std::set<std::string> keys{
      "experiment", "seeds",         "n",           "m",           "eta",
      "p1",         "optimizer",     "lr",          "epochs",      "adam",
      "h_inputs",   "scm_mode",      "scm",         "data_path",   "data_schema",
      "sweep_etas", "sweep_points",  "density_bins", "density_m",  "density_record",
      "mcmc",       "law_fit",       "write_draws", "parallel_seeds"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.count(it.key())) throw ConfigError(it.key() + ": unknown key");
  }
  auto count = [&](const std::string& key, std::size_t fallback) {
    const double v = get_number_or(j, key, static_cast<double>(fallback), "");
    if (v < 0 || std::floor(v) != v) throw ConfigError(key + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  };
  if (j.contains("seeds")) {
    const Json& s = j["seeds"];
    c.seeds.clear();
    if (s.is_number_unsigned()) {
      for (std::uint64_t i = 0; i < s.get<std::uint64_t>(); ++i) c.seeds.push_back(i);
    } else if (s.is_array()) {
      for (const auto& v : s) {
        if (!v.is_number_unsigned()) throw ConfigError("seeds: expected unsigned integers");
        c.seeds.push_back(v.get<std::uint64_t>());
      }
    } else {
      throw ConfigError("seeds: expected a count or a list");
    }
  }
  c.n = count("n", c.n);
  c.m = count("m", c.m);
  c.eta = get_number_or(j, "eta", c.eta, "");
  if (j.contains("p1")) {
    const std::string p = get_string_or(j, "p1", "perfect", "");
    if (p == "perfect") {
      c.p1_mode = P1Mode::kPerfect;
    } else if (p == "train") {
      c.p1_mode = P1Mode::kTrainable;
    } else if (p.rfind("relaxed:", 0) == 0) {
      c.p1_mode = P1Mode::kRelaxed;
      try {
        c.p1_value = std::stod(p.substr(8));
      } catch (const std::logic_error&) {
        throw ConfigError("p1: cannot parse '" + p + "'");
      }
    } else {
      throw ConfigError("p1: expected perfect, train or relaxed:<value>");
    }
  }
  const std::string opt = get_string_or(j, "optimizer", "normal-equations", "");
  if (opt == "normal-equations") {
    c.optimizer = Optimizer::kNormalEquations;
  } else if (opt == "gradient-descent") {
    c.optimizer = Optimizer::kGradientDescent;
  } else {
    throw ConfigError("optimizer: expected normal-equations or gradient-descent");
  }
  c.descent.lr = get_number_or(j, "lr", c.descent.lr, "");
  c.descent.epochs = count("epochs", c.descent.epochs);
  if (j.contains("adam")) {
    if (!j["adam"].is_boolean()) throw ConfigError("adam: expected a boolean");
    c.descent.adam = j["adam"].get<bool>();
  }
  try {
    c.h_inputs = parse_h_inputs(get_string_or(j, "h_inputs", to_string(c.h_inputs), ""));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("h_inputs: ") + e.what());
  }
  c.scm_mode = get_string_or(j, "scm_mode", c.scm_mode, "");
  if (j.contains("scm")) c.scm = scm_from_json(j["scm"], "scm");
  c.data_path = get_string_or(j, "data_path", c.data_path, "");
  c.data_schema = get_string_or(j, "data_schema", c.data_schema, "");
  if (j.contains("sweep_etas")) {
    const Vector v = get_vector(j, "sweep_etas", "");
    c.sweep_etas.assign(v.data(), v.data() + v.size());
  }
  c.sweep_points = count("sweep_points", c.sweep_points);
  c.density_bins = count("density_bins", c.density_bins);
  c.density_m = count("density_m", c.density_m);
  c.density_record = count("density_record", c.density_record);
  if (j.contains("mcmc")) {
    const Json& mc = j["mcmc"];
    c.mcmc.burn_in = static_cast<std::size_t>(get_number_or(mc, "burn_in", c.mcmc.burn_in, "mcmc"));
    c.mcmc.thinning =
        static_cast<std::size_t>(get_number_or(mc, "thinning", c.mcmc.thinning, "mcmc"));
    c.mcmc.proposal_scale = get_number_or(mc, "proposal_scale", c.mcmc.proposal_scale, "mcmc");
  }
  if (j.contains("law_fit")) {
    const Json& lf = j["law_fit"];
    c.law_fit.max_rounds =
        static_cast<std::size_t>(get_number_or(lf, "max_rounds", c.law_fit.max_rounds, "law_fit"));
    c.law_fit.tolerance = get_number_or(lf, "tolerance", c.law_fit.tolerance, "law_fit");
    c.law_fit.draws =
        static_cast<std::size_t>(get_number_or(lf, "draws", c.law_fit.draws, "law_fit"));
  }
  if (j.contains("write_draws")) {
    if (!j["write_draws"].is_boolean()) throw ConfigError("write_draws: expected a boolean");
    c.write_draws = j["write_draws"].get<bool>();
  }
  if (j.contains("parallel_seeds")) {
    if (!j["parallel_seeds"].is_boolean()) throw ConfigError("parallel_seeds: expected a boolean");
    c.parallel_seeds = j["parallel_seeds"].get<bool>();
  }
  c.validate();
  return c;
}

Json experiment_to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["seeds"] = c.seeds;
  j["n"] = c.n;
  j["m"] = c.m;
  j["eta"] = c.eta;
  j["p1"] = c.p1_mode == P1Mode::kRelaxed ? "relaxed:" + format_double(c.p1_value)
                                          : to_string(c.p1_mode);
  j["optimizer"] = to_string(c.optimizer);
  j["lr"] = c.descent.lr;
  j["epochs"] = c.descent.epochs;
  j["adam"] = c.descent.adam;
  j["h_inputs"] = to_string(c.h_inputs);
  j["scm_mode"] = c.scm_mode;
  if (c.scm) j["scm"] = scm_to_json(*c.scm);
  if (!c.data_path.empty()) {
    j["data_path"] = c.data_path;
    j["data_schema"] = c.data_schema;
  }
  j["sweep_etas"] = c.sweep_etas;
  j["sweep_points"] = c.sweep_points;
  j["density_bins"] = c.density_bins;
  j["density_m"] = c.density_m;
  j["density_record"] = c.density_record;
  j["mcmc"] = Json{{"burn_in", c.mcmc.burn_in},
                   {"thinning", c.mcmc.thinning},
                   {"proposal_scale", c.mcmc.proposal_scale}};
  j["law_fit"] = Json{{"max_rounds", c.law_fit.max_rounds},
                      {"tolerance", c.law_fit.tolerance},
                      {"draws", c.law_fit.draws}};
  j["write_draws"] = c.write_draws;
  return j;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidArgument("correlation needs two series of equal length >= 2");
  }
  const double ma = mean_of(a), mb = mean_of(b);
  KahanSum sab, saa, sbb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab.add((a[i] - ma) * (b[i] - mb));
    saa.add((a[i] - ma) * (a[i] - ma));
    sbb.add((b[i] - mb) * (b[i] - mb));
  }
  return sab.value() / std::sqrt(saa.value() * sbb.value());
}

Evaluation evaluate_predictor(const StructuralModel& scm, const PredictorSpec& spec,
                              const Dataset& test, const EvalOptions& opt,
                              const std::string& method, double p1) {
  if (test.records.empty()) throw InvalidArgument("evaluation set is empty");
  const ResponseConfig rc{opt.eta};
  rc.validate();
  struct PerRecord {
    std::vector<double> sq_err;
    std::vector<SimulationResult> sims;
    std::vector<std::size_t> draw_ids;
  };
  std::vector<PerRecord> slots(test.size());
  const auto* linear = std::get_if<LinearAdditiveScm>(&scm);
  if (opt.mask && !linear) throw InvalidArgument("path masks need a linear-additive model");
  parallel_for(test.size(), [&](std::size_t i) {
    const Record& rec = test.records[i];
    const auto draws =
        abduct(scm, rec.x, rec.a, opt.mcmc).draw(opt.m, derive_seed(opt.seed, kStreamEval, i));
    auto& slot = slots[i];
    const World own = World::uniform(rec.a);
    std::vector<World> partners;
    std::vector<Attribute> alts;
    for (Attribute a : attribute_domain(scm)) {
      if (a == rec.a) continue;
      alts.push_back(a);
      partners.push_back(opt.mask ? path_dependent_world(*linear, rec.a, a, *opt.mask)
                                  : World::uniform(a));
    }
    for (std::size_t j = 0; j < draws.size(); ++j) {
      const auto& u = draws[j];
      const double y_hat = predict(spec, world_input(scm, u, own, partners));
      const double e = rec.y - y_hat;
      slot.sq_err.push_back(e * e);
      for (Attribute ac : alts) {
        slot.sims.push_back(opt.mask ? simulate_path_dependent(scm, spec, u, rec.a, ac,
                                                               *opt.mask, rc)
                                     : simulate_pair(scm, spec, u, rec.a, ac, rc));
        slot.draw_ids.push_back(j);
      }
    }
  });

  Evaluation ev;
  MseAccumulator mse_acc;
  std::vector<SimulationResult> all;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (double e : slots[i].sq_err) mse_acc.add(0.0, std::sqrt(e));
    for (std::size_t k = 0; k < slots[i].sims.size(); ++k) {
      const auto& r = slots[i].sims[k];
      all.push_back(r);
      if (r.gap_before > 0.0) ++ev.positive_gaps;
      if (r.gap_after < r.gap_before) ++ev.strict_decreases;
      ev.max_gap_after = std::max(ev.max_gap_after, r.gap_after);
      if (opt.keep_draws) ev.draws.push_back(DrawResult{i, slots[i].draw_ids[k], r});
    }
  }
  ev.samples = all.size();
  ev.report.method = method;
  ev.report.mse = mse_acc.value();
  ev.report.afce = afce(all);
  const auto u = uir(all);
  ev.report.uir_defined = u.defined;
  ev.report.uir_percent = u.percent;
  ev.report.n = test.size();
  ev.report.m = opt.m;
  ev.report.eta = opt.eta;
  ev.report.p1 = p1;
  return ev;
}

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedRun run;
  run.seed = seed;
  const Dataset data = load_or_generate(cfg, seed);
  run.split = make_split(data.size(), derive_seed(seed, kStreamSplit));
  const Dataset train = data.subset(run.split.train);
  const Dataset test = data.subset(run.split.test);
  run.scm = model_for(cfg, train, seed, run);

  if (cfg.experiment == "sweep") {
    run_sweep(cfg, train, test, seed, run);
    return run;
  }
  for (const auto& method : methods_for(cfg.experiment)) {
    run.methods.push_back(run_method(method, train, test, run.scm, cfg, seed));
    run.methods.back().eval.report.seed = seed;
  }
  if (cfg.experiment == "law-semisynthetic") run_law_extras(cfg, test, run.scm, seed, run);
  if (cfg.experiment == "density") run_density(cfg, test, seed, run);
  return run;
}

std::vector<AggregateRow> aggregate(const std::vector<SeedRun>& runs) {
  std::vector<AggregateRow> out;
  if (runs.empty()) return out;
  for (std::size_t k = 0; k < runs.front().methods.size(); ++k) {
    std::vector<double> mse, afce_v, uir_v;
    for (const auto& r : runs) {
      const auto& rep = r.methods.at(k).eval.report;
      mse.push_back(rep.mse);
      afce_v.push_back(rep.afce);
      uir_v.push_back(rep.uir_percent);
    }
    AggregateRow row;
    row.method = runs.front().methods[k].fit.method;
    row.mse_mean = mean_of(mse);
    row.mse_std = std_of(mse);
    row.afce_mean = mean_of(afce_v);
    row.afce_std = std_of(afce_v);
    row.uir_mean = mean_of(uir_v);
    row.uir_std = std_of(uir_v);
    out.push_back(row);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  res.runs.resize(cfg.seeds.size());
  if (cfg.parallel_seeds) {
    parallel_for(cfg.seeds.size(), [&](std::size_t i) { res.runs[i] = run_seed(cfg, cfg.seeds[i]); });
  } else {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) res.runs[i] = run_seed(cfg, cfg.seeds[i]);
  }
  res.aggregate = aggregate(res.runs);
  if (cfg.experiment == "audit") {
    for (auto& r : res.runs) {
      const Dataset data = load_or_generate(cfg, r.seed);
      res.audit += run_audit(cfg, data.subset(r.split.test), r.seed, r);
    }
  }
  return res;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << "method,mse_mean,mse_std,afce_mean,afce_std,uir_mean,uir_std\n";
  for (const auto& r : rows) {
    os << r.method << ',' << format_double(r.mse_mean) << ',' << format_double(r.mse_std)
       << ',' << format_double(r.afce_mean) << ',' << format_double(r.afce_std) << ','
       << format_double(r.uir_mean) << ',' << format_double(r.uir_std) << '\n';
  }
  return os.str();
}

std::string sweep_csv(const std::vector<SeedRun>& runs) {
  std::ostringstream os;
  os << "seed,eta,T,p1,p1_over_T,mse,afce,uir\n";
  for (const auto& r : runs) {
    for (const auto& s : r.sweep) {
      os << s.seed << ',' << format_double(s.eta) << ',' << format_double(s.T) << ','
         << format_double(s.p1) << ',' << format_double(s.p1 / s.T) << ','
         << format_double(s.mse) << ',' << format_double(s.afce) << ','
         << format_double(s.uir) << '\n';
    }
  }
  return os.str();
}

std::string density_csv(const std::vector<DensityRow>& rows) {
  std::ostringstream os;
  os << "method,bin_lo,bin_hi,factual_count,counterfactual_count\n";
  for (const auto& r : rows) {
    os << r.method << ',' << format_double(r.bin.lo) << ',' << format_double(r.bin.hi) << ','
       << r.bin.factual_count << ',' << r.bin.counterfactual_count << '\n';
  }
  return os.str();
}

void write_artifacts(const ExperimentResult& res, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  const Json cfg_json = experiment_to_json(res.config);
  const std::string cfg_text = cfg_json.dump(2) + "\n";
  write_text(out_dir + "/config.json", cfg_text);
  std::ostringstream hash;
  hash << std::hex << fnv1a(cfg_text);

  std::ostringstream summary;
  summary << "experiment: " << res.config.experiment << "\n"
          << "config_hash: " << hash.str() << "\n"
          << "scm_mode: " << res.config.scm_mode << "\n"
          << "seeds:";
  for (auto s : res.config.seeds) summary << ' ' << s;
  summary << "\n";

  for (const auto& run : res.runs) {
    const std::string dir = out_dir + "/seed_" + std::to_string(run.seed);
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
    std::vector<EvalReport> reports;
    for (const auto& mr : run.methods) reports.push_back(mr.eval.report);
    if (!reports.empty()) save_reports(reports, dir + "/reports.csv");
    Json split{{"train", run.split.train},
               {"validation", run.split.validation},
               {"test", run.split.test}};
    write_text(dir + "/split.json", split.dump() + "\n");
    write_models(run, dir + "/models.json");
    for (const auto& mr : run.methods) {
      if (!mr.eval.draws.empty()) {
        std::ostringstream os;
        write_draw_stream(os, mr.eval.draws);
        write_text(dir + "/draws_" + mr.fit.method + ".csv", os.str());
      }
    }
    std::ostringstream manifest;
    manifest << "seed: " << run.seed << "\n"
             << "config_hash: " << hash.str() << "\n"
             << "family: " << family_name(run.scm) << "\n"
             << "train: " << run.split.train.size() << "\n"
             << "validation: " << run.split.validation.size() << "\n"
             << "test: " << run.split.test.size() << "\n";
    for (const auto& mr : run.methods) {
      manifest << "[" << mr.fit.method << "]\n"
               << "solver: " << mr.fit.solver << "\n"
               << "train_loss: " << format_double(mr.fit.train_loss) << "\n"
               << "strict_decreases: " << mr.eval.strict_decreases << "/" << mr.eval.samples
               << "\n"
               << mr.eval.report.to_text();
    }
    for (const auto& [k, v] : run.extras) manifest << k << ": " << format_double(v) << "\n";
    for (const auto& n : run.notes) manifest << "note: " << n << "\n";
    write_text(dir + "/manifest.txt", manifest.str());
    summary << "seed " << run.seed << ":";
    for (const auto& [k, v] : run.extras) summary << ' ' << k << '=' << format_double(v);
    summary << "\n";
  }
  if (!res.aggregate.empty()) write_text(out_dir + "/aggregate.csv", aggregate_csv(res.aggregate));
  if (res.config.experiment == "sweep") write_text(out_dir + "/sweep.csv", sweep_csv(res.runs));
  if (res.config.experiment == "density") {
    std::vector<DensityRow> rows;
    for (const auto& r : res.runs) rows.insert(rows.end(), r.density.begin(), r.density.end());
    write_text(out_dir + "/density.csv", density_csv(rows));
  }
  if (res.config.experiment == "audit") write_text(out_dir + "/audit.txt", res.audit);
  write_text(out_dir + "/summary.txt", summary.str());
}

}  // namespace lcf
