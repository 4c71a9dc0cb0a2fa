// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit code
// is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "../support.h"
#include "lcf/data.h"
#include "lcf/experiments.h"
#include "lcf/presets.h"
#include "lcf/response.h"

namespace {

using namespace lcf;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const AggregateRow& row(const ExperimentResult& r, const std::string& method) {
  for (const auto& a : r.aggregate) {
    if (a.method == method) return a;
  }
  throw std::runtime_error("no aggregate row for " + method);
}

double max_over_seeds(const ExperimentResult& r, const std::string& method,
                      const std::function<double(const MethodRun&)>& f) {
  double m = -INFINITY;
  for (const auto& run : r.runs) {
    for (const auto& mr : run.methods) {
      if (mr.fit.method == method) m = std::max(m, f(mr));
    }
  }
  return m;
}

LcfQuadratic random_lcf(Rng& rng, const LinearAdditiveScm& m, double p1) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  LcfQuadratic q;
  q.p1 = p1;
  q.p2 = c(rng);
  q.p3 = c(rng);
  q.theta = Vector(m.d() + 1);
  for (Eigen::Index i = 0; i < q.theta.size(); ++i) q.theta[i] = c(rng);
  return q;
}

// 1
Verdict table1() {
  Verdict o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_experiment(default_config("table1"));
  const double secs = seconds_since(t0);
  const auto& uf = row(res, "UF");
  const auto& cf = row(res, "CF");
  const auto& ours = row(res, "Ours");
  const double ours_afce = max_over_seeds(res, "Ours", [](auto& m) { return m.eval.report.afce; });
  const double ours_uir_dev = max_over_seeds(
      res, "Ours", [](auto& m) { return std::abs(m.eval.report.uir_percent - 100.0); });
  double base_uir_dev = 0.0;
  for (const char* m : {"UF", "CF"}) {
    base_uir_dev = std::max(base_uir_dev, max_over_seeds(res, m, [](auto& r) {
                              return std::abs(r.eval.report.uir_percent);
                            }));
  }
  o.require(res.runs.size() == 5, "5 seeds");
  o.require(ours_afce <= 1e-6, "Ours AFCE <= 1e-6");
  o.require(ours_uir_dev <= 1e-4, "Ours UIR = 100%");
  o.require(base_uir_dev <= 1e-9, "UF/CF UIR = 0%");
  o.require(std::abs(uf.afce_mean - 1.296) <= 0.02, "UF AFCE 1.296");
  o.require(std::abs(cf.afce_mean - 1.296) <= 0.02, "CF AFCE 1.296");
  o.require(std::abs(uf.mse_mean - 0.036) <= 0.01, "UF MSE 0.036");
  o.require(std::abs(cf.mse_mean - 0.520) <= 0.10, "CF MSE 0.520");
  o.require(std::abs(ours.mse_mean - 0.064) <= 0.015, "Ours MSE 0.064");
  o.require(secs <= 120.0, "runtime <= 2 min");
  o.detail << "MSE UF/CF/Ours " << fmt(uf.mse_mean) << "/" << fmt(cf.mse_mean) << "/"
           << fmt(ours.mse_mean) << ", AFCE UF/CF " << fmt(uf.afce_mean) << "/"
           << fmt(cf.afce_mean) << ", Ours max AFCE " << fmt(ours_afce) << ", UIR dev "
           << fmt(ours_uir_dev) << ", " << fmt(secs) << " s";
  return o;
}

// 2
Verdict gap_law() {
  Verdict o;
  Rng rng(20261019);
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<double> eta_d(0.5, 20.0), frac(0.0, 1.0);
  double worst = 0.0, worst_half = 0.0;
  int samples = 0, strict_fail = 0;
  for (int k = 0; k < 1000; ++k) {
    const int d = dim(rng);
    const auto lin = testing::random_linear(rng, d);
    const StructuralModel scm = lin;
    const double eta = eta_d(rng);
    const double T = compute_T(scm, eta);
    // p1 ∈ (0, T]
    const double p1 = T * (1.0 - frac(rng));
    const auto u = testing::random_sample(rng, d);
    const ResponseConfig rc{eta};
    const auto r = simulate_pair(scm, random_lcf(rng, lin, p1), u, 0.0, 1.0, rc);
    const double expect = closed_form_gap(p1, T, r.y, r.y_check);
    worst = std::max(worst, std::abs(r.gap_after - expect) / r.gap_before);
    if (p1 < T && !(r.gap_after < r.gap_before)) ++strict_fail;
    const auto h = simulate_pair(scm, random_lcf(rng, lin, T / 2.0), u, 0.0, 1.0, rc);
    worst_half = std::max(worst_half, h.gap_after / h.gap_before);
    samples += 2;
  }
  o.require(worst <= 1e-9, "gap_after = closed form");
  o.require(worst_half <= 1e-9, "p1 = T/2 closes the gap");
  o.require(strict_fail == 0, "strict decrease for p1 < T");
  o.detail << samples << " samples, max rel deviation " << fmt(worst) << ", max rel gap at T/2 "
           << fmt(worst_half);
  return o;
}

// 3, 4
Verdict relaxed_suite(const std::string& experiment, const std::string& method,
                      std::optional<std::pair<double, double>> afce_band,
                      std::pair<double, double> uir_band) {
  Verdict o;
  const auto res = run_experiment(default_config(experiment));
  std::size_t dec = 0, pos = 0, total = 0;
  for (const auto& run : res.runs) {
    for (const auto& mr : run.methods) {
      if (mr.fit.method != method) continue;
      dec += mr.eval.strict_decreases;
      pos += mr.eval.positive_gaps;
      total += mr.eval.samples;
    }
  }
  const auto& r = row(res, method);
  o.require(pos == total && dec == total, "strict decrease on every draw");
  if (afce_band) {
    o.require(std::abs(r.afce_mean - afce_band->first) <= afce_band->second, "AFCE band");
  }
  o.require(std::abs(r.uir_mean - uir_band.first) <= uir_band.second, "UIR band");
  o.detail << method << " decreased " << dec << "/" << total << ", AFCE " << fmt(r.afce_mean)
           << ", UIR " << fmt(r.uir_mean) << "%";
  return o;
}

// 5
Verdict multiplicative() {
  Verdict o;
  const auto res = run_experiment(default_config("table6"));
  const double afce = max_over_seeds(res, "Ours-Mult", [](auto& m) { return m.eval.report.afce; });
  const double uir_dev = max_over_seeds(
      res, "Ours-Mult", [](auto& m) { return std::abs(m.eval.report.uir_percent - 100.0); });
  o.require(afce <= 1e-6, "AFCE <= 1e-6");
  o.require(uir_dev <= 1e-4, "UIR = 100%");
  o.detail << "max AFCE " << fmt(afce) << ", max |UIR - 100| " << fmt(uir_dev);
  return o;
}

// 6
Verdict cf_mechanism() {
  Verdict o;
  Rng rng(4303);
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<double> c(-1.0, 1.0), eta_d(0.5, 20.0);
  double worst = 0.0;
  int n = 0;
  for (int k = 0; k < 1000; ++k) {
    const int d = dim(rng);
    const auto lin = testing::random_linear(rng, d);
    const StructuralModel scm = lin;
    const auto u = testing::random_sample(rng, d);
    const ResponseConfig rc{eta_d(rng)};
    Unfair uf{Vector(d), c(rng)};
    CfBaseline cf{Vector(d + 1), c(rng)};
    for (int i = 0; i < d; ++i) uf.theta[i] = c(rng);
    for (int i = 0; i <= d; ++i) cf.phi[i] = c(rng);
    for (const PredictorSpec& s : {PredictorSpec{uf}, PredictorSpec{cf}}) {
      const auto r = simulate_pair(scm, s, u, 0.0, 1.0, rc);
      worst = std::max(worst, std::abs(r.gap_after - r.gap_before) / r.gap_before);
      ++n;
    }
  }
  o.require(worst <= 1e-9, "gaps preserved");
  o.detail << n << " samples, max rel deviation " << fmt(worst);
  return o;
}

// 7
Verdict path_dependent() {
  Verdict o;
  Rng rng(62);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> eta_d(0.5, 20.0);
  double worst = 0.0;
  int n = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto lin = testing::random_linear(rng, 10);
    const StructuralModel scm = lin;
    PathMask mask = PathMask::all(10, false);
    for (std::size_t i = 0; i < 10; ++i) mask.unfair[i] = coin(rng);
    const double eta = eta_d(rng);
    const auto u = testing::random_sample(rng, 10);
    const auto q = random_lcf(rng, lin, compute_T(scm, eta) / 2.0);
    const auto r = simulate_path_dependent(scm, q, u, 0.0, 1.0, mask, {eta});
    worst = std::max(worst, r.gap_after);
    ++n;
  }
  // Trained path-dependent models on the synthetic preset.
  const StructuralModel scm = presets::appendix_b();
  GenSpec g;
  g.n = 300;
  const auto data = gen_synthetic(g);
  TrainConfig tc;
  tc.m = 20;
  for (int k = 0; k < 5; ++k) {
    PathMask mask = PathMask::all(10, false);
    for (std::size_t i = 0; i < 10; ++i) mask.unfair[i] = coin(rng);
    const auto fit = fit_path_dependent(data, scm, mask, tc);
    EvalOptions eo;
    eo.m = 10;
    eo.mask = mask;
    const auto ev = evaluate_predictor(scm, fit.spec, data, eo, "Ours-PD", fit.p1);
    worst = std::max(worst, ev.max_gap_after);
    n += static_cast<int>(ev.samples);
  }
  o.require(worst <= 1e-9, "path-dependent gap closed");
  o.detail << n << " samples, max gap_after " << fmt(worst);
  return o;
}

// 8
Verdict gradient_oracle() {
  Verdict o;
  Rng rng(8);
  std::uniform_real_distribution<double> c(-1.0, 1.0), u01(0.05, 0.95);
  std::map<std::string, double> worst;
  auto check = [&](const std::string& name, const PredictorSpec& spec, const StructuralModel& scm,
                   const ExogenousSample& u, Attribute a, Attribute ac) {
    const Vector g = grad_wrt_u(spec, scm, u, a, ac);
    const Vector f = finite_diff_grad(spec, scm, u, a, ac);
    const double rel = (g - f).norm() / std::max(f.norm(), 1e-8);
    worst[name] = std::max(worst[name], rel);
  };
  for (int k = 0; k < 100; ++k) {
    // Linear-additive model with positive weights so that PowerG sees y̌ > 0.
    const int d = 1 + k % 10;
    auto lin = testing::random_linear(rng, d);
    lin.w = lin.w.cwiseAbs();
    lin.beta = lin.beta.cwiseAbs();
    const StructuralModel scm = lin;
    const auto u = testing::random_sample(rng, d);
    Unfair uf{Vector(d), c(rng)};
    for (int i = 0; i < d; ++i) uf.theta[i] = c(rng);
    CfBaseline cf{Vector(d + 1), c(rng)};
    for (int i = 0; i <= d; ++i) cf.phi[i] = c(rng);
    const auto q = random_lcf(rng, lin, compute_T(scm, 10.0) * u01(rng));
    PowerG pg{u01(rng), c(rng), c(rng), 1.5, q.theta};
    check("Unfair", uf, scm, u, 0.0, 1.0);
    check("CfBaseline", cf, scm, u, 0.0, 1.0);
    check("LcfQuadratic", q, scm, u, 1.0, 0.0);
    check("PowerG", pg, scm, u, 0.0, 1.0);

    const StructuralModel sc = presets::scalar_e();
    ExogenousSample su;
    su.ux = Vector::Constant(1, u01(rng));
    check("ScalarQuadratic", ScalarQuadratic{u01(rng), c(rng), u01(rng)}, sc, su, k % 2, 1 - k % 2);

    const StructuralModel mult = presets::multiplicative_f();
    const auto mu = testing::random_sample(rng, 10);
    check("MultiplicativeConvex", MultiplicativeConvex{u01(rng), c(rng), c(rng)}, mult, mu, 1.0,
          2.0);

    const StructuralModel law = presets::law_semisynthetic();
    std::normal_distribution<double> z(0.0, 1.0);
    ExogenousSample lu;
    lu.ux = Vector::Constant(1, z(rng));
    lu.noise = Vector(3);
    lu.noise << 0.4 * z(rng), u01(rng), z(rng);
    lu.context = Vector::Constant(1, k % 2);
    LcfQuadratic lq{u01(rng), c(rng), c(rng), Vector::Constant(1, c(rng))};
    check("LcfQuadratic-law", lq, law, lu, 0.0, 1.0);
  }
  for (const auto& [name, w] : worst) {
    o.require(w <= 1e-5, name);
    o.detail << name << " " << fmt(w) << "; ";
  }
  return o;
}

// 9
Verdict sweep_shape() {
  Verdict o;
  const auto res = run_experiment(default_config("sweep"));
  double worst = 0.0;
  int non_decreasing = 0, rows = 0;
  for (const auto& run : res.runs) {
    const auto& s = run.sweep;
    for (std::size_t k = 0; k < s.size(); ++k) {
      ++rows;
      const std::size_t base = k - k % 9;
      const double expect =
          (1 - 2 * s[k].p1 / s[k].T) * s[base].afce / (1 - 2 * s[base].p1 / s[base].T);
      worst = std::max(worst, std::abs(s[k].afce - expect) / s[base].afce);
      if (k % 9 && !(s[k].afce < s[k - 1].afce)) ++non_decreasing;
    }
  }
  o.require(rows == static_cast<int>(res.runs.size()) * 18, "9 points x 2 etas per seed");
  o.require(non_decreasing == 0, "AFCE strictly decreasing in p1");
  o.require(worst <= 1e-6, "AFCE linear in (1 - 2 p1/T)");
  o.detail << rows << " rows, max rel deviation " << fmt(worst);
  return o;
}

// 10
Verdict law_pipeline() {
  Verdict o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_experiment(default_config("law-semisynthetic"));
  const double secs = seconds_since(t0);
  const auto& run = res.runs.at(0);
  const double corr = run.extras.at("k_correlation");
  const double est = run.extras.at("wF_K_estimated");
  const double truth = run.extras.at("wF_K_true");
  const double afce = row(res, "Ours").afce_mean;
  o.require(corr >= 0.9, "posterior-mean K correlation >= 0.9");
  o.require(std::abs(est - truth) <= 0.1 * truth, "wF_K within 10%");
  o.require(afce <= 1e-3, "AFCE <= 1e-3");
  o.require(secs <= 600.0, "runtime <= 10 min");
  o.detail << "corr " << fmt(corr) << ", wF_K " << fmt(est) << " vs " << fmt(truth) << ", AFCE "
           << fmt(afce) << ", EM rounds " << run.extras.at("em_rounds") << ", " << fmt(secs)
           << " s";
  return o;
}

// 11
std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), root).string()] = read_text(e.path().string());
    }
  }
  return out;
}

Verdict determinism() {
  Verdict o;
  const fs::path root = fs::temp_directory_path() / "lcf_acceptance_determinism";
  fs::remove_all(root);
  std::size_t files = 0;
  for (const char* e : {"table1", "table4", "table5", "table6", "sweep", "density", "audit",
                        "law-semisynthetic"}) {
    setenv("LCF_LAB_THREADS", "1", 1);
    auto cfg = default_config(e);
    if (cfg.experiment == "law-semisynthetic") {
      cfg.n = 1000;
      cfg.m = 100;
    }
    write_artifacts(run_experiment(cfg), (root / e / "a").string());
    cfg.parallel_seeds = true;
    setenv("LCF_LAB_THREADS", "4", 1);
    write_artifacts(run_experiment(cfg), (root / e / "b").string());
    unsetenv("LCF_LAB_THREADS");
    const auto a = read_tree(root / e / "a");
    const auto b = read_tree(root / e / "b");
    o.require(!a.empty() && a == b, std::string(e) + " artifacts identical");
    files += a.size();
  }
  fs::remove_all(root);
  o.detail << "8 experiments run twice (1 worker, then 4 workers with parallel seeds), " << files
           << " files compared";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "table1-reproduction", table1},
      {2, "exact-gap-law", gap_law},
      {3, "power-g-relaxed",
       [] {
         return relaxed_suite("table4", "Ours-PowerG", std::make_pair(0.930, 0.05),
                              std::make_pair(28.2, 3.0));
       }},
      {4, "scalar-relaxed",
       [] {
         return relaxed_suite("table5", "Ours-Scalar", std::nullopt, std::make_pair(88.6, 10.0));
       }},
      {5, "multiplicative-perfect", multiplicative},
      {6, "cf-gap-preservation", cf_mechanism},
      {7, "path-dependent", path_dependent},
      {8, "gradient-oracle", gradient_oracle},
      {9, "sweep-shape", sweep_shape},
      {10, "law-semisynthetic", law_pipeline},
      {11, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": "
              << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed;
}
