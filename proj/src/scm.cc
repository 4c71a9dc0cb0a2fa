#include "lcf/scm.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/poisson.hpp>

#include "overloaded.h"

namespace lcf {
namespace {

constexpr double kMaxLogRate = 30.0;
std::atomic<std::uint64_t> g_clamp_count{0};

using detail::Overloaded;

void check_domain(const std::vector<Attribute>& domain, const char* family) {
  std::vector<Attribute> sorted = domain;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
      sorted.size() < 2) {
    throw InvalidArgument(std::string(family) +
                          ": attr_domain needs at least two distinct values");
  }
  for (double a : domain) {
    if (!std::isfinite(a)) {
      throw InvalidArgument(std::string(family) + ": non-finite attribute");
    }
  }
}

template <class Scm>
void check_linear_like(const Scm& scm, const char* family) {
  const auto d = scm.alpha.size();
  if (d < 1) throw InvalidArgument(std::string(family) + ": d must be >= 1");
  if (scm.beta.size() != d || scm.w.size() != d) {
    throw InvalidArgument(std::string(family) +
                          ": alpha, beta and w must share length d");
  }
  if (static_cast<Eigen::Index>(scm.prior_ux.size()) != d) {
    throw InvalidArgument(std::string(family) + ": need one prior per feature");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (scm.alpha[i] == 0.0) {
      throw InvalidArgument(std::string(family) + ": alpha_" +
                            std::to_string(i + 1) + " is zero");
    }
  }
  if (!scm.alpha.allFinite() || !scm.beta.allFinite() || !scm.w.allFinite() ||
      !std::isfinite(scm.gamma)) {
    throw InvalidArgument(std::string(family) + ": non-finite parameter");
  }
  if (scm.gamma == 0.0) {
    throw InvalidArgument(std::string(family) + ": gamma is zero");
  }
  check_domain(scm.attr_domain, family);
}

void require_attribute(const std::vector<Attribute>& domain, Attribute a) {
  if (!in_domain(domain, a)) {
    std::ostringstream os;
    os << "attribute " << a << " outside attr_domain";
    throw InvalidArgument(os.str());
  }
}

void require_linear_sample(Eigen::Index d, const ExogenousSample& u) {
  if (u.ux.size() != d || !u.uy.has_value()) {
    throw InvalidArgument("exogenous sample must hold ux of length " +
                          std::to_string(d) + " and uy");
  }
}

double scalar_argument(const ScalarMonotoneScm& scm, double u, Attribute a) {
  const double s = scm.alpha * u + scm.u0.value(a);
  if (!scm.f_tilde.in_domain(s)) {
    std::ostringstream os;
    os << "scalar argument " << s << " outside the domain of f_tilde";
    throw InvalidArgument(os.str());
  }
  return s;
}

void require_uniform_world(const World& world, const char* family) {
  if (world.feature_attributes.has_value()) {
    throw InvalidArgument(std::string(family) +
                          ": per-feature attributes need a linear model");
  }
}

Outcome forward_linear(const LinearAdditiveScm& scm, const ExogenousSample& u,
                       const World& world) {
  require_linear_sample(scm.d(), u);
  Vector attrs;
  if (world.feature_attributes) {
    attrs = *world.feature_attributes;
    if (attrs.size() != scm.d()) {
      throw InvalidArgument("per-feature attributes must have length d");
    }
    for (double a : attrs) require_attribute(scm.attr_domain, a);
  } else {
    require_attribute(scm.attr_domain, world.attribute);
    attrs = Vector::Constant(scm.d(), world.attribute);
  }
  Outcome out;
  out.x = scm.alpha.cwiseProduct(u.ux) + scm.beta.cwiseProduct(attrs);
  out.y = scm.w.dot(out.x) + scm.gamma * (*u.uy);
  return out;
}

Outcome forward_multiplicative(const MultiplicativeBinaryScm& scm,
                               const ExogenousSample& u, const World& world) {
  require_uniform_world(world, "multiplicative");
  require_linear_sample(scm.d(), u);
  require_attribute(scm.attr_domain, world.attribute);
  Outcome out;
  out.x = world.attribute * (scm.alpha.cwiseProduct(u.ux) + scm.beta);
  out.y = scm.w.dot(out.x) + scm.gamma * (*u.uy);
  return out;
}

Outcome forward_scalar(const ScalarMonotoneScm& scm, const ExogenousSample& u,
                       const World& world) {
  require_uniform_world(world, "scalar");
  if (u.ux.size() != 1) {
    throw InvalidArgument("scalar model needs a one-dimensional exogenous u");
  }
  require_attribute(scm.attr_domain, world.attribute);
  const double s = scalar_argument(scm, u.ux[0], world.attribute);
  Outcome out;
  out.x = Vector::Constant(1, s);
  out.y = scm.f_tilde.value(s);
  return out;
}

void require_law_sample(const ExogenousSample& u) {
  if (u.ux.size() != 1 || u.noise.size() != 3 || u.context.size() != 1) {
    throw InvalidArgument(
        "law-school sample needs ux=[k], noise=[eps_G, v_L, eps_F], "
        "context=[r]");
  }
}

Outcome forward_law(const LawSchoolScm& scm, const ExogenousSample& u,
                    const World& world) {
  require_uniform_world(world, "law-school");
  require_law_sample(u);
  require_attribute(scm.attr_domain, world.attribute);
  const double k = u.ux[0];
  const double r = u.context[0];
  const double s = world.attribute;
  const double g =
      scm.wG_K * k + scm.wG_R * r + scm.wG_S * s + scm.bG +
      scm.sigmaG * u.noise[0];
  const double rate = std::exp(law_log_rate(scm, k, r, s));
  const double l = poisson_quantile(u.noise[1], rate);
  const double f = scm.wF_K * k + scm.wF_R * r + scm.wF_S * s + u.noise[2];
  Outcome out;
  out.x = Vector(3);
  out.x << r, g, l;
  out.y = f;
  return out;
}

}  // namespace

Vector ExogenousSample::responsive() const {
  Vector v(responsive_size());
  v.head(ux.size()) = ux;
  if (uy) v[ux.size()] = *uy;
  return v;
}

ExogenousSample ExogenousSample::with_responsive(const Vector& values) const {
  if (values.size() != responsive_size()) {
    throw InvalidArgument("responsive vector length " +
                          std::to_string(values.size()) + " != " +
                          std::to_string(responsive_size()));
  }
  ExogenousSample out = *this;
  out.ux = values.head(ux.size());
  if (uy) out.uy = values[ux.size()];
  return out;
}

void LinearAdditiveScm::validate() const {
  check_linear_like(*this, "linear-additive");
}

void MultiplicativeBinaryScm::validate() const {
  check_linear_like(*this, "multiplicative-binary");
  if (attr_domain.size() != 2) {
    throw InvalidArgument("multiplicative-binary: attr_domain must be {a1, a2}");
  }
  if (attr_domain[0] * attr_domain[1] <= 0.0) {
    throw InvalidArgument("multiplicative-binary: a1·a2 must be positive");
  }
}

ScalarFunction ScalarFunction::power(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw InvalidArgument("power(q) needs 0 < q < 1");
  }
  ScalarFunction f;
  f.name = "power";
  f.exponent = q;
  f.value = [q](double s) { return std::pow(s, q); };
  f.derivative = [q](double s) { return q * std::pow(s, q - 1.0); };
  f.domain_lower = 0.0;
  return f;
}

AttributeMap AttributeMap::exp() {
  return AttributeMap{"exp", [](double a) { return std::exp(a); }};
}

AttributeMap AttributeMap::identity() {
  return AttributeMap{"identity", [](double a) { return a; }};
}

std::pair<double, double> ScalarMonotoneScm::argument_range() const {
  const auto [lo, hi] = prior_u.support();
  const double e1 = alpha * lo;
  const double e2 = alpha * hi;
  double u0_min = std::numeric_limits<double>::infinity();
  double u0_max = -u0_min;
  for (double a : attr_domain) {
    const double v = u0.value(a);
    u0_min = std::min(u0_min, v);
    u0_max = std::max(u0_max, v);
  }
  return {std::min(e1, e2) + u0_min, std::max(e1, e2) + u0_max};
}

ScalarShapeReport check_scalar_shape(const ScalarMonotoneScm& scm) {
  constexpr int kGrid = 10000;
  ScalarShapeReport rep;
  auto [lo, hi] = scm.argument_range();
  const double span = hi - lo;
  std::vector<double> s(kGrid), f(kGrid), gamma(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    s[i] = lo + span * (i + 0.5) / kGrid;
    f[i] = scm.f_tilde.value(s[i]);
    gamma[i] = f[i] * scm.f_tilde.derivative(s[i]);
  }
  bool inc = true, dec = true, concave = true, gnn = true;
  double m = 0.0;
  for (int i = 0; i + 1 < kGrid; ++i) {
    const double df = f[i + 1] - f[i];
    inc = inc && df > 0.0;
    dec = dec && df < 0.0;
    if (i + 2 < kGrid) {
      concave = concave && (f[i + 2] - 2.0 * f[i + 1] + f[i]) < 0.0;
    }
    m = std::max(m, std::abs(gamma[i + 1] - gamma[i]) / (s[i + 1] - s[i]));
  }
  for (double g : gamma) gnn = gnn && g >= 0.0;
  rep.monotone = inc || dec;
  rep.increasing = inc;
  rep.strictly_concave = concave;
  rep.gamma_nonnegative = gnn;
  rep.empirical_M = m;
  rep.lipschitz_M_ok = m <= scm.lipschitz_M * (1.0 + 1e-9);
  if (!rep.lipschitz_M_ok) {
    std::ostringstream os;
    os << "declared lipschitz_M " << scm.lipschitz_M
       << " is below the grid estimate " << m << " on [" << lo << ", " << hi
       << "]";
    rep.warnings.push_back(os.str());
  }
  return rep;
}

void ScalarMonotoneScm::validate() const {
  if (!f_tilde.value || !f_tilde.derivative || !u0.value) {
    throw InvalidArgument("scalar-monotone: f_tilde and u0 must be set");
  }
  if (alpha == 0.0 || !std::isfinite(alpha)) {
    throw InvalidArgument("scalar-monotone: alpha must be finite and nonzero");
  }
  if (!(lipschitz_M > 0.0)) {
    throw InvalidArgument("scalar-monotone: lipschitz_M must be positive");
  }
  check_domain(attr_domain, "scalar-monotone");
  const auto [lo, hi] = argument_range();
  if (!f_tilde.in_domain(lo)) {
    std::ostringstream os;
    os << "scalar-monotone: argument range [" << lo << ", " << hi
       << "] leaves the domain of f_tilde";
    throw InvalidArgument(os.str());
  }
  const auto shape = check_scalar_shape(*this);
  if (!shape.monotone || !shape.strictly_concave) {
    throw InvalidArgument(
        "scalar-monotone: f_tilde must be monotone and strictly concave on "
        "the argument range");
  }
  if (!shape.gamma_nonnegative) {
    throw InvalidArgument("scalar-monotone: f_tilde·f_tilde' is negative");
  }
}

void LawSchoolScm::validate() const {
  if (!(sigmaG > 0.0)) throw InvalidArgument("law-school: sigmaG must be > 0");
  if (wF_K == 0.0) throw InvalidArgument("law-school: wF_K must be nonzero");
  for (double v : {wG_K, wG_R, wG_S, bG, wL_K, wL_R, wL_S, bL, wF_K, wF_R,
                   wF_S}) {
    if (!std::isfinite(v)) throw InvalidArgument("law-school: non-finite weight");
  }
  check_domain(attr_domain, "law-school");
}

std::string family_name(const StructuralModel& scm) {
  return std::visit(
      Overloaded{
          [](const LinearAdditiveScm&) { return std::string("linear-additive"); },
          [](const MultiplicativeBinaryScm&) {
            return std::string("multiplicative-binary");
          },
          [](const ScalarMonotoneScm&) { return std::string("scalar-monotone"); },
          [](const LawSchoolScm&) { return std::string("law-school"); }},
      scm);
}

const std::vector<Attribute>& attribute_domain(const StructuralModel& scm) {
  return std::visit(
      [](const auto& m) -> const std::vector<Attribute>& {
        return m.attr_domain;
      },
      scm);
}

void validate(const StructuralModel& scm) {
  std::visit([](const auto& m) { m.validate(); }, scm);
}

bool in_domain(const std::vector<Attribute>& domain, Attribute a) {
  return std::find(domain.begin(), domain.end(), a) != domain.end();
}

Outcome forward(const StructuralModel& scm, const ExogenousSample& u,
                Attribute a) {
  return forward(scm, u, World::uniform(a));
}

Outcome forward(const StructuralModel& scm, const ExogenousSample& u,
                const World& world) {
  return std::visit(
      Overloaded{
          [&](const LinearAdditiveScm& m) { return forward_linear(m, u, world); },
          [&](const MultiplicativeBinaryScm& m) {
            return forward_multiplicative(m, u, world);
          },
          [&](const ScalarMonotoneScm& m) { return forward_scalar(m, u, world); },
          [&](const LawSchoolScm& m) { return forward_law(m, u, world); }},
      scm);
}

Outcome counterfactual(const StructuralModel& scm, const ExogenousSample& u,
                       Attribute a_check) {
  return forward(scm, u, World::uniform(a_check));
}

World path_dependent_world(const LinearAdditiveScm& scm, Attribute a,
                           Attribute a_check, const PathMask& mask) {
  if (static_cast<Eigen::Index>(mask.unfair.size()) != scm.d()) {
    throw InvalidArgument("path mask length must equal d");
  }
  Vector attrs(scm.d());
  for (Eigen::Index i = 0; i < scm.d(); ++i) {
    attrs[i] = mask.unfair[i] ? a_check : a;
  }
  return World{a_check, attrs};
}

double path_dependent_counterfactual(const LinearAdditiveScm& scm,
                                     const Vector& x, Attribute a,
                                     Attribute a_check, const PathMask& mask,
                                     const ExogenousSample& u) {
  require_linear_sample(scm.d(), u);
  if (x.size() != scm.d() ||
      static_cast<Eigen::Index>(mask.unfair.size()) != scm.d()) {
    throw InvalidArgument("x and mask must have length d");
  }
  require_attribute(scm.attr_domain, a);
  require_attribute(scm.attr_domain, a_check);
  double y = scm.gamma * (*u.uy);
  for (Eigen::Index i = 0; i < scm.d(); ++i) {
    const double xi = mask.unfair[i]
                          ? scm.alpha[i] * u.ux[i] + scm.beta[i] * a_check
                          : x[i];
    y += scm.w[i] * xi;
  }
  return y;
}

Eigen::Index responsive_dimension(const StructuralModel& scm) {
  return std::visit(
      Overloaded{
          [](const LinearAdditiveScm& m) { return m.d() + 1; },
          [](const MultiplicativeBinaryScm& m) { return m.d() + 1; },
          [](const ScalarMonotoneScm&) { return Eigen::Index{1}; },
          [](const LawSchoolScm&) { return Eigen::Index{1}; }},
      scm);
}

Vector outcome_gradient(const StructuralModel& scm, const ExogenousSample& u,
                        const World& world) {
  return std::visit(
      Overloaded{
          [&](const LinearAdditiveScm& m) {
            Vector g(m.d() + 1);
            g.head(m.d()) = m.w.cwiseProduct(m.alpha);
            g[m.d()] = m.gamma;
            return g;
          },
          [&](const MultiplicativeBinaryScm& m) {
            require_uniform_world(world, "multiplicative");
            Vector g(m.d() + 1);
            g.head(m.d()) = world.attribute * m.w.cwiseProduct(m.alpha);
            g[m.d()] = m.gamma;
            return g;
          },
          [&](const ScalarMonotoneScm& m) {
            require_uniform_world(world, "scalar");
            const double s = scalar_argument(m, u.ux[0], world.attribute);
            return Vector::Constant(1, m.alpha * m.f_tilde.derivative(s)).eval();
          },
          [&](const LawSchoolScm& m) {
            return Vector::Constant(1, m.wF_K).eval();
          }},
      scm);
}

Matrix feature_jacobian(const StructuralModel& scm, const ExogenousSample& /*u*/,
                        const World& world) {
  return std::visit(
      Overloaded{
          [&](const LinearAdditiveScm& m) {
            Matrix j = Matrix::Zero(m.d(), m.d() + 1);
            j.leftCols(m.d()) = m.alpha.asDiagonal();
            return j;
          },
          [&](const MultiplicativeBinaryScm& m) {
            Matrix j = Matrix::Zero(m.d(), m.d() + 1);
            j.leftCols(m.d()) = (world.attribute * m.alpha).asDiagonal();
            return j;
          },
          [&](const ScalarMonotoneScm& m) {
            return Matrix::Constant(1, 1, m.alpha).eval();
          },
          [&](const LawSchoolScm& m) {
            // L is piecewise constant in K under fixed noise.
            Matrix j = Matrix::Zero(3, 1);
            j(1, 0) = m.wG_K;
            return j;
          }},
      scm);
}

// ---------------------------------------------------------------------------

double law_log_rate(const LawSchoolScm& scm, double k, double r, double s) {
  const double z = scm.wL_K * k + scm.wL_R * r + scm.wL_S * s + scm.bL;
  if (z > kMaxLogRate) {
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    return kMaxLogRate;
  }
  return z;
}

std::uint64_t poisson_clamp_count() { return g_clamp_count.load(); }

double poisson_quantile(double v, double rate) {
  using Policy = boost::math::policies::policy<
      boost::math::policies::discrete_quantile<
          boost::math::policies::integer_round_up>>;
  if (!(v > 0.0 && v < 1.0)) throw InvalidArgument("poisson quantile needs v in (0,1)");
  boost::math::poisson_distribution<double, Policy> dist(rate);
  return boost::math::quantile(dist, v);
}

namespace {

struct LogPosteriorTerms {
  double value;
  double d1;
  double d2;
};

LogPosteriorTerms law_terms(const LawSchoolScm& scm, const LawEvidence& ev,
                            double k) {
  const double mu_g = scm.wG_K * k + scm.wG_R * ev.r + scm.wG_S * ev.s + scm.bG;
  const double var_g = scm.sigmaG * scm.sigmaG;
  const double z =
      scm.wL_K * k + scm.wL_R * ev.r + scm.wL_S * ev.s + scm.bL;
  const bool clamped = z > kMaxLogRate;
  const double log_rate = law_log_rate(scm, k, ev.r, ev.s);
  const double rate = std::exp(log_rate);

  LogPosteriorTerms t{};
  t.value = -0.5 * k * k - 0.5 * (ev.g - mu_g) * (ev.g - mu_g) / var_g +
            ev.l * log_rate - rate;
  t.d1 = -k + (ev.g - mu_g) * scm.wG_K / var_g +
         (clamped ? 0.0 : scm.wL_K * (ev.l - rate));
  t.d2 = -1.0 - scm.wG_K * scm.wG_K / var_g -
         (clamped ? 0.0 : scm.wL_K * scm.wL_K * rate);
  if (ev.f) {
    const double mu_f = scm.wF_K * k + scm.wF_R * ev.r + scm.wF_S * ev.s;
    t.value -= 0.5 * (*ev.f - mu_f) * (*ev.f - mu_f);
    t.d1 += (*ev.f - mu_f) * scm.wF_K;
    t.d2 -= scm.wF_K * scm.wF_K;
  }
  return t;
}

void check_evidence(const LawEvidence& ev) {
  if (!(ev.l >= 0.0) || std::floor(ev.l) != ev.l) {
    throw InvalidArgument("law-school: L must be a nonnegative integer");
  }
  if (!std::isfinite(ev.r) || !std::isfinite(ev.s) || !std::isfinite(ev.g)) {
    throw InvalidArgument("law-school: non-finite evidence");
  }
}

double posterior_mode(const LawSchoolScm& scm, const LawEvidence& ev) {
  double k = 0.0;
  auto cur = law_terms(scm, ev, k);
  for (int it = 0; it < 100; ++it) {
    double step = -cur.d1 / cur.d2;
    double cand = k + step;
    auto next = law_terms(scm, ev, cand);
    int halvings = 0;
    while (!(next.value >= cur.value) && halvings < 60) {
      step *= 0.5;
      cand = k + step;
      next = law_terms(scm, ev, cand);
      ++halvings;
    }
    if (!(next.value >= cur.value)) break;
    k = cand;
    cur = next;
    if (std::abs(step) < 1e-12 * std::max(1.0, std::abs(k))) break;
  }
  return k;
}

}  // namespace

double law_log_posterior(const LawSchoolScm& scm, const LawEvidence& ev,
                         double k) {
  return law_terms(scm, ev, k).value;
}

McmcResult posterior_sample_k(const LawSchoolScm& scm, const LawEvidence& ev,
                              const McmcConfig& cfg, std::uint64_t seed) {
  check_evidence(ev);
  if (cfg.samples == 0 || cfg.thinning == 0 || !(cfg.proposal_scale > 0.0)) {
    throw InvalidArgument("mcmc config needs samples, thinning >= 1 and a "
                          "positive proposal scale");
  }
  Rng rng(seed);
  std::normal_distribution<double> step(0.0, cfg.proposal_scale);

  McmcResult res;
  res.mode = posterior_mode(scm, ev);
  double k = res.mode;
  double lp = law_log_posterior(scm, ev, k);
  if (!std::isfinite(lp)) {
    throw NumericalError("law-school: non-finite log posterior at the mode");
  }
  std::size_t accepted = 0;
  std::size_t proposals = 0;
  const std::size_t total = cfg.burn_in + cfg.samples * cfg.thinning;
  res.samples.reserve(cfg.samples);
  for (std::size_t it = 0; it < total; ++it) {
    const double cand = k + step(rng);
    const double lp_cand = law_log_posterior(scm, ev, cand);
    if (std::isnan(lp_cand)) {
      throw NumericalError("law-school: NaN log posterior");
    }
    ++proposals;
    if (std::log(open_unit_uniform(rng)) < lp_cand - lp) {
      k = cand;
      lp = lp_cand;
      ++accepted;
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0) {
      res.samples.push_back(k);
    }
  }
  res.acceptance_rate = static_cast<double>(accepted) / proposals;
  return res;
}

// ---------------------------------------------------------------------------

PosteriorSampler::PosteriorSampler(StructuralModel scm, Vector x, Attribute a,
                                   McmcConfig mcmc)
    : scm_(std::move(scm)), x_(std::move(x)), a_(a), mcmc_(mcmc) {
  require_attribute(attribute_domain(scm_), a_);
  std::visit(
      Overloaded{
          [&](const LinearAdditiveScm& m) {
            if (x_.size() != m.d()) throw InvalidArgument("x must have length d");
            fixed_.ux = (x_ - m.beta * a_).cwiseQuotient(m.alpha);
          },
          [&](const MultiplicativeBinaryScm& m) {
            if (x_.size() != m.d()) throw InvalidArgument("x must have length d");
            if (a_ == 0.0) throw InvalidArgument("multiplicative abduction needs a != 0");
            fixed_.ux = (x_ / a_ - m.beta).cwiseQuotient(m.alpha);
          },
          [&](const ScalarMonotoneScm& m) {
            if (x_.size() != 1) throw InvalidArgument("scalar model has d = 1");
            if (!m.f_tilde.in_domain(x_[0])) {
              throw InvalidArgument("observed x outside the domain of f_tilde");
            }
            fixed_.ux = Vector::Constant(1, (x_[0] - m.u0.value(a_)) / m.alpha);
          },
          [&](const LawSchoolScm&) {
            if (x_.size() != 3) {
              throw InvalidArgument("law-school x must be [r, g, l]");
            }
            check_evidence(LawEvidence{x_[0], a_, x_[1], x_[2], std::nullopt});
            fixed_.context = Vector::Constant(1, x_[0]);
          }},
      scm_);
}

bool PosteriorSampler::deterministic_ux() const {
  return !std::holds_alternative<LawSchoolScm>(scm_);
}

std::vector<ExogenousSample> PosteriorSampler::draw(std::size_t m,
                                                    std::uint64_t seed) const {
  if (m == 0) throw InvalidArgument("posterior draw count must be >= 1");
  std::vector<ExogenousSample> out;
  out.reserve(m);
  Rng rng(seed);
  std::visit(
      Overloaded{
          [&](const LinearAdditiveScm& s) {
            for (std::size_t j = 0; j < m; ++j) {
              ExogenousSample u = fixed_;
              u.uy = s.prior_uy.sample(rng);
              out.push_back(std::move(u));
            }
          },
          [&](const MultiplicativeBinaryScm& s) {
            for (std::size_t j = 0; j < m; ++j) {
              ExogenousSample u = fixed_;
              u.uy = s.prior_uy.sample(rng);
              out.push_back(std::move(u));
            }
          },
          [&](const ScalarMonotoneScm&) { out.assign(m, fixed_); },
          [&](const LawSchoolScm& s) {
            const LawEvidence ev{x_[0], a_, x_[1], x_[2], std::nullopt};
            McmcConfig cfg = mcmc_;
            cfg.samples = m;
            const auto chain = posterior_sample_k(s, ev, cfg, rng());
            last_acceptance_ = chain.acceptance_rate;
            std::normal_distribution<double> std_normal(0.0, 1.0);
            for (double k : chain.samples) {
              ExogenousSample u = fixed_;
              u.ux = Vector::Constant(1, k);
              const double mu_g = s.wG_K * k + s.wG_R * ev.r + s.wG_S * ev.s + s.bG;
              const double rate = std::exp(law_log_rate(s, k, ev.r, ev.s));
              boost::math::poisson_distribution<double> pois(rate);
              const double lo = ev.l > 0 ? boost::math::cdf(pois, ev.l - 1) : 0.0;
              const double hi = boost::math::cdf(pois, ev.l);
              double v = lo + (hi - lo) * open_unit_uniform(rng);
              const double v_lo = std::nextafter(lo, 1.0);
              const double v_hi = std::nextafter(hi, 0.0);
              v = v_lo < v_hi ? std::clamp(v, v_lo, v_hi) : v_hi;
              u.noise = Vector(3);
              u.noise << (ev.g - mu_g) / s.sigmaG, v, std_normal(rng);
              out.push_back(std::move(u));
            }
          }},
      scm_);
  return out;
}

PosteriorSampler abduct(const StructuralModel& scm, const Vector& x,
                        Attribute a, const McmcConfig& mcmc) {
  return PosteriorSampler(scm, x, a, mcmc);
}

}  // namespace lcf
