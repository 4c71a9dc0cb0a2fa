#include "lcf/predictors.h"

#include <cmath>
#include <sstream>

#include "overloaded.h"

namespace lcf {
namespace {

using detail::Overloaded;

double need_y_check(const PredictorInput& in, const char* variant) {
  if (!in.y_check) {
    throw InvalidArgument(std::string(variant) + " needs a counterfactual input");
  }
  return *in.y_check;
}

const ExogenousSample& need_u(const PredictorInput& in, const char* variant) {
  if (!in.u) {
    throw InvalidArgument(std::string(variant) + " needs the exogenous sample");
  }
  return *in.u;
}

double h_linear(const Vector& theta, const ExogenousSample& u) {
  if (theta.size() == 0) return 0.0;
  const Vector v = u.responsive();
  if (theta.size() != v.size()) {
    throw InvalidArgument("theta length " + std::to_string(theta.size()) +
                          " != exogenous dimension " +
                          std::to_string(v.size()));
  }
  return theta.dot(v);
}

// Partial derivatives of g with the inputs (y̌, u, x) treated as independent.
struct Partials {
  double d_ycheck = 0.0;
  Vector d_u;  // over responsive coordinates, zero-length means none
  Vector d_x;  // zero-length means none
};

Partials partials(const PredictorSpec& spec, const PredictorInput& in,
                  Eigen::Index u_dim) {
  Partials p;
  auto theta_grad = [&](const Vector& theta) {
    if (theta.size() == 0) return Vector::Zero(u_dim).eval();
    if (theta.size() != u_dim) {
      throw InvalidArgument("theta length does not match the exogenous dimension");
    }
    return theta;
  };
  std::visit(
      Overloaded{
          [&](const Unfair& s) {
            p.d_x = s.theta;
            p.d_u = Vector::Zero(u_dim);
          },
          [&](const CfBaseline& s) {
            if (s.phi.size() != u_dim) {
              throw InvalidArgument("phi length does not match the exogenous dimension");
            }
            p.d_u = s.phi;
          },
          [&](const LcfQuadratic& s) {
            const double yc = need_y_check(in, "lcf-quadratic");
            p.d_ycheck = 2.0 * s.p1 * yc + s.p2;
            p.d_u = theta_grad(s.theta);
          },
          [&](const PowerG& s) {
            const double yc = need_y_check(in, "power-g");
            if (yc < 0.0) {
              throw InvalidArgument("power-g evaluated at negative counterfactual");
            }
            p.d_ycheck = s.p1 * s.exponent * std::pow(yc, s.exponent - 1.0) + s.p2;
            p.d_u = theta_grad(s.theta);
          },
          [&](const ScalarQuadratic& s) {
            if (u_dim != 1) {
              throw UnsupportedPair("scalar-quadratic needs a scalar exogenous u");
            }
            const double yc = need_y_check(in, "scalar-quadratic");
            p.d_ycheck = 2.0 * s.p1 * yc;
            p.d_u = Vector::Constant(1, s.theta);
          },
          [&](const MultiplicativeConvex& s) {
            const double yc = need_y_check(in, "multiplicative-convex");
            p.d_ycheck = 2.0 * s.p1 * yc + s.p2;
            p.d_u = Vector::Zero(u_dim);
          }},
      spec);
  return p;
}

double norm_w_alpha_sq(const Vector& w, const Vector& alpha) {
  return w.cwiseProduct(alpha).squaredNorm();
}

void require_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InvalidArgument("eta must be a positive finite number");
  }
}

}  // namespace

std::string variant_name(const PredictorSpec& spec) {
  return std::visit(
      Overloaded{[](const Unfair&) { return std::string("unfair"); },
                 [](const CfBaseline&) { return std::string("cf-baseline"); },
                 [](const LcfQuadratic&) { return std::string("lcf-quadratic"); },
                 [](const PowerG&) { return std::string("power-g"); },
                 [](const ScalarQuadratic&) {
                   return std::string("scalar-quadratic");
                 },
                 [](const MultiplicativeConvex&) {
                   return std::string("multiplicative-convex");
                 }},
      spec);
}

void validate(const PredictorSpec& spec) {
  std::visit(
      Overloaded{
          [](const Unfair&) {}, [](const CfBaseline&) {},
          [](const LcfQuadratic& s) {
            if (!(s.p1 > 0.0)) throw InvalidArgument("lcf-quadratic: p1 must be > 0");
          },
          [](const PowerG& s) {
            if (!(s.exponent > 1.0)) throw InvalidArgument("power-g: exponent must be > 1");
          },
          [](const ScalarQuadratic&) {},
          [](const MultiplicativeConvex& s) {
            if (!(s.p1 > 0.0)) {
              throw InvalidArgument("multiplicative-convex: p1 must be > 0");
            }
          }},
      spec);
}

double predict(const PredictorSpec& spec, const PredictorInput& in) {
  return std::visit(
      Overloaded{
          [&](const Unfair& s) {
            if (!in.x) throw InvalidArgument("unfair predictor needs x");
            if (in.x->size() != s.theta.size()) {
              throw InvalidArgument("unfair: theta and x lengths differ");
            }
            return s.theta.dot(*in.x) + s.c;
          },
          [&](const CfBaseline& s) {
            const Vector v = need_u(in, "cf-baseline").responsive();
            if (v.size() != s.phi.size()) {
              throw InvalidArgument("cf-baseline: phi and u lengths differ");
            }
            return s.phi.dot(v) + s.c;
          },
          [&](const LcfQuadratic& s) {
            const double yc = need_y_check(in, "lcf-quadratic");
            const double h = s.theta.size() ? h_linear(s.theta, need_u(in, "lcf-quadratic")) : 0.0;
            return s.p1 * yc * yc + s.p2 * yc + s.p3 + h;
          },
          [&](const PowerG& s) {
            const double yc = need_y_check(in, "power-g");
            if (yc < 0.0) {
              throw InvalidArgument("power-g evaluated at negative counterfactual");
            }
            const double h = s.theta.size() ? h_linear(s.theta, need_u(in, "power-g")) : 0.0;
            return s.p1 * std::pow(yc, s.exponent) + s.p2 * yc + s.p3 + h;
          },
          [&](const ScalarQuadratic& s) {
            const double yc = need_y_check(in, "scalar-quadratic");
            const auto& u = need_u(in, "scalar-quadratic");
            if (u.ux.size() != 1 || u.uy) {
              throw InvalidArgument("scalar-quadratic needs a scalar exogenous u");
            }
            return s.p1 * yc * yc + s.p2 + s.theta * u.ux[0];
          },
          [&](const MultiplicativeConvex& s) {
            const double yc = need_y_check(in, "multiplicative-convex");
            return s.p1 * yc * yc + s.p2 * yc + s.p3;
          }},
      spec);
}

bool uses_counterfactual(const PredictorSpec& spec) {
  return !std::holds_alternative<Unfair>(spec) &&
         !std::holds_alternative<CfBaseline>(spec);
}

std::vector<World> alternate_worlds(const StructuralModel& scm, Attribute own) {
  std::vector<World> out;
  for (Attribute a : attribute_domain(scm)) {
    if (a != own) out.push_back(World::uniform(a));
  }
  return out;
}

PredictorInput world_input(const StructuralModel& scm,
                           const ExogenousSample& u, const World& own,
                           const std::vector<World>& partners) {
  PredictorInput in;
  if (!partners.empty()) {
    KahanSum acc;
    for (const auto& p : partners) acc.add(forward(scm, u, p).y);
    in.y_check = acc.value() / static_cast<double>(partners.size());
  }
  in.x = forward(scm, u, own).x;
  in.u = u;
  return in;
}

Vector grad_wrt_u(const PredictorSpec& spec, const StructuralModel& scm,
                  const ExogenousSample& u, const World& own,
                  const std::vector<World>& partners) {
  const Eigen::Index dim = u.responsive_size();
  if (dim != responsive_dimension(scm)) {
    throw InvalidArgument("exogenous sample does not match the model");
  }
  PredictorInput in;
  Vector chain = Vector::Zero(dim);
  if (uses_counterfactual(spec)) {
    if (partners.empty()) throw InvalidArgument("need at least one partner world");
    KahanSum acc;
    for (const auto& p : partners) {
      acc.add(forward(scm, u, p).y);
      chain += outcome_gradient(scm, u, p);
    }
    const double count = static_cast<double>(partners.size());
    in.y_check = acc.value() / count;
    chain /= count;
  }
  if (std::holds_alternative<Unfair>(spec)) in.x = forward(scm, u, own).x;
  in.u = u;

  const Partials p = partials(spec, in, dim);
  Vector grad = p.d_u + p.d_ycheck * chain;
  if (p.d_x.size() > 0) {
    const Matrix jac = feature_jacobian(scm, u, own);
    if (jac.rows() != p.d_x.size()) {
      throw InvalidArgument("unfair: theta length does not match the features");
    }
    grad += jac.transpose() * p.d_x;
  }
  return grad;
}

Vector grad_wrt_u(const PredictorSpec& spec, const StructuralModel& scm,
                  const ExogenousSample& u, Attribute a_factual,
                  Attribute a_counterfactual) {
  return grad_wrt_u(spec, scm, u, World::uniform(a_factual),
                    {World::uniform(a_counterfactual)});
}

Vector finite_diff_grad(const PredictorSpec& spec, const StructuralModel& scm,
                        const ExogenousSample& u, const World& own,
                        const std::vector<World>& partners) {
  const Vector base = u.responsive();
  Vector grad(base.size());
  auto eval = [&](const Vector& v) {
    const ExogenousSample up = u.with_responsive(v);
    double value;
    try {
      value = predict(spec, world_input(scm, up, own, partners));
    } catch (const InvalidArgument& e) {
      throw NumericalError(std::string("finite differences: ") + e.what());
    }
    if (!std::isfinite(value)) {
      throw NumericalError("finite differences: non-finite prediction");
    }
    return value;
  };
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(base[i]));
    Vector plus = base, minus = base;
    plus[i] += h;
    minus[i] -= h;
    grad[i] = (eval(plus) - eval(minus)) / (plus[i] - minus[i]);
  }
  return grad;
}

Vector finite_diff_grad(const PredictorSpec& spec, const StructuralModel& scm,
                        const ExogenousSample& u, Attribute a_factual,
                        Attribute a_counterfactual) {
  return finite_diff_grad(spec, scm, u, World::uniform(a_factual),
                          {World::uniform(a_counterfactual)});
}

double compute_T(const StructuralModel& scm, double eta) {
  require_eta(eta);
  return std::visit(
      Overloaded{
          [&](const LinearAdditiveScm& m) {
            return 1.0 / (eta * (norm_w_alpha_sq(m.w, m.alpha) + m.gamma * m.gamma));
          },
          [&](const MultiplicativeBinaryScm& m) {
            const double a1a2 = m.attr_domain.at(0) * m.attr_domain.at(1);
            return 1.0 /
                   (eta * (a1a2 * norm_w_alpha_sq(m.w, m.alpha) + m.gamma * m.gamma));
          },
          [&](const ScalarMonotoneScm&) -> double {
            throw UnsupportedPair(
                "compute_T: the scalar family bounds p1 by 1/(eta·M) instead");
          },
          [&](const LawSchoolScm& m) { return 1.0 / (eta * m.wF_K * m.wF_K); }},
      scm);
}

double scalar_p1_bound(const ScalarMonotoneScm& scm, double eta) {
  require_eta(eta);
  return 1.0 / (eta * scm.lipschitz_M);
}

ConditionReport check_relaxed_conditions(const PredictorSpec& spec,
                                         const StructuralModel& scm,
                                         double eta,
                                         std::optional<CounterfactualRange> range) {
  require_eta(eta);
  ConditionReport rep;
  auto finish = [&](bool inclusive) {
    const bool within = inclusive ? rep.lipschitz_K <= rep.lipschitz_bound
                                  : rep.lipschitz_K < rep.lipschitz_bound;
    rep.satisfied = rep.convex_ok && rep.additive_ok && within;
    return rep;
  };
  return std::visit(
      Overloaded{
          [&](const LcfQuadratic& s) {
            rep.convex_ok = s.p1 > 0.0;
            rep.additive_ok = true;
            rep.lipschitz_K = 2.0 * s.p1;
            rep.lipschitz_bound = 2.0 * compute_T(scm, eta);
            return finish(false);
          },
          [&](const PowerG& s) {
            if (!range) {
              throw InvalidArgument("power-g condition check needs the y̌ range");
            }
            if (!(range->lo > 0.0) || !(range->hi >= range->lo)) {
              throw InvalidArgument("power-g condition check needs 0 < lo <= hi");
            }
            rep.convex_ok = s.p1 > 0.0 && s.exponent > 1.0;
            rep.additive_ok = true;
            const double curvature = s.p1 * s.exponent * (s.exponent - 1.0);
            rep.lipschitz_K =
                curvature * std::max(std::pow(range->lo, s.exponent - 2.0),
                                     std::pow(range->hi, s.exponent - 2.0));
            rep.lipschitz_bound = 2.0 * compute_T(scm, eta);
            return finish(false);
          },
          [&](const MultiplicativeConvex& s) {
            if (!std::holds_alternative<MultiplicativeBinaryScm>(scm)) {
              throw UnsupportedPair("multiplicative-convex needs the multiplicative family");
            }
            rep.convex_ok = s.p1 > 0.0;
            rep.additive_ok = true;
            rep.lipschitz_K = 2.0 * s.p1;
            rep.lipschitz_bound = 2.0 * compute_T(scm, eta);
            return finish(false);
          },
          [&](const ScalarQuadratic& s) {
            const auto* m = std::get_if<ScalarMonotoneScm>(&scm);
            if (!m) throw UnsupportedPair("scalar-quadratic needs the scalar family");
            const bool increasing = check_scalar_shape(*m).increasing;
            rep.convex_ok = s.p1 > 0.0;
            // h must move in the same direction as f̃.
            rep.additive_ok = increasing ? s.theta >= 0.0 : s.theta <= 0.0;
            rep.lipschitz_K = s.p1;
            rep.lipschitz_bound = scalar_p1_bound(*m, eta);
            return finish(true);
          },
          [&](const auto&) -> ConditionReport {
            throw UnsupportedPair("condition check applies to the lookahead families only");
          }},
      spec);
}

}  // namespace lcf
