#include "lcf/presets.h"

#include <cmath>

namespace lcf::presets {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const Vector& alpha_b() {
  static const Vector v = vec({0.37454012, 0.95071431, 0.73199394, 0.59865848,
                               0.15601864, 0.15599452, 0.05808361, 0.86617615,
                               0.60111501, 0.70807258});
  return v;
}
const Vector& beta_b() {
  static const Vector v = vec({0.02058449, 0.96990985, 0.83244264, 0.21233911,
                               0.18182497, 0.18340451, 0.30424224, 0.52475643,
                               0.43194502, 0.29122914});
  return v;
}
const Vector& w_b() {
  static const Vector v = vec({0.61185289, 0.13949386, 0.29214465, 0.36636184,
                               0.45606998, 0.78517596, 0.19967378, 0.51423444,
                               0.59241457, 0.04645041});
  return v;
}
constexpr double kGammaB = 0.60754485;

}  // namespace

LinearAdditiveScm appendix_b() {
  LinearAdditiveScm m;
  m.alpha = alpha_b();
  m.beta = beta_b();
  m.w = w_b();
  m.gamma = kGammaB;
  m.prior_ux.assign(10, Distribution::uniform(0.0, 1.0));
  m.prior_uy = Distribution::uniform(0.0, 1.0);
  m.attr_domain = {0.0, 1.0};
  return m;
}

MultiplicativeBinaryScm multiplicative_f() {
  MultiplicativeBinaryScm m;
  m.alpha = alpha_b();
  m.beta = beta_b();
  m.w = w_b();
  m.gamma = kGammaB;
  m.prior_ux.assign(10, Distribution::uniform(0.0, 1.0));
  m.prior_uy = Distribution::uniform(0.0, 1.0);
  m.attr_domain = {1.0, 2.0};
  return m;
}

ScalarMonotoneScm scalar_e() {
  ScalarMonotoneScm m;
  m.f_tilde = ScalarFunction::power(2.0 / 3.0);
  m.alpha = 0.5987;
  m.u0 = AttributeMap::exp();
  m.lipschitz_M = std::exp(-2.0 / 3.0) / 9.0;
  m.prior_u = Distribution::uniform(0.0, 1.0);
  m.attr_domain = {0.0, 1.0};
  return m;
}

LawSchoolScm law_semisynthetic() {
  LawSchoolScm m;
  m.wG_K = 1.0;
  m.wG_R = 0.4;
  m.wG_S = 0.1;
  m.bG = 3.0;
  m.sigmaG = 0.4;
  m.wL_K = 0.2;
  m.wL_R = 0.15;
  m.wL_S = 0.05;
  m.bL = 3.5;
  m.wF_K = 0.8;
  m.wF_R = 0.3;
  m.wF_S = 0.1;
  m.attr_domain = {0.0, 1.0};
  return m;
}

LinearAdditiveScm linear_toy() {
  LinearAdditiveScm m;
  m.alpha = vec({1.0});
  m.beta = vec({1.0});
  m.w = vec({1.0});
  m.gamma = 1.0;
  m.prior_ux = {Distribution::uniform(0.0, 1.0)};
  m.prior_uy = Distribution::uniform(0.0, 1.0);
  m.attr_domain = {0.0, 1.0};
  return m;
}

MultiplicativeBinaryScm multiplicative_toy() {
  MultiplicativeBinaryScm m;
  m.alpha = vec({1.0});
  m.beta = vec({0.0});
  m.w = vec({1.0});
  m.gamma = 1.0;
  m.prior_ux = {Distribution::uniform(0.0, 1.0)};
  m.prior_uy = Distribution::uniform(0.0, 1.0);
  m.attr_domain = {1.0, 2.0};
  return m;
}

}  // namespace lcf::presets
