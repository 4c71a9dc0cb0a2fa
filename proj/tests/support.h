#pragma once

#include <random>

#include "lcf/presets.h"
#include "lcf/scm.h"

namespace lcf::testing {

inline ExogenousSample linear_sample(std::initializer_list<double> ux, double uy) {
  ExogenousSample u;
  u.ux = Vector(static_cast<Eigen::Index>(ux.size()));
  Eigen::Index i = 0;
  for (double v : ux) u.ux[i++] = v;
  u.uy = uy;
  return u;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Random linear-additive model with coefficients away from zero and a
// nonzero attribute effect.
inline LinearAdditiveScm random_linear(Rng& rng, int d) {
  std::uniform_real_distribution<double> pos(0.1, 1.5);
  std::uniform_real_distribution<double> any(-1.5, 1.5);
  LinearAdditiveScm m;
  m.alpha = Vector(d);
  m.beta = Vector(d);
  m.w = Vector(d);
  for (int i = 0; i < d; ++i) {
    m.alpha[i] = pos(rng);
    m.beta[i] = any(rng);
    m.w[i] = any(rng);
  }
  if (std::abs(m.w.dot(m.beta)) < 1e-3) m.beta[0] += 0.5;
  m.gamma = pos(rng);
  m.prior_ux.assign(d, Distribution::uniform(0.0, 1.0));
  m.attr_domain = {0.0, 1.0};
  return m;
}

inline ExogenousSample random_sample(Rng& rng, int d) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ExogenousSample u;
  u.ux = Vector(d);
  for (int i = 0; i < d; ++i) u.ux[i] = u01(rng);
  u.uy = u01(rng);
  return u;
}

}  // namespace lcf::testing
