#pragma once

#include <random>
#include <string>

namespace lcf {

using Rng = std::mt19937_64;

// Prior specification for one exogenous coordinate. Only the two families
// the experiments need are supported.
class Distribution {
 public:
  enum class Kind { kUniform, kNormal };

  static Distribution uniform(double lo, double hi);
  static Distribution normal(double mu, double sigma);

  Kind kind() const { return kind_; }
  // Uniform: (lo, hi). Normal: (mu, sigma).
  double first() const { return a_; }
  double second() const { return b_; }

  double sample(Rng& rng) const;
  double mean() const;
  double variance() const;
  // Interval holding (essentially) all prior mass: exact for uniform,
  // mu ± 6 sigma for normal.
  std::pair<double, double> support() const;

  std::string describe() const;
  bool operator==(const Distribution&) const = default;

 private:
  Distribution(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_;
  double b_;
};

// Uniform on the open interval (0, 1).
double open_unit_uniform(Rng& rng);

}  // namespace lcf
