#include "lcf/distribution.h"

#include <cmath>
#include <sstream>

#include "lcf/common.h"

namespace lcf {

Distribution Distribution::uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("uniform prior needs finite lo < hi");
  }
  return Distribution(Kind::kUniform, lo, hi);
}

Distribution Distribution::normal(double mu, double sigma) {
  if (!(sigma > 0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
    throw InvalidArgument("normal prior needs finite mu and sigma > 0");
  }
  return Distribution(Kind::kNormal, mu, sigma);
}

double Distribution::sample(Rng& rng) const {
  if (kind_ == Kind::kUniform) {
    return a_ + (b_ - a_) * open_unit_uniform(rng);
  }
  std::normal_distribution<double> dist(a_, b_);
  return dist(rng);
}

double Distribution::mean() const {
  return kind_ == Kind::kUniform ? 0.5 * (a_ + b_) : a_;
}

double Distribution::variance() const {
  if (kind_ == Kind::kUniform) {
    const double w = b_ - a_;
    return w * w / 12.0;
  }
  return b_ * b_;
}

std::pair<double, double> Distribution::support() const {
  if (kind_ == Kind::kUniform) return {a_, b_};
  return {a_ - 6.0 * b_, a_ + 6.0 * b_};
}

std::string Distribution::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::kUniform) {
    os << "Uniform(" << a_ << ", " << b_ << ")";
  } else {
    os << "Normal(" << a_ << ", " << b_ << ")";
  }
  return os.str();
}

double open_unit_uniform(Rng& rng) {
  // 53 random bits, shifted off zero.
  const double v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return v + 0x1.0p-54;
}

}  // namespace lcf
