#include "lcf/dataset.h"

#include <algorithm>
#include <numeric>
#include <random>

namespace lcf {

Eigen::Index Dataset::d() const {
  return records.empty() ? 0 : records.front().x.size();
}

void Dataset::validate() const {
  const Eigen::Index dim = d();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.x.size() != dim) {
      throw InvalidArgument("record " + std::to_string(i) +
                            " has a different feature count");
    }
    if (!attr_domain.empty() && !in_domain(attr_domain, r.a)) {
      throw InvalidArgument("record " + std::to_string(i) +
                            " has an attribute outside the domain");
    }
    if (!r.x.allFinite() || !std::isfinite(r.y)) {
      throw InvalidArgument("record " + std::to_string(i) + " is not finite");
    }
  }
  if (truth && truth->size() != records.size()) {
    throw InvalidArgument("exogenous truth does not match the record count");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.attr_domain = attr_domain;
  out.metadata = metadata;
  out.records.reserve(indices.size());
  if (truth) out.truth.emplace();
  for (std::size_t i : indices) {
    if (i >= records.size()) throw InvalidArgument("subset index out of range");
    out.records.push_back(records[i]);
    if (truth) out.truth->push_back((*truth)[i]);
  }
  return out;
}

Split make_split(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Fisher-Yates with an explicit draw so the order is the same on every
  // standard library.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  const std::size_t n_train = n * 6 / 10;
  const std::size_t n_val = n * 2 / 10;
  Split s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.validation.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  return s;
}

}  // namespace lcf
