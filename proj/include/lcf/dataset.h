#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcf/common.h"
#include "lcf/scm.h"

namespace lcf {

struct Record {
  Vector x;
  Attribute a = 0.0;
  double y = 0.0;
};

struct Dataset {
  std::vector<Record> records;
  std::vector<std::string> feature_names;
  std::vector<Attribute> attr_domain;
  // Free-form notes such as attribute encodings or skip counts.
  std::map<std::string, std::string> metadata;
  // True exogenous draws, present for generated data only.
  std::optional<std::vector<ExogenousSample>> truth;

  std::size_t size() const { return records.size(); }
  Eigen::Index d() const;
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then 60/20/20.
Split make_split(std::size_t n, std::uint64_t seed);

}  // namespace lcf
