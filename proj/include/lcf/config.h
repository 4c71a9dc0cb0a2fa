#pragma once

#include <string>

#include "json.hpp"
#include "lcf/predictors.h"
#include "lcf/scm.h"

namespace lcf {

using Json = nlohmann::json;

// Malformed configuration; the message names the offending field (and the
// line and column for syntax errors).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

Json parse_json(const std::string& text, const std::string& source);
Json load_json_file(const std::string& path);

Json scm_to_json(const StructuralModel& scm);
// Accepts either a full description or {"preset": "appendix-b"} etc.
StructuralModel scm_from_json(const Json& j, const std::string& context = "scm");

Json predictor_to_json(const PredictorSpec& spec);
PredictorSpec predictor_from_json(const Json& j, const std::string& context = "predictor");

// Typed field access with field-path error messages.
double get_number(const Json& j, const std::string& key, const std::string& context);
double get_number_or(const Json& j, const std::string& key, double fallback,
                     const std::string& context);
std::string get_string_or(const Json& j, const std::string& key,
                          const std::string& fallback, const std::string& context);
Vector get_vector(const Json& j, const std::string& key, const std::string& context);

}  // namespace lcf
