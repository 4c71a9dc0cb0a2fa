#include "lcf/config.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lcf/data.h"
#include "lcf/presets.h"
#include "overloaded.h"

namespace lcf {
namespace {

using detail::Overloaded;

std::string field(const std::string& context, const std::string& key) {
  return context.empty() ? key : context + "." + key;
}

Json dist_to_json(const Distribution& d) {
  if (d.kind() == Distribution::Kind::kUniform) {
    return Json{{"kind", "uniform"}, {"lo", d.first()}, {"hi", d.second()}};
  }
  return Json{{"kind", "normal"}, {"mu", d.first()}, {"sigma", d.second()}};
}

Distribution dist_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  const std::string kind = get_string_or(j, "kind", "uniform", ctx);
  try {
    if (kind == "uniform") {
      return Distribution::uniform(get_number_or(j, "lo", 0.0, ctx),
                                   get_number_or(j, "hi", 1.0, ctx));
    }
    if (kind == "normal") {
      return Distribution::normal(get_number_or(j, "mu", 0.0, ctx),
                                  get_number_or(j, "sigma", 1.0, ctx));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
  throw ConfigError(field(ctx, "kind") + ": unknown distribution '" + kind + "'");
}

Json vec_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::vector<double> get_list(const Json& j, const std::string& key, const std::string& ctx) {
  const Vector v = get_vector(j, key, ctx);
  return std::vector<double>(v.data(), v.data() + v.size());
}

template <class Scm>
Json linear_like_to_json(const Scm& m, const char* family) {
  Json j;
  j["family"] = family;
  j["d"] = m.d();
  j["alpha"] = vec_to_json(m.alpha);
  j["beta"] = vec_to_json(m.beta);
  j["w"] = vec_to_json(m.w);
  j["gamma"] = m.gamma;
  j["attr_domain"] = m.attr_domain;
  Json pri = Json::array();
  for (const auto& p : m.prior_ux) pri.push_back(dist_to_json(p));
  j["prior_ux"] = pri;
  j["prior_uy"] = dist_to_json(m.prior_uy);
  return j;
}

template <class Scm>
Scm linear_like_from_json(const Json& j, const std::string& ctx) {
  Scm m;
  m.alpha = get_vector(j, "alpha", ctx);
  m.beta = get_vector(j, "beta", ctx);
  m.w = get_vector(j, "w", ctx);
  m.gamma = get_number(j, "gamma", ctx);
  if (j.contains("d")) {
    const double d = get_number(j, "d", ctx);
    if (d != static_cast<double>(m.alpha.size())) {
      throw ConfigError(field(ctx, "d") + ": does not match the length of alpha");
    }
  }
  m.attr_domain = get_list(j, "attr_domain", ctx);
  const auto d = static_cast<std::size_t>(m.alpha.size());
  if (j.contains("prior_ux")) {
    const Json& p = j["prior_ux"];
    if (p.is_array()) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        m.prior_ux.push_back(dist_from_json(p[i], field(ctx, "prior_ux") + "[" +
                                                      std::to_string(i) + "]"));
      }
    } else {
      m.prior_ux.assign(d, dist_from_json(p, field(ctx, "prior_ux")));
    }
  } else {
    m.prior_ux.assign(d, Distribution::uniform(0.0, 1.0));
  }
  if (j.contains("prior_uy")) m.prior_uy = dist_from_json(j["prior_uy"], field(ctx, "prior_uy"));
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
  return m;
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": JSON syntax error: " << e.what();
    throw ConfigError(os.str());
  }
}

Json load_json_file(const std::string& path) { return parse_json(read_text(path), path); }

double get_number(const Json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(field(ctx, key) + ": missing");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(field(ctx, key) + ": expected a number");
  return v.get<double>();
}

double get_number_or(const Json& j, const std::string& key, double fallback,
                     const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_number(j, key, ctx);
}

std::string get_string_or(const Json& j, const std::string& key,
                          const std::string& fallback, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(field(ctx, key) + ": expected a string");
  return v.get<std::string>();
}

Vector get_vector(const Json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(field(ctx, key) + ": missing");
  const Json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(field(ctx, key) + ": expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError(field(ctx, key) + "[" + std::to_string(i) + "]: expected a number");
    }
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Json scm_to_json(const StructuralModel& scm) {
  return std::visit(
      Overloaded{
          [](const LinearAdditiveScm& m) { return linear_like_to_json(m, "linear-additive"); },
          [](const MultiplicativeBinaryScm& m) {
            return linear_like_to_json(m, "multiplicative-binary");
          },
          [](const ScalarMonotoneScm& m) {
            if (m.f_tilde.name != "power" || (m.u0.name != "exp" && m.u0.name != "identity")) {
              throw ConfigError("scm: only power f_tilde and exp/identity u0 can be saved");
            }
            Json j;
            j["family"] = "scalar-monotone";
            j["f_tilde"] = Json{{"name", "power"}, {"exponent", m.f_tilde.exponent}};
            j["alpha"] = m.alpha;
            j["u0"] = m.u0.name;
            j["lipschitz_M"] = m.lipschitz_M;
            j["prior_u"] = dist_to_json(m.prior_u);
            j["attr_domain"] = m.attr_domain;
            return j;
          },
          [](const LawSchoolScm& m) {
            Json j;
            j["family"] = "law-school";
            j["wG_K"] = m.wG_K;
            j["wG_R"] = m.wG_R;
            j["wG_S"] = m.wG_S;
            j["bG"] = m.bG;
            j["sigmaG"] = m.sigmaG;
            j["wL_K"] = m.wL_K;
            j["wL_R"] = m.wL_R;
            j["wL_S"] = m.wL_S;
            j["bL"] = m.bL;
            j["wF_K"] = m.wF_K;
            j["wF_R"] = m.wF_R;
            j["wF_S"] = m.wF_S;
            j["attr_domain"] = m.attr_domain;
            return j;
          }},
      scm);
}

StructuralModel scm_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  if (j.contains("preset")) {
    const std::string p = get_string_or(j, "preset", "", ctx);
    GenSpec g;
    g.preset = p;
    if (p == "linear-toy") return presets::linear_toy();
    if (p == "multiplicative-toy") return presets::multiplicative_toy();
    try {
      return gen_model(g);
    } catch (const InvalidArgument& e) {
      throw ConfigError(field(ctx, "preset") + ": " + e.what());
    }
  }
  const std::string family = get_string_or(j, "family", "", ctx);
  if (family == "linear-additive") return linear_like_from_json<LinearAdditiveScm>(j, ctx);
  if (family == "multiplicative-binary") {
    return linear_like_from_json<MultiplicativeBinaryScm>(j, ctx);
  }
  if (family == "scalar-monotone") {
    ScalarMonotoneScm m;
    const std::string fctx = field(ctx, "f_tilde");
    if (!j.contains("f_tilde")) throw ConfigError(fctx + ": missing");
    const Json& f = j["f_tilde"];
    if (get_string_or(f, "name", "power", fctx) != "power") {
      throw ConfigError(field(fctx, "name") + ": only 'power' is supported");
    }
    try {
      m.f_tilde = ScalarFunction::power(get_number(f, "exponent", fctx));
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError(field(fctx, "exponent") + ": " + e.what());
    }
    m.alpha = get_number(j, "alpha", ctx);
    const std::string u0 = get_string_or(j, "u0", "exp", ctx);
    if (u0 == "exp") {
      m.u0 = AttributeMap::exp();
    } else if (u0 == "identity") {
      m.u0 = AttributeMap::identity();
    } else {
      throw ConfigError(field(ctx, "u0") + ": expected 'exp' or 'identity'");
    }
    m.lipschitz_M = get_number(j, "lipschitz_M", ctx);
    if (j.contains("prior_u")) m.prior_u = dist_from_json(j["prior_u"], field(ctx, "prior_u"));
    m.attr_domain = get_list(j, "attr_domain", ctx);
    try {
      m.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
    return m;
  }
  if (family == "law-school") {
    LawSchoolScm m;
    m.wG_K = get_number(j, "wG_K", ctx);
    m.wG_R = get_number(j, "wG_R", ctx);
    m.wG_S = get_number(j, "wG_S", ctx);
    m.bG = get_number(j, "bG", ctx);
    m.sigmaG = get_number(j, "sigmaG", ctx);
    m.wL_K = get_number(j, "wL_K", ctx);
    m.wL_R = get_number(j, "wL_R", ctx);
    m.wL_S = get_number(j, "wL_S", ctx);
    m.bL = get_number(j, "bL", ctx);
    m.wF_K = get_number(j, "wF_K", ctx);
    m.wF_R = get_number(j, "wF_R", ctx);
    m.wF_S = get_number(j, "wF_S", ctx);
    if (j.contains("attr_domain")) m.attr_domain = get_list(j, "attr_domain", ctx);
    try {
      m.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
    return m;
  }
  throw ConfigError(field(ctx, "family") + ": unknown family '" + family + "'");
}

Json predictor_to_json(const PredictorSpec& spec) {
  Json j;
  j["variant"] = variant_name(spec);
  std::visit(Overloaded{[&](const Unfair& s) {
                          j["theta"] = vec_to_json(s.theta);
                          j["c"] = s.c;
                        },
                        [&](const CfBaseline& s) {
                          j["phi"] = vec_to_json(s.phi);
                          j["c"] = s.c;
                        },
                        [&](const LcfQuadratic& s) {
                          j["p1"] = s.p1;
                          j["p2"] = s.p2;
                          j["p3"] = s.p3;
                          j["theta"] = vec_to_json(s.theta);
                        },
                        [&](const PowerG& s) {
                          j["p1"] = s.p1;
                          j["p2"] = s.p2;
                          j["p3"] = s.p3;
                          j["exponent"] = s.exponent;
                          j["theta"] = vec_to_json(s.theta);
                        },
                        [&](const ScalarQuadratic& s) {
                          j["p1"] = s.p1;
                          j["p2"] = s.p2;
                          j["theta"] = s.theta;
                        },
                        [&](const MultiplicativeConvex& s) {
                          j["p1"] = s.p1;
                          j["p2"] = s.p2;
                          j["p3"] = s.p3;
                        }},
             spec);
  return j;
}

PredictorSpec predictor_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  const std::string v = get_string_or(j, "variant", "", ctx);
  auto theta_or_empty = [&]() {
    return j.contains("theta") ? get_vector(j, "theta", ctx) : Vector();
  };
  PredictorSpec spec;
  if (v == "unfair") {
    spec = Unfair{get_vector(j, "theta", ctx), get_number_or(j, "c", 0.0, ctx)};
  } else if (v == "cf-baseline") {
    spec = CfBaseline{get_vector(j, "phi", ctx), get_number_or(j, "c", 0.0, ctx)};
  } else if (v == "lcf-quadratic") {
    spec = LcfQuadratic{get_number(j, "p1", ctx), get_number_or(j, "p2", 0.0, ctx),
                        get_number_or(j, "p3", 0.0, ctx), theta_or_empty()};
  } else if (v == "power-g") {
    spec = PowerG{get_number(j, "p1", ctx), get_number_or(j, "p2", 0.0, ctx),
                  get_number_or(j, "p3", 0.0, ctx), get_number_or(j, "exponent", 1.5, ctx),
                  theta_or_empty()};
  } else if (v == "scalar-quadratic") {
    spec = ScalarQuadratic{get_number(j, "p1", ctx), get_number_or(j, "p2", 0.0, ctx),
                           get_number_or(j, "theta", 0.0, ctx)};
  } else if (v == "multiplicative-convex") {
    spec = MultiplicativeConvex{get_number(j, "p1", ctx), get_number_or(j, "p2", 0.0, ctx),
                                get_number_or(j, "p3", 0.0, ctx)};
  } else {
    throw ConfigError(field(ctx, "variant") + ": unknown variant '" + v + "'");
  }
  try {
    validate(spec);
  } catch (const InvalidArgument& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
  return spec;
}

}  // namespace lcf
