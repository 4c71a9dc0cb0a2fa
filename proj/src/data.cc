#include "lcf/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lcf/presets.h"
#include "overloaded.h"

namespace lcf {
namespace {

using detail::Overloaded;

constexpr std::uint64_t kStreamGen = 3;
constexpr std::size_t kMaxSkipReasons = 5;

Attribute draw_attribute(const std::vector<Attribute>& domain,
                         const std::vector<double>& probs, Rng& rng) {
  const double v = open_unit_uniform(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    acc += probs.empty() ? 1.0 / static_cast<double>(domain.size()) : probs[i];
    if (v < acc) return domain[i];
  }
  return domain.back();
}

ExogenousSample draw_exogenous(const StructuralModel& scm, Rng& rng, double race_p) {
  ExogenousSample u;
  std::visit(
      Overloaded{
          [&](const LinearAdditiveScm& m) {
            u.ux = Vector(m.d());
            for (Eigen::Index i = 0; i < m.d(); ++i) u.ux[i] = m.prior_ux[i].sample(rng);
            u.uy = m.prior_uy.sample(rng);
          },
          [&](const MultiplicativeBinaryScm& m) {
            u.ux = Vector(m.d());
            for (Eigen::Index i = 0; i < m.d(); ++i) u.ux[i] = m.prior_ux[i].sample(rng);
            u.uy = m.prior_uy.sample(rng);
          },
          [&](const ScalarMonotoneScm& m) { u.ux = Vector::Constant(1, m.prior_u.sample(rng)); },
          [&](const LawSchoolScm&) {
            std::normal_distribution<double> z(0.0, 1.0);
            u.ux = Vector::Constant(1, z(rng));
            const double r = open_unit_uniform(rng) < race_p ? 1.0 : 0.0;
            u.context = Vector::Constant(1, r);
            u.noise = Vector(3);
            u.noise[0] = z(rng);
            u.noise[1] = open_unit_uniform(rng);
            u.noise[2] = z(rng);
          }},
      scm);
  return u;
}

std::vector<std::string> feature_names_for(const StructuralModel& scm, Eigen::Index d) {
  if (std::holds_alternative<LawSchoolScm>(scm)) return {"race", "ugpa", "lsat"};
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < d; ++i) out.push_back("x" + std::to_string(i + 1));
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  out.push_back(trim(cell));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::logic_error&) {
    return std::nullopt;
  }
}

// Column whose values are either all numeric or get integer codes in
// sorted order of the distinct strings.
struct ColumnCoder {
  bool categorical = false;
  std::map<std::string, double> codes;
};

ColumnCoder make_coder(const std::vector<std::vector<std::string>>& rows, std::size_t col) {
  ColumnCoder c;
  std::set<std::string> distinct;
  std::size_t numeric = 0, text = 0;
  for (const auto& r : rows) {
    if (col >= r.size() || r[col].empty()) continue;
    if (parse_number(r[col])) {
      ++numeric;
    } else {
      ++text;
      distinct.insert(r[col]);
    }
  }
  // Mostly numbers: stray text cells are bad values, not categories.
  c.categorical = text > numeric;
  if (c.categorical) {
    double code = 0.0;
    for (const auto& s : distinct) c.codes[s] = code++;
  }
  return c;
}

std::optional<double> encode(const ColumnCoder& c, const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (!c.categorical) return parse_number(s);
  auto it = c.codes.find(s);
  if (it == c.codes.end()) return std::nullopt;
  return it->second;
}

std::string describe_codes(const ColumnCoder& c) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : c.codes) {
    os << (first ? "" : ";") << k << "=" << v;
    first = false;
  }
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void GenSpec::validate() const {
  if (n < 1) throw InvalidArgument("gen: n must be >= 1");
  static const std::set<std::string> known{"appendix-b", "multiplicative-f", "scalar-e",
                                           "law-semisynthetic", "custom"};
  if (!known.count(preset)) throw InvalidArgument("gen: unknown preset '" + preset + "'");
  if (preset == "custom" && !scm) throw InvalidArgument("gen: custom preset needs a model");
  if (!attr_probs.empty()) {
    double sum = 0.0;
    for (double p : attr_probs) {
      if (!(p >= 0.0)) throw InvalidArgument("gen: attribute probabilities must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("gen: attribute probabilities must sum to 1");
  }
  if (!(race_p >= 0.0 && race_p <= 1.0)) throw InvalidArgument("gen: race_p must be in [0, 1]");
}

StructuralModel gen_model(const GenSpec& spec) {
  if (spec.scm) return *spec.scm;
  if (spec.preset == "appendix-b") return presets::appendix_b();
  if (spec.preset == "multiplicative-f") return presets::multiplicative_f();
  if (spec.preset == "scalar-e") return presets::scalar_e();
  if (spec.preset == "law-semisynthetic") return presets::law_semisynthetic();
  throw InvalidArgument("gen: unknown preset '" + spec.preset + "'");
}

Dataset gen_synthetic(const GenSpec& spec) {
  spec.validate();
  const StructuralModel scm = gen_model(spec);
  validate(scm);
  const auto& domain = attribute_domain(scm);
  if (!spec.attr_probs.empty() && spec.attr_probs.size() != domain.size()) {
    throw InvalidArgument("gen: need one probability per attribute value");
  }
  Dataset data;
  data.records.resize(spec.n);
  data.truth.emplace(spec.n);
  parallel_for(spec.n, [&](std::size_t i) {
    Rng rng(derive_seed(spec.seed, kStreamGen, i));
    const Attribute a = draw_attribute(domain, spec.attr_probs, rng);
    ExogenousSample u = draw_exogenous(scm, rng, spec.race_p);
    const Outcome out = forward(scm, u, a);
    data.records[i] = Record{out.x, a, out.y};
    (*data.truth)[i] = std::move(u);
  });
  data.attr_domain = domain;
  data.feature_names = feature_names_for(scm, data.d());
  data.metadata["preset"] = spec.preset;
  data.metadata["family"] = family_name(scm);
  data.metadata["seed"] = std::to_string(spec.seed);
  return data;
}

CsvSchema parse_schema(const std::string& s) {
  if (s == "generic" || s == "generic-xay") return CsvSchema::kGeneric;
  if (s == "law") return CsvSchema::kLaw;
  if (s == "loan") return CsvSchema::kLoan;
  throw InvalidArgument("unknown CSV schema '" + s + "' (generic, law, loan)");
}

Dataset load_csv(const std::string& path, CsvSchema schema, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw IoError("'" + path + "' is empty");
  }
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  auto need = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw IoError("'" + path + "': missing column '" + name + "'");
    return it->second;
  };

  std::vector<std::size_t> x_cols;
  std::size_t a_col = 0, y_col = 0;
  std::vector<std::string> names;
  std::vector<std::size_t> integer_cols;  // rounded to integers (law lsat)
  switch (schema) {
    case CsvSchema::kGeneric: {
      for (int i = 1;; ++i) {
        auto it = col.find("x" + std::to_string(i));
        if (it == col.end()) break;
        x_cols.push_back(it->second);
        names.push_back(it->first);
      }
      if (x_cols.empty()) throw IoError("'" + path + "': missing column 'x1'");
      a_col = need("a");
      y_col = need("y");
      break;
    }
    case CsvSchema::kLaw:
      a_col = need("sex");
      x_cols = {need("race"), need("ugpa"), need("lsat")};
      names = {"race", "ugpa", "lsat"};
      y_col = need("fya");
      integer_cols = {need("lsat")};
      break;
    case CsvSchema::kLoan:
      a_col = need("gender");
      x_cols = {need("income"), need("coapp_income"), need("married"), need("area")};
      names = {"income", "coapp_income", "married", "area"};
      y_col = need("amount");
      break;
  }

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv(line));
  }
  if (rows.empty()) throw IoError("'" + path + "' has a header but no rows");

  const ColumnCoder a_coder = make_coder(rows, a_col);
  std::vector<ColumnCoder> x_coders;
  for (std::size_t c : x_cols) x_coders.push_back(make_coder(rows, c));
  ColumnCoder y_coder;  // outcome stays numeric

  LoadReport rep;
  Dataset data;
  data.feature_names = names;
  std::set<Attribute> domain;
  std::size_t rounded = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ++rep.rows_read;
    const auto& row = rows[r];
    auto skip = [&](const std::string& why) {
      ++rep.rows_skipped;
      if (rep.skip_reasons.size() < kMaxSkipReasons) {
        rep.skip_reasons.push_back("line " + std::to_string(r + 2) + ": " + why);
      }
    };
    if (row.size() != header.size()) {
      skip("expected " + std::to_string(header.size()) + " fields");
      continue;
    }
    Record rec;
    rec.x = Vector(static_cast<Eigen::Index>(x_cols.size()));
    bool ok = true;
    for (std::size_t j = 0; j < x_cols.size() && ok; ++j) {
      auto v = encode(x_coders[j], row[x_cols[j]]);
      if (!v) {
        skip("bad value in column '" + header[x_cols[j]] + "'");
        ok = false;
        break;
      }
      if (std::find(integer_cols.begin(), integer_cols.end(), x_cols[j]) != integer_cols.end() &&
          std::floor(*v) != *v) {
        v = std::round(*v);
        ++rounded;
      }
      rec.x[static_cast<Eigen::Index>(j)] = *v;
    }
    if (!ok) continue;
    const auto a = encode(a_coder, row[a_col]);
    const auto y = encode(y_coder, row[y_col]);
    if (!a) {
      skip("bad value in column '" + header[a_col] + "'");
      continue;
    }
    if (!y) {
      skip("bad value in column '" + header[y_col] + "'");
      continue;
    }
    rec.a = *a;
    rec.y = *y;
    domain.insert(rec.a);
    data.records.push_back(std::move(rec));
  }
  if (rep.rows_skipped * 2 > rep.rows_read) {
    std::ostringstream os;
    os << "'" << path << "': " << rep.rows_skipped << " of " << rep.rows_read
       << " rows skipped, aborting";
    for (const auto& s : rep.skip_reasons) os << "\n  " << s;
    throw IoError(os.str());
  }
  data.attr_domain.assign(domain.begin(), domain.end());
  data.metadata["source"] = path;
  data.metadata["rows_skipped"] = std::to_string(rep.rows_skipped);
  if (a_coder.categorical) data.metadata["attribute_codes"] = describe_codes(a_coder);
  for (std::size_t j = 0; j < x_cols.size(); ++j) {
    if (x_coders[j].categorical) {
      data.metadata[names[j] + "_codes"] = describe_codes(x_coders[j]);
    }
  }
  if (rounded) data.metadata["lsat_rounded"] = std::to_string(rounded);
  if (report) *report = rep;
  return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
  auto out = open_out(path);
  const Eigen::Index d = data.d();
  for (Eigen::Index i = 0; i < d; ++i) out << 'x' << i + 1 << ',';
  out << "a,y\n";
  for (const auto& r : data.records) {
    for (Eigen::Index i = 0; i < d; ++i) out << format_double(r.x[i]) << ',';
    out << format_double(r.a) << ',' << format_double(r.y) << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

Dataset load_dataset(const std::string& path) {
  LoadReport rep;
  Dataset d = load_csv(path, CsvSchema::kGeneric, &rep);
  if (rep.rows_skipped) {
    throw IoError("'" + path + "': " + std::to_string(rep.rows_skipped) +
                  " malformed rows in a saved dataset");
  }
  d.metadata.erase("rows_skipped");
  return d;
}

void save_reports(const std::vector<EvalReport>& reports, const std::string& path) {
  auto out = open_out(path);
  out << EvalReport::csv_header() << '\n';
  for (const auto& r : reports) out << r.csv_row() << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<EvalReport> load_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != EvalReport::csv_header()) {
    throw IoError("'" + path + "': unexpected report header");
  }
  std::vector<EvalReport> out;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(EvalReport::from_csv_row(line));
  }
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace lcf
