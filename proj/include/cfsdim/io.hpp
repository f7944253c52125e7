#pragma once

// JSON descriptors for systems, words and results, and a small CSV writer.
//   {"type":"cfs","fixed_points":[...],"ratios":[[...],...],"probabilities":[[...],...],"mode":"float"|"rational"}
//   {"type":"four_corner","gamma":[[..],[..]],"lambda":[[..],[..]],"probabilities":[p1,p2,p3,p4]}
// Rationals are "num/den" strings. Symbols are one-based [i,j] pairs.

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsdim/core.hpp"
#include "cfsdim/dimension.hpp"
#include "cfsdim/entropy.hpp"
#include "cfsdim/error.hpp"
#include "cfsdim/estimate.hpp"
#include "cfsdim/fourcorner.hpp"
#include "cfsdim/separation.hpp"
#include "cfsdim/symbolic.hpp"

namespace cfsdim {

using Json = nlohmann::ordered_json;

/// Explicit weights, or one of the keywords "uniform" / "natural".
struct ProbabilitySpec {
  std::optional<std::vector<double>> flat;
  std::string keyword = "uniform";
};

struct SystemDescriptor {
  std::string type;  // "cfs" or "four_corner"
  CFSystem cfs;
  FourCornerSystem four_corner;
  ProbabilitySpec probabilities;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

inline Rational parse_rational(const Json& v) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    try {
      const auto slash = s.find('/');
      if (slash == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
      const boost::multiprecision::cpp_int num(s.substr(0, slash)), den(s.substr(slash + 1));
      if (den == 0) parse_fail("zero denominator in \"" + s + "\"");
      return Rational(num, den);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      parse_fail("not a rational: \"" + s + "\"");
    }
  }
  parse_fail("rational mode expects integers or \"num/den\" strings, got " + v.dump());
}

inline double parse_real(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return static_cast<double>(parse_rational(v));
  parse_fail("expected a number, got " + v.dump());
}

inline const Json& require_key(const Json& obj, const char* key) {
  if (!obj.contains(key)) parse_fail(std::string("missing key \"") + key + "\"");
  return obj.at(key);
}

template <class T, class F>
std::vector<T> parse_array(const Json& v, F&& parse_one, const char* what) {
  if (!v.is_array()) parse_fail(std::string(what) + " must be an array");
  std::vector<T> out;
  for (const auto& x : v) out.push_back(parse_one(x));
  return out;
}

inline Matrix2 parse_matrix2(const Json& v, const char* what) {
  if (!v.is_array() || v.size() != 2) parse_fail(std::string(what) + " must be a 2x2 array");
  Matrix2 m{};
  for (std::size_t i = 0; i < 2; ++i) {
    if (!v[i].is_array() || v[i].size() != 2) parse_fail(std::string(what) + " must be a 2x2 array");
    for (std::size_t j = 0; j < 2; ++j) m[i][j] = parse_real(v[i][j]);
  }
  return m;
}

inline std::string rational_string(const Rational& q) {
  return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

}  // namespace detail

inline SystemDescriptor parse_system(const Json& j) {
  if (!j.is_object()) detail::parse_fail("system descriptor must be a JSON object");
  SystemDescriptor d;
  d.type = j.value("type", std::string("cfs"));
  if (d.type == "cfs") {
    const std::string mode = j.value("mode", std::string("float"));
    const Json& t = detail::require_key(j, "fixed_points");
    const Json& r = detail::require_key(j, "ratios");
    if (!r.is_array()) detail::parse_fail("ratios must be an array of arrays");
    if (mode == "rational") {
      auto fp = detail::parse_array<Rational>(t, detail::parse_rational, "fixed_points");
      std::vector<std::vector<Rational>> ratios;
      for (const auto& g : r) ratios.push_back(detail::parse_array<Rational>(g, detail::parse_rational, "ratio group"));
      d.cfs = CFSystem(std::move(fp), std::move(ratios));
    } else if (mode == "float") {
      auto fp = detail::parse_array<double>(t, detail::parse_real, "fixed_points");
      std::vector<std::vector<double>> ratios;
      for (const auto& g : r) ratios.push_back(detail::parse_array<double>(g, detail::parse_real, "ratio group"));
      d.cfs = CFSystem(std::move(fp), std::move(ratios));
    } else {
      detail::parse_fail("mode must be \"float\" or \"rational\"");
    }
  } else if (d.type == "four_corner") {
    d.four_corner.gamma = detail::parse_matrix2(detail::require_key(j, "gamma"), "gamma");
    d.four_corner.lambda = detail::parse_matrix2(detail::require_key(j, "lambda"), "lambda");
  } else {
    detail::parse_fail("unknown system type \"" + d.type + "\"");
  }
  if (j.contains("probabilities")) {
    const Json& p = j.at("probabilities");
    if (p.is_string()) {
      d.probabilities.keyword = p.get<std::string>();
      if (d.probabilities.keyword != "uniform" && d.probabilities.keyword != "natural")
        detail::parse_fail("probabilities keyword must be \"uniform\" or \"natural\"");
    } else if (p.is_array()) {
      std::vector<double> flat;
      for (const auto& x : p) {
        if (x.is_array())
          for (const auto& y : x) flat.push_back(detail::parse_real(y));
        else
          flat.push_back(detail::parse_real(x));
      }
      d.probabilities.flat = std::move(flat);
      d.probabilities.keyword.clear();
    } else {
      detail::parse_fail("probabilities must be an array or a keyword");
    }
  }
  return d;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

inline SystemDescriptor load_system(const std::string& path) { return parse_system(read_json_file(path)); }

/// Parses a probabilities override given on the command line: a keyword or a JSON array.
inline ProbabilitySpec parse_probability_spec(const std::string& text) {
  if (text == "uniform" || text == "natural") return {std::nullopt, text};
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("probabilities: ") + e.what());
  }
  Json wrapper = {{"type", "four_corner"}, {"gamma", {{0.5, 0.5}, {0.5, 0.5}}}, {"lambda", {{0.5, 0.5}, {0.5, 0.5}}},
                  {"probabilities", j}};
  return parse_system(wrapper).probabilities;
}

/// Ragged probabilities for a CFS; "natural" is not defined there.
inline ProbVector resolve_probabilities(const CFSystem& sys, const ProbabilitySpec& spec) {
  if (!spec.flat) {
    if (spec.keyword == "uniform") return ProbVector::uniform(sys);
    throw Error(ErrorCode::InvalidProbability, "\"" + spec.keyword + "\" probabilities are not defined for this system");
  }
  if (spec.flat->size() != sys.symbol_count())
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(sys.symbol_count()) + " probabilities");
  std::vector<std::vector<double>> w;
  std::size_t k = 0;
  for (std::size_t g = 0; g < sys.group_count(); ++g) {
    auto& row = w.emplace_back();
    for (std::size_t j = 0; j < sys.group_size(g); ++j) row.push_back((*spec.flat)[k++]);
  }
  return ProbVector(std::move(w));
}

inline FourCornerProb resolve_probabilities(const FourCornerSystem& sys, const ProbabilitySpec& spec) {
  if (!spec.flat) {
    if (spec.keyword == "uniform") return {0.25, 0.25, 0.25, 0.25};
    return natural_p(sys).p;
  }
  if (spec.flat->size() != 4) throw Error(ErrorCode::ShapeMismatch, "four-corner systems take four probabilities");
  FourCornerProb p{};
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    p[i] = (*spec.flat)[i];
    if (!(p[i] >= 0.0) || !std::isfinite(p[i]))
      throw Error(ErrorCode::InvalidProbability, "probabilities must be finite and nonnegative");
    total += p[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidProbability, "probabilities must sum to 1");
  return p;
}

inline Json to_json(const CFSystem& sys) {
  Json j;
  j["type"] = "cfs";
  j["mode"] = sys.is_exact() ? "rational" : "float";
  if (sys.is_exact()) {
    Json t = Json::array(), r = Json::array();
    for (const auto& q : sys.exact_fixed_points()) t.push_back(detail::rational_string(q));
    for (const auto& g : sys.exact_ratios()) {
      Json row = Json::array();
      for (const auto& q : g) row.push_back(detail::rational_string(q));
      r.push_back(row);
    }
    j["fixed_points"] = t;
    j["ratios"] = r;
  } else {
    j["fixed_points"] = sys.fixed_points();
    j["ratios"] = sys.ratios();
  }
  return j;
}

inline Json to_json(const CFSystem& sys, const ProbVector& p) {
  Json j = to_json(sys);
  j["probabilities"] = p.weights();
  return j;
}

inline Json to_json(const FourCornerSystem& sys) {
  Json j;
  j["type"] = "four_corner";
  j["gamma"] = {{sys.gamma[0][0], sys.gamma[0][1]}, {sys.gamma[1][0], sys.gamma[1][1]}};
  j["lambda"] = {{sys.lambda[0][0], sys.lambda[0][1]}, {sys.lambda[1][0], sys.lambda[1][1]}};
  return j;
}

inline Json word_to_json(const Word& w) {
  Json j = Json::array();
  for (const Symbol& s : w) j.push_back({s.group + 1, s.member + 1});
  return j;
}

inline Word word_from_json(const Json& j) {
  if (!j.is_array()) detail::parse_fail("a word must be an array of [i,j] pairs");
  Word w;
  for (const auto& s : j) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer())
      detail::parse_fail("a symbol must be an [i,j] pair of positive integers");
    const int g = s[0].get<int>(), m = s[1].get<int>();
    if (g < 1 || m < 1) detail::parse_fail("symbols are one-based");
    w.push_back({g - 1, m - 1});
  }
  return w;
}

inline Json signature_to_json(const BlockSignature& sig) {
  Json j = Json::array();
  for (const auto& b : sig.blocks) j.push_back({{"group", b.group + 1}, {"counts", b.counts}});
  return j;
}

/// Non-finite doubles become null.
inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const DimensionReport& r) {
  Json j;
  j["dimension"] = number(r.dimension);
  j["raw"] = number(r.raw);
  j["method"] = r.method;
  j["tolerance"] = number(r.tolerance);
  j["flags"] = r.flags;
  Json d = Json::object();
  for (const auto& [k, v] : r.diagnostics) d[k] = number(v);
  j["diagnostics"] = d;
  return j;
}

inline Json to_json(const PhiResult& r) {
  Json j;
  j["value"] = number(r.value);
  j["method"] = r.method;
  if (r.method == "monte-carlo") {
    j["stderr"] = number(r.stderr_);
    j["samples"] = r.terms_used;
  } else {
    j["tail_bound"] = number(r.tail_bound);
    j["terms"] = r.terms_used;
  }
  return j;
}

inline Json to_json(const SeparationReport& r) {
  Json j;
  j["n"] = r.depth;
  j["classes"] = r.class_count;
  j["buckets"] = r.bucket_count;
  j["pairs"] = r.pairs_compared;
  j["min_gap"] = number(r.min_gap);
  if (r.exact_min_gap) j["exact_min_gap"] = detail::rational_string(*r.exact_min_gap);
  j["implied_b"] = number(r.implied_b);
  j["status"] = to_string(r.status);
  j["identity_holds"] = r.identity_holds;
  if (r.witness) {
    j["witness"] = {{"first", word_to_json(r.witness->first_word)},
                    {"second", word_to_json(r.witness->second_word)},
                    {"first_signature", signature_to_json(r.witness->first)},
                    {"second_signature", signature_to_json(r.witness->second)}};
  }
  return j;
}

inline Json to_json(const ScalingFit& f) {
  Json j;
  j["scales"] = f.scales;
  Json counts = Json::array();
  for (double c : f.counts) counts.push_back(number(c));
  j["counts"] = counts;
  if (!f.lower_counts.empty()) j["lower_counts"] = f.lower_counts;
  j["slope"] = number(f.slope);
  j["upper_slope"] = number(f.upper_slope);
  j["lower_slope"] = number(f.lower_slope);
  j["intercept"] = number(f.intercept);
  j["r2"] = number(f.r2);
  j["stderr"] = number(f.stderr_);
  j["window"] = {f.window.first, f.window.second};
  return j;
}

/// Comma-separated rows; fields containing commas or quotes are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out_ << ',';
      out_ << escape(fields[k]);
    }
    out_ << '\n';
  }

  static std::string field(double x) {
    if (!std::isfinite(x)) return "";
    std::ostringstream s;
    s.precision(std::numeric_limits<double>::max_digits10);
    s << x;
    return s.str();
  }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

  std::ostream& out_;
};

}  // namespace cfsdim
