#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "recovery.hpp"
#include "spaces.hpp"
#include "vector.hpp"
#include "weights.hpp"

namespace whlab::io {

using json = nlohmann::json;

inline std::string fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Shortest round-trip decimal for a double.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// ---------------------------------------------------------------- JSON access with pointers

inline std::string child(const std::string& ptr, const std::string& key) {
  std::string k;
  for (char c : key) {
    if (c == '~') k += "~0";
    else if (c == '/') k += "~1";
    else k += c;
  }
  return ptr + "/" + k;
}

inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

inline void require_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
}

inline void reject_unknown(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
  require_object(obj, ptr);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(child(ptr, it.key()), "unknown field");
  }
}

inline const json& require(const json& obj, const std::string& key, const std::string& ptr) {
  require_object(obj, ptr);
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(child(ptr, key), "required field is missing");
  return *it;
}

struct Range {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  static Range positive() { return {0.0, std::numeric_limits<double>::infinity(), true}; }
  static Range at_least(double v) { return {v, std::numeric_limits<double>::infinity(), false}; }
};

inline double as_number(const json& j, const std::string& ptr, Range r = {}) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
  if (v < r.lo || (r.lo_open && v == r.lo) || v > r.hi) {
    std::ostringstream os;
    os << "value " << v << " outside " << (r.lo_open ? "(" : "[") << r.lo << ", " << r.hi << "]";
    throw ConfigError(ptr, os.str());
  }
  return v;
}

inline double number(const json& obj, const std::string& key, const std::string& ptr, std::optional<double> def,
                     Range r = {}) {
  require_object(obj, ptr);
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (!def) throw ConfigError(child(ptr, key), "required field is missing");
    return *def;
  }
  return as_number(*it, child(ptr, key), r);
}

inline long long integer(const json& obj, const std::string& key, const std::string& ptr, std::optional<long long> def,
                         long long lo, long long hi) {
  require_object(obj, ptr);
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (!def) throw ConfigError(child(ptr, key), "required field is missing");
    return *def;
  }
  if (!it->is_number_integer()) throw ConfigError(child(ptr, key), "expected an integer");
  long long v = it->get<long long>();
  if (v < lo || v > hi) {
    std::ostringstream os;
    os << "value " << v << " outside [" << lo << ", " << hi << "]";
    throw ConfigError(child(ptr, key), os.str());
  }
  return v;
}

inline std::string string(const json& obj, const std::string& key, const std::string& ptr, std::optional<std::string> def,
                          std::initializer_list<const char*> choices = {}) {
  require_object(obj, ptr);
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (!def) throw ConfigError(child(ptr, key), "required field is missing");
    return *def;
  }
  if (!it->is_string()) throw ConfigError(child(ptr, key), "expected a string");
  std::string v = it->get<std::string>();
  if (choices.size() == 0) return v;
  std::string list;
  for (const char* c : choices) {
    if (v == c) return v;
    list += std::string(list.empty() ? "" : ", ") + c;
  }
  throw ConfigError(child(ptr, key), "unknown value \"" + v + "\"; expected one of " + list);
}

inline bool boolean(const json& obj, const std::string& key, const std::string& ptr, bool def) {
  require_object(obj, ptr);
  auto it = obj.find(key);
  if (it == obj.end()) return def;
  if (!it->is_boolean()) throw ConfigError(child(ptr, key), "expected true or false");
  return it->get<bool>();
}

inline std::vector<double> numbers(const json& obj, const std::string& key, const std::string& ptr,
                                   std::optional<std::vector<double>> def, Range r = {}) {
  require_object(obj, ptr);
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (!def) throw ConfigError(child(ptr, key), "required field is missing");
    return *def;
  }
  const std::string p = child(ptr, key);
  if (!it->is_array() || it->empty()) throw ConfigError(p, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < it->size(); ++i) out.push_back(as_number((*it)[i], child(p, i), r));
  return out;
}

// ---------------------------------------------------------------- families

inline const std::vector<std::pair<std::string, std::string>>& weight_families() {
  static const std::vector<std::pair<std::string, std::string>> f{
      {"constant", "c > 0 (default 1): omega(x) = c"},
      {"power", "alpha: omega(x) = (1 + x)^alpha"},
      {"exponential", "beta: omega(x) = e^{beta x}"},
      {"capped_exponential", "beta, cap > 0: omega(x) = e^{beta min(x, cap)}"},
      {"dyadic_zigzag", "beta: omega(x) = e^{beta s(x)}, s with slopes +-1 alternating on dyadic blocks"},
  };
  return f;
}

inline const std::vector<std::pair<std::string, std::string>>& kernel_families() {
  static const std::vector<std::pair<std::string, std::string>> f{
      {"gaussian", "center (0), width (1), amplitude (1), cutoff (9 widths)"},
      {"bump", "center (0), radius (1), amplitude (1): amplitude exp(-1/(1-u^2))"},
      {"mollified_delta", "center (0), width: unit-mass bump of total width"},
      {"file", "path: CSV with header x,re,im on a uniform grid with the config step"},
  };
  return f;
}

inline const std::vector<std::pair<std::string, std::string>>& orlicz_families() {
  static const std::vector<std::pair<std::string, std::string>> f{
      {"orlicz:power", "p >= 1: A(y) = y^p"},
      {"orlicz:exp", "A(y) = e^y - 1"},
      {"orlicz:ylog", "A(y) = y log(1 + y)"},
  };
  return f;
}

inline const std::vector<std::pair<std::string, std::string>>& operator_weight_families() {
  static const std::vector<std::pair<std::string, std::string>> f{
      {"scalar", "W = omega I with omega from space.weight"},
      {"mixed_growth_5x5", "5x5 matrix with entries 1, e^x, e^{3x}, 1+x, x, e^{2x}, x^2/2"},
      {"terms", "entries: d x d array of term lists [[c, k, beta], ...] meaning sum c x^k e^{beta x}"},
  };
  return f;
}

inline Weight parse_weight(const json& j, const std::string& ptr) {
  std::string fam = string(j, "family", ptr, std::nullopt,
                           {"constant", "power", "exponential", "capped_exponential", "dyadic_zigzag"});
  if (fam == "constant") {
    reject_unknown(j, ptr, {"family", "c"});
    return Weight::constant(number(j, "c", ptr, 1.0, Range::positive()));
  }
  if (fam == "power") {
    reject_unknown(j, ptr, {"family", "alpha"});
    return Weight::power(number(j, "alpha", ptr, std::nullopt));
  }
  if (fam == "exponential") {
    reject_unknown(j, ptr, {"family", "beta"});
    return Weight::exponential(number(j, "beta", ptr, std::nullopt));
  }
  if (fam == "capped_exponential") {
    reject_unknown(j, ptr, {"family", "beta", "cap"});
    return Weight::capped_exponential(number(j, "beta", ptr, std::nullopt), number(j, "cap", ptr, std::nullopt, Range::positive()));
  }
  reject_unknown(j, ptr, {"family", "beta"});
  return Weight::dyadic_zigzag(number(j, "beta", ptr, std::nullopt));
}

inline OrliczFunction parse_orlicz(const json& j, const std::string& ptr) {
  std::string fam = string(j, "family", ptr, std::nullopt, {"orlicz:power", "orlicz:exp", "orlicz:ylog"});
  if (fam == "orlicz:power") {
    reject_unknown(j, ptr, {"family", "p"});
    return OrliczFunction::power(number(j, "p", ptr, std::nullopt, Range::at_least(1.0)));
  }
  reject_unknown(j, ptr, {"family"});
  return fam == "orlicz:exp" ? OrliczFunction::exp() : OrliczFunction::ylog();
}

// CSV with header x,re,im; nodes must form a uniform grid with step h.
inline SampledFunction read_kernel_csv(const std::filesystem::path& path, double h, const std::string& ptr) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ptr, "cannot open kernel file " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("x,re,im", 0) != 0) throw ConfigError(ptr, "kernel file " + path.string() + " must start with the header x,re,im");
  std::vector<double> xs;
  CVec v;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x, re, im;
    char c1, c2;
    if (!(ls >> x >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',') {
      throw ConfigError(ptr, "kernel file " + path.string() + ": malformed row " + std::to_string(row));
    }
    xs.push_back(x);
    v.emplace_back(re, im);
  }
  if (xs.size() < 2) throw ConfigError(ptr, "kernel file " + path.string() + " needs at least two rows");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (std::abs(xs[i] - xs[i - 1] - h) > 1e-9 * std::max(1.0, h) * 1e3)
      throw ConfigError(ptr, "kernel file " + path.string() + ": nodes are not spaced by the grid step at row " + std::to_string(i + 2));
  double k = xs.front() / h;
  if (std::abs(k - std::round(k)) > 1e-6) throw ConfigError(ptr, "kernel file " + path.string() + ": first node is not a multiple of the step");
  return SampledFunction(Grid(std::round(k) * h, h, xs.size()), std::move(v));
}

inline SampledFunction parse_kernel(const json& j, const std::string& ptr, double h, const std::filesystem::path& base) {
  std::string fam = string(j, "family", ptr, std::nullopt, {"gaussian", "bump", "mollified_delta", "file"});
  if (fam == "gaussian") {
    reject_unknown(j, ptr, {"family", "center", "width", "amplitude", "cutoff"});
    return kernels::gaussian(h, number(j, "center", ptr, 0.0), number(j, "width", ptr, 1.0, Range::positive()),
                             number(j, "amplitude", ptr, 1.0), number(j, "cutoff", ptr, 9.0, Range::positive()));
  }
  if (fam == "bump") {
    reject_unknown(j, ptr, {"family", "center", "radius", "amplitude"});
    return kernels::bump(h, number(j, "center", ptr, 0.0), number(j, "radius", ptr, 1.0, Range::positive()),
                         number(j, "amplitude", ptr, 1.0));
  }
  if (fam == "mollified_delta") {
    reject_unknown(j, ptr, {"family", "center", "width"});
    return kernels::mollified_delta(h, number(j, "center", ptr, 0.0), number(j, "width", ptr, std::nullopt, Range::positive()));
  }
  reject_unknown(j, ptr, {"family", "path"});
  std::filesystem::path p = string(j, "path", ptr, std::nullopt);
  if (p.is_relative()) p = base / p;
  return read_kernel_csv(p, h, child(ptr, "path"));
}

inline OperatorWeight parse_operator_weight(const json& j, const std::string& ptr, const Weight& space_weight, std::size_t d) {
  std::string kind = string(j, "kind", ptr, std::nullopt, {"scalar", "mixed_growth_5x5", "terms"});
  if (kind == "scalar") {
    reject_unknown(j, ptr, {"kind"});
    return OperatorWeight::scalar(space_weight, d);
  }
  if (kind == "mixed_growth_5x5") {
    reject_unknown(j, ptr, {"kind"});
    if (d != 5) throw ConfigError(child(ptr, "kind"), "mixed_growth_5x5 needs d = 5");
    return OperatorWeight::mixed_growth_5x5();
  }
  reject_unknown(j, ptr, {"kind", "entries"});
  const json& e = require(j, "entries", ptr);
  const std::string ep = child(ptr, "entries");
  if (!e.is_array() || e.size() != d) throw ConfigError(ep, "expected " + std::to_string(d) + " rows");
  std::vector<std::vector<WeightTerm>> entries;
  for (std::size_t r = 0; r < d; ++r) {
    if (!e[r].is_array() || e[r].size() != d) throw ConfigError(child(ep, r), "expected " + std::to_string(d) + " entries");
    for (std::size_t c = 0; c < d; ++c) {
      const json& terms = e[r][c];
      const std::string tp = child(child(ep, r), c);
      if (!terms.is_array()) throw ConfigError(tp, "expected a list of [c, k, beta] terms");
      std::vector<WeightTerm> list;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string ttp = child(tp, t);
        if (!terms[t].is_array() || terms[t].size() != 3) throw ConfigError(ttp, "expected [c, k, beta]");
        if (!terms[t][1].is_number_integer() || terms[t][1].get<long long>() < 0) throw ConfigError(child(ttp, 1), "power k must be a non-negative integer");
        list.push_back({as_number(terms[t][0], child(ttp, 0)), static_cast<int>(terms[t][1].get<long long>()), as_number(terms[t][2], child(ttp, 2))});
      }
      entries.push_back(std::move(list));
    }
  }
  try {
    return OperatorWeight::from_terms(d, std::move(entries), "terms");
  } catch (const Error& ex) {
    throw ConfigError(ep, ex.what());
  }
}

// ---------------------------------------------------------------- CSV output

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace whlab::io
