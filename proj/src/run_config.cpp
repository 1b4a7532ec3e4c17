// SPDX-License-Identifier: Apache-2.0

#include "vifem/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vifem {

using nlohmann::json;

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : Error(field.empty() ? "config line " + std::to_string(line) + ": " + message
                          : "config field '" + field + "' (line " + std::to_string(line) + "): " + message),
      field_(std::move(field)),
      line_(line) {}

bool RunConfig::operator==(const RunConfig& o) const {
  const CaseSettings& a = settings;
  const CaseSettings& b = o.settings;
  return case_name == o.case_name && output_dir == o.output_dir && a.p == b.p && a.k == b.k && a.cells == b.cells &&
         a.tau_rule == b.tau_rule && a.final_time == b.final_time && a.lower == b.lower && a.upper == b.upper &&
         a.relax == b.relax && a.pdas.c == b.pdas.c && a.pdas.max_iter == b.pdas.max_iter &&
         a.pdas.fix_w_mean == b.pdas.fix_w_mean && a.pdas.kkt_tol == b.pdas.kkt_tol && a.seed == b.seed &&
         a.warmup_substeps == b.warmup_substeps && a.params == b.params;
}

namespace {

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  // Line of the first occurrence of "key" in the document, or 1.
  int line_of(const std::string& key) const {
    const auto pos = text_.find("\"" + key + "\"");
    if (pos == std::string::npos) return 1;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  int line_at_byte(std::size_t byte) const {
    byte = std::min(byte, text_.size());
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(byte), '\n'));
  }

  [[noreturn]] void fail(const std::string& path, const std::string& key, const std::string& msg) const {
    throw ConfigError(path, line_of(key), msg);
  }

  double number(const json& j, const std::string& path, const std::string& key) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    fail(path, key, "expected a number");
  }

  long long integer(const json& j, const std::string& path, const std::string& key) const {
    if (!j.is_number_integer()) fail(path, key, "expected an integer");
    return j.get<long long>();
  }

 private:
  const std::string& text_;
};

json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  Reader rd(text);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", rd.line_at_byte(e.byte == 0 ? 0 : e.byte - 1), std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", 1, "top level must be an object");

  static const std::set<std::string> known = {"case",  "p",    "k",    "cells",           "tau",    "final_time",
                                              "lower", "upper", "tol_relax", "pdas",     "seed",   "warmup_substeps",
                                              "params", "output_dir"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) rd.fail(key, key, "unknown field");

  RunConfig cfg;
  CaseSettings& s = cfg.settings;

  if (!doc.contains("case") || !doc["case"].is_string()) rd.fail("case", "case", "required string field");
  cfg.case_name = doc["case"].get<std::string>();
  const TestCase* tc = nullptr;
  try {
    tc = &find_case(cfg.case_name);
  } catch (const Error& e) {
    rd.fail("case", "case", e.what());
  }
  cfg.case_name = tc->name;
  s.k = tc->defaults.k;

  if (doc.contains("p")) {
    const long long p = rd.integer(doc["p"], "p", "p");
    if (p < 1 || p > 4) rd.fail("p", "p", "must be in 1..4");
    s.p = static_cast<int>(p);
  }
  if (doc.contains("k")) {
    const long long k = rd.integer(doc["k"], "k", "k");
    if (k < 1 || k > 5) rd.fail("k", "k", "must be in 1..5");
    s.k = static_cast<int>(k);
  }
  if (doc.contains("cells")) {
    const json& c = doc["cells"];
    if (!c.is_array() || c.empty()) rd.fail("cells", "cells", "expected a non-empty array of integers");
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string path = "cells[" + std::to_string(i) + "]";
      const long long n = rd.integer(c[i], path, "cells");
      if (n < 1) rd.fail(path, "cells", "mesh sizes must be positive");
      s.cells.push_back(static_cast<int>(n));
    }
  }
  if (doc.contains("tau")) {
    if (!doc["tau"].is_string()) rd.fail("tau", "tau", "expected a string such as \"h/2\" or \"1e-4\"");
    try {
      s.tau_rule = TauRule::parse(doc["tau"].get<std::string>());
    } catch (const Error& e) {
      rd.fail("tau", "tau", e.what());
    }
  }
  if (doc.contains("final_time")) {
    const double t = rd.number(doc["final_time"], "final_time", "final_time");
    if (!(t > 0.0) || !std::isfinite(t)) rd.fail("final_time", "final_time", "must be positive and finite");
    s.final_time = t;
  }
  if (doc.contains("lower")) s.lower = rd.number(doc["lower"], "lower", "lower");
  if (doc.contains("upper")) s.upper = rd.number(doc["upper"], "upper", "upper");
  if (s.lower && s.upper && !(*s.lower < *s.upper)) rd.fail("upper", "upper", "must exceed lower");
  if (doc.contains("tol_relax")) {
    const double r = rd.number(doc["tol_relax"], "tol_relax", "tol_relax");
    if (!(r >= 0.0) || !std::isfinite(r)) rd.fail("tol_relax", "tol_relax", "must be a finite nonnegative number");
    s.relax = r;
  }
  if (doc.contains("pdas")) {
    const json& p = doc["pdas"];
    if (!p.is_object()) rd.fail("pdas", "pdas", "expected an object");
    for (const auto& [key, value] : p.items()) {
      const std::string path = "pdas." + key;
      if (key == "c") {
        const double c = rd.number(value, path, key);
        if (!(c > 0.0) || !std::isfinite(c)) rd.fail(path, key, "must be positive");
        s.pdas.c = c;
      } else if (key == "max_iter") {
        const long long m = rd.integer(value, path, key);
        if (m < 1) rd.fail(path, key, "must be at least 1");
        s.pdas.max_iter = static_cast<int>(m);
      } else if (key == "kkt_tol") {
        const double t = rd.number(value, path, key);
        if (!(t > 0.0)) rd.fail(path, key, "must be positive");
        s.pdas.kkt_tol = t;
      } else if (key == "fix_w_mean") {
        if (!value.is_boolean()) rd.fail(path, key, "expected true or false");
        s.pdas.fix_w_mean = value.get<bool>();
      } else {
        rd.fail(path, key, "unknown field");
      }
    }
  }
  if (doc.contains("seed")) {
    const json& v = doc["seed"];
    if (!v.is_number_unsigned()) rd.fail("seed", "seed", "expected a nonnegative integer");
    s.seed = v.get<std::uint64_t>();
  }
  if (doc.contains("warmup_substeps")) {
    const long long w = rd.integer(doc["warmup_substeps"], "warmup_substeps", "warmup_substeps");
    if (w < 1) rd.fail("warmup_substeps", "warmup_substeps", "must be at least 1");
    s.warmup_substeps = static_cast<int>(w);
  }
  if (doc.contains("params")) {
    const json& p = doc["params"];
    if (!p.is_object()) rd.fail("params", "params", "expected an object");
    for (const auto& [key, value] : p.items()) {
      if (!tc->defaults.params.count(key)) rd.fail("params." + key, key, "not a parameter of case " + tc->name);
      s.params[key] = rd.number(value, "params." + key, key);
    }
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) rd.fail("output_dir", "output_dir", "expected a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  const CaseSettings& s = cfg.settings;
  json doc;
  doc["case"] = cfg.case_name;
  doc["p"] = s.p;
  doc["k"] = s.k;
  if (!s.cells.empty()) doc["cells"] = s.cells;
  if (s.tau_rule) doc["tau"] = s.tau_rule->str();
  if (s.final_time) doc["final_time"] = *s.final_time;
  if (s.lower) doc["lower"] = bound_to_json(*s.lower);
  if (s.upper) doc["upper"] = bound_to_json(*s.upper);
  if (s.relax) doc["tol_relax"] = *s.relax;
  doc["pdas"] = {{"c", s.pdas.c}, {"max_iter", s.pdas.max_iter}, {"kkt_tol", s.pdas.kkt_tol},
                 {"fix_w_mean", s.pdas.fix_w_mean}};
  doc["seed"] = s.seed;
  doc["warmup_substeps"] = s.warmup_substeps;
  if (!s.params.empty()) doc["params"] = s.params;
  doc["output_dir"] = cfg.output_dir;
  return doc.dump(2) + "\n";
}

const char* library_version() {
#ifdef VIFEM_VERSION
  return VIFEM_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace vifem
