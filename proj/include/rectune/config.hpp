#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rectune/core/error.hpp"
#include "rectune/core/io.hpp"

namespace rectune {

enum class ParamKind { continuous, integer };
enum class ParamScale { linear, log };

struct ParamSpec {
  double lower = 0.0;
  double upper = 1.0;
  ParamKind kind = ParamKind::continuous;
  ParamScale scale = ParamScale::linear;
  bool sensitive = false;

  double range() const noexcept { return upper - lower; }
  bool contains(double v) const noexcept { return v >= lower && v <= upper; }

  double clip(double v) const noexcept {
    v = std::clamp(v, lower, upper);
    if (kind == ParamKind::integer) v = std::clamp(std::round(v), std::ceil(lower), std::floor(upper));
    return v;
  }

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

// Joint parameter vector across stages; names carry "pre." / "rank." / "re."
// prefixes. Values are stored sorted by name so the canonical string is a
// complete equality key.
struct SystemConfig {
  std::map<std::string, double> params;

  bool has(const std::string& name) const { return params.contains(name); }

  double at(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw ConfigError("missing parameter", name);
    return it->second;
  }

  double get_or(const std::string& name, double fallback) const {
    auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
  }

  json to_json() const { return json(params); }

  static SystemConfig from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config must be an object of name -> number");
    SystemConfig c;
    for (auto& [k, v] : j.items()) {
      if (!v.is_number()) throw ValidationError("value must be a number", k);
      c.params[k] = v.get<double>();
    }
    return c;
  }

  std::string canonical() const { return to_json().dump(); }

  static SystemConfig parse(const std::string& canonical) {
    try {
      return from_json(json::parse(canonical));
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("malformed config string: ") + e.what());
    }
  }

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

enum class ConfigIssueKind { missing, extra, out_of_bounds, not_integral, not_finite };

struct ConfigIssue {
  ConfigIssueKind kind;
  std::string parameter;
  std::string message;
};

class SearchSpace {
 public:
  std::map<std::string, ParamSpec> params;

  bool contains(const std::string& name) const { return params.contains(name); }
  const ParamSpec& at(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw ValidationError("unknown parameter", name);
    return it->second;
  }

  // Structural invariants of the space itself.
  void validate(const std::string& path = "search_space") const {
    if (params.empty()) throw ValidationError("search space is empty", path);
    for (const auto& [name, p] : params) {
      const std::string f = path + "." + name;
      if (!std::isfinite(p.lower) || !std::isfinite(p.upper))
        throw ValidationError("bounds must be finite", f);
      if (!(p.lower < p.upper)) throw ValidationError("lower must be < upper", f);
      if (p.scale == ParamScale::log && !(p.lower > 0.0))
        throw ValidationError("log scale requires lower > 0", f + ".lower");
      if (p.kind == ParamKind::integer &&
          (p.lower != std::round(p.lower) || p.upper != std::round(p.upper)))
        throw ValidationError("integer bounds must be integral", f);
    }
  }

  std::vector<ConfigIssue> check(const SystemConfig& c) const {
    std::vector<ConfigIssue> out;
    for (const auto& [name, spec] : params) {
      auto it = c.params.find(name);
      if (it == c.params.end()) {
        out.push_back({ConfigIssueKind::missing, name, "parameter missing"});
        continue;
      }
      const double v = it->second;
      if (!std::isfinite(v)) {
        out.push_back({ConfigIssueKind::not_finite, name, "value is not finite"});
      } else if (!spec.contains(v)) {
        out.push_back({ConfigIssueKind::out_of_bounds, name,
                       "value " + json(v).dump() + " outside [" + json(spec.lower).dump() + ", " +
                           json(spec.upper).dump() + "]"});
      } else if (spec.kind == ParamKind::integer && v != std::round(v)) {
        out.push_back({ConfigIssueKind::not_integral, name, "integer parameter holds non-integral value"});
      }
    }
    for (const auto& [name, v] : c.params) {
      if (!params.contains(name)) out.push_back({ConfigIssueKind::extra, name, "unknown parameter"});
    }
    return out;
  }

  void validate_config(const SystemConfig& c, const std::string& path = "config") const {
    auto issues = check(c);
    if (!issues.empty()) throw ValidationError(issues.front().message, path + "." + issues.front().parameter);
  }

  SystemConfig clip(SystemConfig c) const {
    for (auto& [name, v] : c.params) {
      if (auto it = params.find(name); it != params.end()) v = it->second.clip(v);
    }
    return c;
  }

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

// max_p |a_p - b_p| / range_p over the space's parameters. Missing values make
// the distance infinite.
inline double relative_linf(const SystemConfig& a, const SystemConfig& b, const SearchSpace& space) {
  double d = 0.0;
  for (const auto& [name, spec] : space.params) {
    auto ia = a.params.find(name);
    auto ib = b.params.find(name);
    if (ia == a.params.end() || ib == b.params.end()) return std::numeric_limits<double>::infinity();
    d = std::max(d, std::abs(ia->second - ib->second) / spec.range());
  }
  return d;
}

// ---- JSON ----

inline json to_json(const ParamSpec& p) {
  return json{{"lower", p.lower},
              {"upper", p.upper},
              {"kind", p.kind == ParamKind::integer ? "integer" : "continuous"},
              {"scale", p.scale == ParamScale::log ? "log" : "linear"},
              {"sensitive", p.sensitive}};
}

inline ParamSpec param_spec_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError("parameter spec must be an object", path);
  ParamSpec p;
  try {
    p.lower = j.at("lower").get<double>();
    p.upper = j.at("upper").get<double>();
  } catch (const json::exception&) {
    throw ValidationError("numeric lower/upper required", path);
  }
  const std::string kind = j.value("kind", "continuous");
  if (kind == "integer") p.kind = ParamKind::integer;
  else if (kind != "continuous") throw ValidationError("kind must be continuous|integer", path + ".kind");
  const std::string scale = j.value("scale", "linear");
  if (scale == "log") p.scale = ParamScale::log;
  else if (scale != "linear") throw ValidationError("scale must be linear|log", path + ".scale");
  p.sensitive = j.value("sensitive", false);
  return p;
}

inline json to_json(const SearchSpace& s) {
  json j = json::object();
  for (const auto& [name, p] : s.params) j[name] = to_json(p);
  return j;
}

inline SearchSpace search_space_from_json(const json& j, const std::string& path = "search_space") {
  if (!j.is_object()) throw ValidationError("search space must be an object", path);
  SearchSpace s;
  for (auto& [name, spec] : j.items()) s.params[name] = param_spec_from_json(spec, path + "." + name);
  s.validate(path);
  return s;
}

}  // namespace rectune
