#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rectune/config.hpp"
#include "rectune/llm/client.hpp"

namespace rectune::llm {

class ParseError : public LlmError {
 public:
  ParseError(std::string message, std::optional<std::size_t> element = std::nullopt)
      : LlmError(std::move(message)), element_(element) {}
  std::optional<std::size_t> element() const noexcept { return element_; }

 private:
  std::optional<std::size_t> element_;
};

struct ParsedCandidate {
  SystemConfig config;
  std::string explanation;
};

struct ElementIssue {
  std::size_t index;
  std::string message;
};

struct ExtractResult {
  std::vector<ParsedCandidate> candidates;
  std::vector<ElementIssue> issues;  // tolerated malformed elements
};

namespace detail {

// End (exclusive) of the bracketed value starting at `open`, honoring string
// literals; npos when unbalanced.
inline std::size_t match_bracket(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') ++depth;
    else if (c == ']' || c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace detail

// First well-formed JSON array in `text` (inside a code fence or bare), read
// as a list of {"config": {name: number}, "explanation": string}. Malformed
// elements are skipped and reported; if none survive, the first bad element's
// index is raised.
inline ExtractResult extract_json_array(std::string_view text) {
  std::optional<json> array;
  for (std::size_t pos = text.find('['); pos != std::string_view::npos; pos = text.find('[', pos + 1)) {
    const std::size_t end = detail::match_bracket(text, pos);
    if (end == std::string_view::npos) continue;
    try {
      json j = json::parse(text.substr(pos, end - pos));
      if (j.is_array()) {
        array = std::move(j);
        break;
      }
    } catch (const json::parse_error&) {
    }
  }
  if (!array) throw ParseError("no parseable JSON array in response");

  ExtractResult out;
  for (std::size_t i = 0; i < array->size(); ++i) {
    const json& e = (*array)[i];
    if (!e.is_object() || !e.contains("config") || !e["config"].is_object()) {
      out.issues.push_back({i, "element lacks a config object"});
      continue;
    }
    if (!e.contains("explanation") || !e["explanation"].is_string()) {
      out.issues.push_back({i, "element lacks an explanation string"});
      continue;
    }
    try {
      out.candidates.push_back({SystemConfig::from_json(e["config"]), e["explanation"].get<std::string>()});
    } catch (const ValidationError& err) {
      out.issues.push_back({i, err.what()});
    }
  }
  if (out.candidates.empty() && !out.issues.empty())
    throw ParseError("element " + std::to_string(out.issues.front().index) + ": " + out.issues.front().message,
                     out.issues.front().index);
  return out;
}

}  // namespace rectune::llm
