#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "rectune/core/error.hpp"
#include "rectune/core/io.hpp"
#include "rectune/core/rng.hpp"

namespace rectune::llm {

class LlmError : public Error {
 public:
  using Error::Error;
};
class TransportError : public LlmError {
 public:
  using LlmError::LlmError;
};
class AuthError : public LlmError {
 public:
  using LlmError::LlmError;
};
class ResponseError : public LlmError {
 public:
  using LlmError::LlmError;
};

enum class Role { system, user, assistant };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

struct Message {
  Role role = Role::user;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.2;
  int max_output_tokens = 2048;

  void validate() const {
    if (messages.empty()) throw ValidationError("chat request needs at least one message", "messages");
    if (messages.front().role == Role::assistant)
      throw ValidationError("first message must be system or user", "messages[0].role");
    if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0", "temperature");
  }
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  std::string finish_reason;
  std::optional<Usage> usage;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct EndpointConfig {
  std::string url;  // e.g. http://localhost:8080/v1/chat/completions
  std::string api_key;
  std::string model;
  double timeout_seconds = 30.0;
  int max_retries = 3;
  double backoff_seconds = 0.5;  // first retry delay; doubles each retry

  // RECTUNE_LLM_URL, RECTUNE_LLM_API_KEY, RECTUNE_LLM_MODEL, RECTUNE_LLM_TIMEOUT
  static EndpointConfig from_env() {
    EndpointConfig c;
    auto env = [](const char* k) -> std::string {
      const char* v = std::getenv(k);
      return v ? v : "";
    };
    c.url = env("RECTUNE_LLM_URL");
    c.api_key = env("RECTUNE_LLM_API_KEY");
    c.model = env("RECTUNE_LLM_MODEL");
    if (auto t = env("RECTUNE_LLM_TIMEOUT"); !t.empty()) c.timeout_seconds = std::stod(t);
    if (c.url.empty()) throw ValidationError("LLM endpoint not configured", "RECTUNE_LLM_URL");
    return c;
  }
};

namespace detail {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ValidationError("endpoint URL needs a scheme", "url");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace detail

// OpenAI-compatible chat-completions adapter:
//   request  {"model", "messages": [{"role","content"}], "temperature", "max_tokens"}
//   response {"choices": [{"message": {"content"}, "finish_reason"}], "usage": {...}}
// Transport failures and 5xx are retried with exponential backoff plus up to
// 10% jitter; 4xx is never retried. The API key never appears in errors.
class HttpChatClient final : public ChatBackend {
 public:
  explicit HttpChatClient(EndpointConfig config) : config_(std::move(config)), url_(detail::split_url(config_.url)) {}

  ChatResponse complete(const ChatRequest& request) override {
    request.validate();
    const std::string body = encode(request).dump();
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) backoff(attempt);
      httplib::Client client(url_.origin);
      const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      auto res = client.Post(url_.path, headers, body, "application/json");
      ++attempts_;
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "server error " + std::to_string(res->status);
        continue;
      }
      if (res->status == 401 || res->status == 403)
        throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
      if (res->status >= 400) throw LlmError("endpoint returned HTTP " + std::to_string(res->status));
      return decode(res->body);
    }
    throw TransportError("gave up after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
  }

  // Number of HTTP attempts made so far (tests use it to check retry policy).
  int attempts() const noexcept { return attempts_; }

  static json encode(const ChatRequest& r) {
    json msgs = json::array();
    for (const auto& m : r.messages) msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    return json{{"model", r.model}, {"messages", msgs}, {"temperature", r.temperature}, {"max_tokens", r.max_output_tokens}};
  }

  static ChatResponse decode(const std::string& body) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error&) {
      throw ResponseError("response body is not JSON");
    }
    try {
      const auto& choice = j.at("choices").at(0);
      ChatResponse r;
      r.text = choice.at("message").at("content").get<std::string>();
      r.finish_reason = choice.value("finish_reason", "");
      if (j.contains("usage") && j["usage"].is_object())
        r.usage = Usage{j["usage"].value("prompt_tokens", 0), j["usage"].value("completion_tokens", 0)};
      return r;
    } catch (const json::exception&) {
      throw ResponseError("response body lacks choices[0].message.content");
    }
  }

 private:
  void backoff(int attempt) {
    const double base = config_.backoff_seconds * std::pow(2.0, attempt - 1);
    const double jitter = 0.1 * base * KeyedRng({tag("backoff"), static_cast<std::uint64_t>(attempts_)}).uniform();
    std::this_thread::sleep_for(std::chrono::duration<double>(base + jitter));
  }

  EndpointConfig config_;
  detail::ParsedUrl url_;
  int attempts_ = 0;
};

}  // namespace rectune::llm
