#include <gtest/gtest.h>

#include <thread>

#include "support.hpp"

using namespace rectune;

namespace {

// Loopback chat endpoint replying with a scripted sequence of status codes.
class StubServer {
 public:
  explicit StubServer(std::vector<int> statuses, std::string content = "hello from the stub")
      : statuses_(std::move(statuses)), content_(std::move(content)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t i = hits_++;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      const int code = i < statuses_.size() ? statuses_[i] : 200;
      res.status = code;
      if (code == 200) {
        const json body{{"choices", {{{"message", {{"role", "assistant"}, {"content", content_}}}, {"finish_reason", "stop"}}}},
                        {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
        res.set_content(body.dump(), "application/json");
      } else {
        res.set_content("{\"error\":\"scripted\"}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  llm::EndpointConfig endpoint() const {
    llm::EndpointConfig c;
    c.url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    c.api_key = "sk-secret-value";
    c.model = "stub";
    c.timeout_seconds = 5;
    c.backoff_seconds = 0.01;
    return c;
  }
  std::size_t hits() const { return hits_; }
  const std::string& last_body() const { return last_body_; }
  const std::string& last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  std::vector<int> statuses_;
  std::string content_;
  std::atomic<std::size_t> hits_{0};
  std::string last_body_, last_auth_;
  int port_ = 0;
  std::thread thread_;
};

llm::ChatRequest hello() {
  llm::ChatRequest r;
  r.model = "stub";
  r.messages = {{llm::Role::user, "hi"}};
  return r;
}

}  // namespace

TEST(HttpChatClient, EchoesContent) {
  StubServer stub({200});
  llm::HttpChatClient client(stub.endpoint());
  const auto resp = client.complete(hello());
  EXPECT_EQ(resp.text, "hello from the stub");
  EXPECT_EQ(resp.finish_reason, "stop");
  ASSERT_TRUE(resp.usage);
  EXPECT_EQ(resp.usage->completion_tokens, 3);
  EXPECT_EQ(stub.last_auth(), "Bearer sk-secret-value");
  const json sent = json::parse(stub.last_body());
  EXPECT_EQ(sent["messages"][0]["content"], "hi");
  EXPECT_EQ(client.attempts(), 1);
}

TEST(HttpChatClient, RetriesServerErrors) {
  StubServer stub({500, 500, 200});
  llm::HttpChatClient client(stub.endpoint());
  EXPECT_EQ(client.complete(hello()).text, "hello from the stub");
  EXPECT_EQ(client.attempts(), 3);
  EXPECT_EQ(stub.hits(), 3u);
}

TEST(HttpChatClient, AuthFailureIsNotRetried) {
  StubServer stub({401});
  llm::HttpChatClient client(stub.endpoint());
  try {
    client.complete(hello());
    FAIL() << "expected AuthError";
  } catch (const llm::AuthError& e) {
    EXPECT_EQ(std::string(e.what()).find("sk-secret-value"), std::string::npos);
  }
  EXPECT_EQ(stub.hits(), 1u);
}

TEST(HttpChatClient, GivesUpAfterRetryBudget) {
  StubServer stub({503, 503, 503, 503, 503});
  llm::HttpChatClient client(stub.endpoint());
  EXPECT_THROW(client.complete(hello()), llm::TransportError);
  EXPECT_EQ(stub.hits(), 4u);  // first try plus three retries
}

TEST(HttpChatClient, UnreachableEndpoint) {
  llm::EndpointConfig c;
  c.url = "http://127.0.0.1:1/v1/chat/completions";
  c.max_retries = 1;
  c.backoff_seconds = 0.01;
  c.timeout_seconds = 1;
  llm::HttpChatClient client(c);
  EXPECT_THROW(client.complete(hello()), llm::TransportError);
}

TEST(ExtractJson, FencedArray) {
  const auto r = llm::extract_json_array(R"(Here you go:
```json
[{"config": {"a": 1, "b": 2.5}, "explanation": "first"},
 {"config": {"a": 3}, "explanation": "second [with brackets]"}]
```)");
  ASSERT_EQ(r.candidates.size(), 2u);
  EXPECT_DOUBLE_EQ(r.candidates[0].config.at("b"), 2.5);
  EXPECT_EQ(r.candidates[1].explanation, "second [with brackets]");
  EXPECT_TRUE(r.issues.empty());
}

TEST(ExtractJson, BareArrayInProse) {
  const auto r = llm::extract_json_array(
      R"(I considered [this aside] and then: [{"config": {"x": 0.1}, "explanation": "go"}] hope it helps)");
  ASSERT_EQ(r.candidates.size(), 1u);
  EXPECT_DOUBLE_EQ(r.candidates[0].config.at("x"), 0.1);
}

TEST(ExtractJson, PartialElementsReported) {
  const auto r = llm::extract_json_array(
      R"([{"config": {"x": 1}, "explanation": "ok"}, {"explanation": "no config"}, {"config": {"x": "high"}, "explanation": "bad"}, 7])");
  EXPECT_EQ(r.candidates.size(), 1u);
  EXPECT_EQ(r.issues.size(), 3u);
  EXPECT_EQ(r.issues[0].index, 1u);
}

TEST(ExtractJson, NoArrayIsParseError) {
  EXPECT_THROW(llm::extract_json_array("nothing to see here"), llm::ParseError);
  EXPECT_THROW(llm::extract_json_array("[1, 2"), llm::ParseError);
}
