#pragma once

// Pluggable chat-completion backend. Two implementations: an HTTP client for
// OpenAI-style /chat/completions endpoints and a scripted mock for hermetic
// runs. A session is one reasoning run's handle; the mock keeps its
// consumed-entry cursor there, so parallel runs never share state.

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vot/errors.hpp"

namespace vot::backend {

enum class Role { System, User, Assistant };

// Which pipeline step a request belongs to; the mock dispatches on it.
enum class StepTag { Step1, Step2, Step3, Step4Pre, Step4Score, Step4Rank, Step5 };

const char* to_string(Role role);
const char* to_string(StepTag tag);
StepTag step_tag_from_string(const std::string& name);  // INVALID_ARGUMENT

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;  // last one must be from the user
  StepTag tag = StepTag::Step1;
  double temperature = 0.0;           // >= 0

  const std::string& last_user_content() const;
};

struct ChatResponse {
  std::string content;   // non-empty on success
  std::string model_id;
  double latency_ms = 0.0;
};

class ChatSession {
 public:
  virtual ~ChatSession() = default;
  // Returns a completion or throws a typed Error:
  // TIMEOUT, HTTP_STATUS, NO_SCRIPT_ENTRY, EMPTY_COMPLETION, INVALID_ARGUMENT.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::unique_ptr<ChatSession> open_session() = 0;  // thread-safe
  virtual std::string model_id() const = 0;
};

// One scripted reply. Selection: first entry whose tag matches and whose
// matcher (when set) is a substring of the last user message; entries with
// once=true are skipped after they served once in the session. Steps that may
// run concurrently (per-option scoring) should use matchers, not ordering.
struct MockEntry {
  StepTag tag = StepTag::Step1;
  std::optional<std::string> matcher;
  std::string response;
  bool once = false;
};

struct MockScript {
  std::vector<MockEntry> entries;

  static MockScript from_json(const nlohmann::json& j);              // SCHEMA_ERROR
  static MockScript load(const std::filesystem::path& path);         // IO_ERROR too
  nlohmann::json to_json() const;
};

class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(MockScript script)
      : script_(std::make_shared<const MockScript>(std::move(script))) {}

  std::unique_ptr<ChatSession> open_session() override;
  std::string model_id() const override { return "mock"; }

 private:
  std::shared_ptr<const MockScript> script_;
};

struct HttpConfig {
  std::string base_url;   // e.g. "http://127.0.0.1:8080/v1"
  std::string api_key;    // sent as a bearer token when non-empty
  std::string model;
  int timeout_ms = 30000;
  int max_retries = 3;          // retries after the first attempt
  int backoff_initial_ms = 250; // doubled per retry
  int max_inflight = 8;         // concurrent request bound

  // VOT_API_BASE / VOT_API_KEY / VOT_MODEL, unset fields left default.
  static HttpConfig from_env();
};

// POSTs {base_url}/chat/completions with {"model", "messages", "temperature"}
// and reads choices[0].message.content. Connection failures and 429/5xx are
// retried with exponential backoff; other statuses raise HTTP_STATUS at once.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(HttpConfig config);
  ~HttpBackend() override;

  std::unique_ptr<ChatSession> open_session() override;
  std::string model_id() const override { return config_.model; }

  ChatResponse complete(const ChatRequest& request);

 private:
  HttpConfig config_;
  std::string host_;         // scheme://host:port
  std::string path_prefix_;  // anything after the host
  class InflightGate;
  std::unique_ptr<InflightGate> gate_;
};

// Shared request sanity checks (roles, temperature); INVALID_ARGUMENT.
void check_request(const ChatRequest& request);

}  // namespace vot::backend
