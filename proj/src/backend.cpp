#include "vot/backend.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"

namespace vot::backend {

const char* to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "?";
}

const char* to_string(StepTag tag) {
  switch (tag) {
    case StepTag::Step1: return "STEP1";
    case StepTag::Step2: return "STEP2";
    case StepTag::Step3: return "STEP3";
    case StepTag::Step4Pre: return "STEP4_PRE";
    case StepTag::Step4Score: return "STEP4_SCORE";
    case StepTag::Step4Rank: return "STEP4_RANK";
    case StepTag::Step5: return "STEP5";
  }
  return "?";
}

StepTag step_tag_from_string(const std::string& name) {
  for (StepTag tag : {StepTag::Step1, StepTag::Step2, StepTag::Step3, StepTag::Step4Pre,
                      StepTag::Step4Score, StepTag::Step4Rank, StepTag::Step5}) {
    if (name == to_string(tag)) return tag;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown step tag " + name);
}

const std::string& ChatRequest::last_user_content() const {
  static const std::string empty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::User) return it->content;
  }
  return empty;
}

void check_request(const ChatRequest& request) {
  if (request.messages.empty() || request.messages.back().role != Role::User) {
    throw Error(ErrorCode::InvalidArgument, "the last chat message must be from the user");
  }
  if (!(request.temperature >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
  }
}

// ---- mock -----------------------------------------------------------------

MockScript MockScript::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("entries") || !j.at("entries").is_array()) {
    throw Error(ErrorCode::SchemaError, "mock script must be {\"entries\": [...]}");
  }
  MockScript script;
  for (std::size_t i = 0; i < j.at("entries").size(); ++i) {
    const auto& je = j.at("entries")[i];
    auto where = [&] { return "entries[" + std::to_string(i) + "]"; };
    if (!je.is_object() || !je.contains("tag") || !je.contains("response") ||
        !je.at("tag").is_string() || !je.at("response").is_string()) {
      throw Error(ErrorCode::SchemaError, where() + ": expected {tag, response, ...}");
    }
    MockEntry entry;
    try {
      entry.tag = step_tag_from_string(je.at("tag").get<std::string>());
    } catch (const Error&) {
      throw Error(ErrorCode::SchemaError, where() + ": unknown tag");
    }
    entry.response = je.at("response").get<std::string>();
    if (je.contains("matcher") && !je.at("matcher").is_null()) {
      if (!je.at("matcher").is_string()) {
        throw Error(ErrorCode::SchemaError, where() + ".matcher: expected a string");
      }
      entry.matcher = je.at("matcher").get<std::string>();
    }
    if (je.contains("once")) {
      if (!je.at("once").is_boolean()) {
        throw Error(ErrorCode::SchemaError, where() + ".once: expected a boolean");
      }
      entry.once = je.at("once").get<bool>();
    }
    script.entries.push_back(std::move(entry));
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json MockScript::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : entries) {
    nlohmann::json je;
    je["tag"] = to_string(entry.tag);
    if (entry.matcher) je["matcher"] = *entry.matcher;
    je["response"] = entry.response;
    if (entry.once) je["once"] = true;
    out.push_back(std::move(je));
  }
  return {{"entries", std::move(out)}};
}

namespace {

class MockSession : public ChatSession {
 public:
  explicit MockSession(std::shared_ptr<const MockScript> script)
      : script_(std::move(script)), used_(script_->entries.size(), false) {}

  ChatResponse complete(const ChatRequest& request) override {
    check_request(request);
    const std::string& message = request.last_user_content();
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < script_->entries.size(); ++i) {
      const MockEntry& entry = script_->entries[i];
      if (entry.tag != request.tag) continue;
      if (entry.once && used_[i]) continue;
      if (entry.matcher && message.find(*entry.matcher) == std::string::npos) continue;
      used_[i] = true;
      if (entry.response.empty()) {
        throw Error(ErrorCode::EmptyCompletion,
                    std::string("scripted empty completion for ") + to_string(request.tag));
      }
      return {entry.response, "mock", 0.0};
    }
    throw Error(ErrorCode::NoScriptEntry,
                std::string("no scripted reply for tag ") + to_string(request.tag) +
                    " and message \"" + message.substr(0, 80) + "\"");
  }

 private:
  std::shared_ptr<const MockScript> script_;
  std::vector<bool> used_;
  std::mutex mutex_;
};

}  // namespace

std::unique_ptr<ChatSession> MockBackend::open_session() {
  return std::make_unique<MockSession>(script_);
}

// ---- http -----------------------------------------------------------------

HttpConfig HttpConfig::from_env() {
  HttpConfig config;
  if (const char* v = std::getenv("VOT_API_BASE")) config.base_url = v;
  if (const char* v = std::getenv("VOT_API_KEY")) config.api_key = v;
  if (const char* v = std::getenv("VOT_MODEL")) config.model = v;
  return config;
}

// Caps concurrent outbound requests.
class HttpBackend::InflightGate {
 public:
  explicit InflightGate(int limit) : available_(limit) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++available_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int available_;
};

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::InvalidArgument, "http backend needs a base url");
  }
  if (config_.max_inflight < 1) config_.max_inflight = 1;
  auto scheme_end = config_.base_url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto slash = config_.base_url.find('/', host_start);
  if (slash == std::string::npos) {
    host_ = config_.base_url;
  } else {
    host_ = config_.base_url.substr(0, slash);
    path_prefix_ = config_.base_url.substr(slash);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  gate_ = std::make_unique<InflightGate>(config_.max_inflight);
}

HttpBackend::~HttpBackend() = default;

ChatResponse HttpBackend::complete(const ChatRequest& request) {
  check_request(request);

  nlohmann::json body;
  body["model"] = config_.model;
  body["temperature"] = request.temperature;
  body["messages"] = nlohmann::json::array();
  for (const auto& message : request.messages) {
    body["messages"].push_back({{"role", to_string(message.role)},
                                {"content", message.content}});
  }
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  gate_->acquire();
  struct Release {
    InflightGate* gate;
    ~Release() { gate->release(); }
  } release{gate_.get()};

  const auto started = std::chrono::steady_clock::now();
  std::string last_transport_error;
  int attempts = config_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_initial_ms << (attempt - 1)));
    }
    httplib::Client client(host_);
    client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));

    auto result = client.Post(path_prefix_ + "/chat/completions", headers, payload,
                              "application/json");
    if (!result) {
      last_transport_error = httplib::to_string(result.error());
      continue;  // connection refused / timed out: retryable
    }
    if (result->status == 429 || result->status >= 500) {
      last_transport_error = "status " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw Error(ErrorCode::HttpStatus, result->body.substr(0, 200), result->status);
    }

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::EmptyCompletion, std::string("unparseable response body: ") +
                                                  e.what());
    }
    std::string content;
    if (j.contains("choices") && j.at("choices").is_array() && !j.at("choices").empty()) {
      const auto& choice = j.at("choices")[0];
      if (choice.contains("message") && choice.at("message").contains("content") &&
          choice.at("message").at("content").is_string()) {
        content = choice.at("message").at("content").get<std::string>();
      }
    }
    if (content.empty()) {
      throw Error(ErrorCode::EmptyCompletion, "response carried no message content");
    }
    ChatResponse response;
    response.content = std::move(content);
    response.model_id = j.contains("model") && j.at("model").is_string()
                            ? j.at("model").get<std::string>()
                            : config_.model;
    response.latency_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - started)
                              .count();
    return response;
  }
  throw Error(ErrorCode::Timeout, "no response after " + std::to_string(attempts) +
                                      " attempts (" + last_transport_error + ")");
}

namespace {

class HttpSession : public ChatSession {
 public:
  explicit HttpSession(HttpBackend* backend) : backend_(backend) {}
  ChatResponse complete(const ChatRequest& request) override {
    return backend_->complete(request);
  }

 private:
  HttpBackend* backend_;
};

}  // namespace

std::unique_ptr<ChatSession> HttpBackend::open_session() {
  return std::make_unique<HttpSession>(this);
}

}  // namespace vot::backend
