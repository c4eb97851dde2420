#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include "drama/llm/template.h"
#include "drama/util/error.h"
#include "drama/util/io.h"

namespace drama::llm {

struct ClientConfig {
  /// Base URL such as "http://127.0.0.1:8080/v1", or "mock" for the
  /// in-process mock.
  std::string endpoint = "mock";
  std::string model = "mock";
  double timeout_s = 30.0;
  int max_retries = 2;
  double temperature = 0.0;
  /// Mock only.
  std::uint64_t seed = 0;
  /// Name of the environment variable holding a bearer token (empty: none).
  std::string api_key_env;
  std::size_t max_in_flight = 4;

  void validate() const;
};

Json to_json(const ClientConfig& c);
ClientConfig client_config_from_json(const Json& j, const ClientConfig& defaults = {});

struct ChatMessage {
  std::string role;
  std::string content;
};

/// What a backend sees: the rendered messages plus the template and raw
/// variables, so the mock can answer without parsing prose.
struct ChatRequest {
  std::string template_name;
  std::map<std::string, std::string> vars;
  std::vector<ChatMessage> messages;
};

/// Raised by a backend (or a reply check) for a failure worth retrying.
class TransientError : public Error {
 public:
  using Error::Error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& req, const ClientConfig& cfg) const = 0;
};

/// POST {endpoint}/chat/completions with {model, messages, temperature};
/// the reply is choices[0].message.content. Network errors, timeouts and
/// non-2xx statuses are transient.
class HttpBackend final : public ChatBackend {
 public:
  std::string complete(const ChatRequest& req, const ClientConfig& cfg) const override;
};

struct CallRecord {
  std::string reply;
  int attempts = 0;
  std::vector<std::chrono::system_clock::time_point> attempt_times;
};

/// Thread-safe after construction; at most max_in_flight calls run at once.
class Client {
 public:
  Client(ClientConfig cfg, TemplateSet templates, std::shared_ptr<const ChatBackend> backend);
  /// Mock backend for endpoint "mock", HTTP otherwise.
  static Client from_config(const ClientConfig& cfg, TemplateSet templates);

  /// Renders `template_name`, sends it, and passes the reply through
  /// `check`, which may throw TransientError to request a retry. Makes
  /// max_retries + 1 attempts in total before raising ClientError.
  CallRecord call(const std::string& template_name, const std::map<std::string, std::string>& vars,
                  const std::function<void(const std::string&)>& check = {}) const;

  const ClientConfig& config() const { return cfg_; }
  const TemplateSet& templates() const { return templates_; }
  /// template id -> sha256, for manifests and shard metadata.
  Json template_hashes() const;

 private:
  ClientConfig cfg_;
  TemplateSet templates_;
  std::shared_ptr<const ChatBackend> backend_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace drama::llm
