#include "drama/llm/client.h"

#include <cstdlib>
#include <thread>

#include "drama/llm/mock.h"
#include "drama/util/json_config.h"

#include "httplib.h"

namespace drama::llm {

void ClientConfig::validate() const {
  if (endpoint.empty()) throw ConfigError("client.endpoint: empty");
  if (!(timeout_s > 0.0)) throw ConfigError("client.timeout_s: must be > 0");
  if (max_retries < 0) throw ConfigError("client.max_retries: must be >= 0");
  if (max_in_flight < 1) throw ConfigError("client.max_in_flight: must be >= 1");
}

Json to_json(const ClientConfig& c) {
  return Json{{"endpoint", c.endpoint},       {"model", c.model},     {"timeout_s", c.timeout_s},
              {"max_retries", c.max_retries}, {"temperature", c.temperature}, {"seed", c.seed},
              {"api_key_env", c.api_key_env}, {"max_in_flight", c.max_in_flight}};
}

ClientConfig client_config_from_json(const Json& j, const ClientConfig& defaults) {
  if (!j.is_object()) throw ConfigError("client: expected an object");
  reject_unknown_keys(j,
                      {"endpoint", "model", "timeout_s", "max_retries", "temperature", "seed", "api_key_env",
                       "max_in_flight"},
                      "client");
  ClientConfig c = defaults;
  read_opt(j, "endpoint", c.endpoint, "client");
  read_opt(j, "model", c.model, "client");
  read_opt(j, "timeout_s", c.timeout_s, "client");
  read_opt(j, "max_retries", c.max_retries, "client");
  read_opt(j, "temperature", c.temperature, "client");
  read_opt(j, "seed", c.seed, "client");
  read_opt(j, "api_key_env", c.api_key_env, "client");
  read_opt(j, "max_in_flight", c.max_in_flight, "client");
  c.validate();
  return c;
}

std::string HttpBackend::complete(const ChatRequest& req, const ClientConfig& cfg) const {
  std::string base = cfg.endpoint;
  std::string path;
  const std::size_t scheme = base.find("://");
  const std::size_t slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    path = base.substr(slash);
    base.resize(slash);
  }
  while (!path.empty() && path.back() == '/') path.pop_back();

  httplib::Client cli(base);
  const auto sec = static_cast<time_t>(cfg.timeout_s);
  const auto usec = static_cast<time_t>((cfg.timeout_s - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
  if (!cfg.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) cli.set_bearer_token_auth(key);
  }
  Json messages = Json::array();
  for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  const Json body{{"model", cfg.model}, {"messages", messages}, {"temperature", cfg.temperature}};

  auto res = cli.Post(path + "/chat/completions", body.dump(), "application/json");
  if (!res) throw TransientError("request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) throw TransientError("HTTP status " + std::to_string(res->status));
  try {
    const Json reply = Json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw TransientError(std::string("malformed response body: ") + e.what());
  }
}

Client::Client(ClientConfig cfg, TemplateSet templates, std::shared_ptr<const ChatBackend> backend)
    : cfg_(std::move(cfg)),
      templates_(std::move(templates)),
      backend_(std::move(backend)),
      slots_(std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(cfg_.max_in_flight))) {
  cfg_.validate();
}

Client Client::from_config(const ClientConfig& cfg, TemplateSet templates) {
  std::shared_ptr<const ChatBackend> backend;
  if (cfg.endpoint == "mock") {
    backend = std::make_shared<MockBackend>();
  } else {
    backend = std::make_shared<HttpBackend>();
  }
  return Client(cfg, std::move(templates), std::move(backend));
}

CallRecord Client::call(const std::string& template_name, const std::map<std::string, std::string>& vars,
                        const std::function<void(const std::string&)>& check) const {
  const PromptTemplate& tpl = templates_.get(template_name);
  ChatRequest req{template_name, vars, {{"user", tpl.render(vars)}}};
  CallRecord rec;
  std::string last_error;
  slots_->acquire();
  struct Release {
    std::counting_semaphore<>* s;
    ~Release() { s->release(); }
  } release{slots_.get()};
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    rec.attempts = attempt + 1;
    rec.attempt_times.push_back(std::chrono::system_clock::now());
    try {
      std::string reply = backend_->complete(req, cfg_);
      if (check) check(reply);
      rec.reply = std::move(reply);
      return rec;
    } catch (const TransientError& e) {
      last_error = e.what();
    }
  }
  throw ClientError(tpl.id() + ": giving up after " + std::to_string(rec.attempts) + " attempts: " + last_error,
                    rec.attempts);
}

Json Client::template_hashes() const {
  Json out = Json::object();
  for (const auto& [_, t] : templates_.all()) out[t.id()] = t.sha256;
  return out;
}

}  // namespace drama::llm
