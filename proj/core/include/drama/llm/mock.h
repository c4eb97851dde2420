#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "drama/llm/client.h"

namespace drama::llm {

struct MockFaults {
  /// The first n calls throw TransientError.
  std::size_t transient_failures = 0;
  /// Generation templates reply with text that does not parse.
  bool malformed = false;
};

/// Deterministic stand-in for an instruction-following model. The reply is
/// a pure function of (template, variables, seed):
///   query_gen     a seeded subset of the document's first sentence
///   rerank        candidates by descending token overlap with the query,
///                 ties by original position, as "[i] > [j] > ..."
///   triplet_task  JSON task + query built from seeded pseudo-words
///   triplet_docs  JSON positive / negative passages around the query
class MockBackend final : public ChatBackend {
 public:
  explicit MockBackend(MockFaults faults = {}) : faults_(faults) {}
  std::string complete(const ChatRequest& req, const ClientConfig& cfg) const override;
  std::size_t calls() const { return calls_.load(); }

 private:
  MockFaults faults_;
  mutable std::atomic<std::size_t> calls_{0};
};

/// Candidate order the mock reranker produces (1-based indices).
std::vector<std::size_t> mock_rerank_order(const std::string& query, const std::vector<std::string>& candidates);

/// Chat-completion server on 127.0.0.1 for integration tests. `handler`
/// maps the parsed request body to (HTTP status, reply content).
class LoopbackServer {
 public:
  using Handler = std::function<std::pair<int, std::string>(const Json& body)>;
  explicit LoopbackServer(Handler handler);
  ~LoopbackServer();
  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;

  /// "http://127.0.0.1:<port>"
  std::string endpoint() const;
  std::size_t requests() const { return requests_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace drama::llm
