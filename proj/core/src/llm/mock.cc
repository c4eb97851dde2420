#include "drama/llm/mock.h"

#include <algorithm>
#include <condition_variable>
#include <set>

#include "drama/data/pseudo_words.h"
#include "drama/encoder/tokenizer.h"
#include "drama/eval/lexical.h"
#include "drama/util/rng.h"
#include "httplib.h"

namespace drama::llm {
namespace {

const std::string& var(const ChatRequest& req, const std::string& key) {
  auto it = req.vars.find(key);
  if (it == req.vars.end()) throw ConfigError("mock: request for " + req.template_name + " lacks '" + key + "'");
  return it->second;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
  return out;
}

std::string mock_query(const std::string& doc, std::uint64_t seed) {
  const auto pieces = encoder::split_pieces(doc);
  std::vector<std::string> first;
  for (const auto& p : pieces) {
    first.push_back(p);
    const char last = p.back();
    if (last == '.' || last == '!' || last == '?') break;
  }
  Rng rng = make_rng(seed ^ fnv1a64(doc), "mock.query_gen");
  std::vector<std::string> picked;
  for (const auto& p : first) {
    const std::string n = encoder::normalize_piece(p);
    if (!n.empty() && uniform_open(rng) < 0.6) picked.push_back(n);
  }
  if (picked.empty()) {
    for (const auto& p : first) {
      const std::string n = encoder::normalize_piece(p);
      if (!n.empty()) {
        picked.push_back(n);
        break;
      }
    }
  }
  if (picked.empty()) return "";
  if (picked.size() > 8) picked.resize(8);
  return join(picked);
}

std::string mock_rerank(const ChatRequest& req) {
  const std::size_t k = std::stoul(var(req, "k"));
  std::vector<std::string> cands;
  for (std::size_t i = 1; i <= k; ++i) cands.push_back(var(req, "candidate." + std::to_string(i)));
  std::string reply;
  for (std::size_t i : mock_rerank_order(var(req, "query"), cands))
    reply += (reply.empty() ? "" : " > ") + ("[" + std::to_string(i) + "]");
  return reply;
}

std::string mock_triplet_task(const ChatRequest& req, std::uint64_t seed) {
  data::PseudoWordGen gen(make_rng(seed, "mock.triplet_task." + var(req, "task_seed")));
  const auto topic = gen.batch(2, 2, 3);
  const auto extra = gen.batch(2, 2, 2);
  return Json{{"task", "find passages about " + join(topic)},
              {"query", join({topic[0], extra[0], topic[1], extra[1]})}}
      .dump();
}

std::string mock_triplet_docs(const ChatRequest& req, std::uint64_t seed) {
  const std::string& query = var(req, "query");
  const auto words = encoder::split_pieces(query);
  data::PseudoWordGen gen(make_rng(seed ^ fnv1a64(query), "mock.triplet_docs"));
  const auto filler = gen.batch(12, 1, 2);
  std::vector<std::string> pos, neg;
  for (std::size_t i = 0; i < filler.size(); ++i) {
    pos.push_back(filler[i]);
    neg.push_back(filler[(i + 5) % filler.size()]);
    if (i % 3 == 0 && i / 3 < words.size()) pos.push_back(words[i / 3]);
  }
  // The negative shares only the first query word.
  if (!words.empty()) neg.insert(neg.begin() + 2, words[0]);
  return Json{{"positive", join(pos) + "."}, {"negative", join(neg) + "."}}.dump();
}

}  // namespace

std::vector<std::size_t> mock_rerank_order(const std::string& query, const std::vector<std::string>& candidates) {
  std::vector<std::size_t> overlap(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) overlap[i] = eval::token_overlap(query, candidates[i]);
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return overlap[a] > overlap[b]; });
  for (auto& i : order) ++i;
  return order;
}

std::string MockBackend::complete(const ChatRequest& req, const ClientConfig& cfg) const {
  const std::size_t n = calls_.fetch_add(1);
  if (n < faults_.transient_failures) throw TransientError("mock: injected failure " + std::to_string(n + 1));
  const std::string& t = req.template_name;
  if (t == "rerank") return mock_rerank(req);
  if (faults_.malformed) return "I am not sure what you mean.";
  if (t == "query_gen") return mock_query(var(req, "document"), cfg.seed);
  if (t == "triplet_task") return mock_triplet_task(req, cfg.seed);
  if (t == "triplet_docs") return mock_triplet_docs(req, cfg.seed);
  throw ConfigError("mock: no behaviour for template '" + t + "'");
}

struct LoopbackServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

LoopbackServer::LoopbackServer(Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post(R"(.*/chat/completions)", [this, handler](const httplib::Request& rq, httplib::Response& rs) {
    ++requests_;
    Json body;
    try {
      body = Json::parse(rq.body);
    } catch (const Json::exception&) {
      rs.status = 400;
      return;
    }
    auto [status, content] = handler(body);
    rs.status = status;
    if (status >= 200 && status < 300) {
      const Json reply{{"choices", Json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}})}};
      rs.set_content(reply.dump(), "application/json");
    } else {
      rs.set_content(content, "text/plain");
    }
  });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw Error("loopback server: bind failed");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

LoopbackServer::~LoopbackServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string LoopbackServer::endpoint() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

}  // namespace drama::llm
