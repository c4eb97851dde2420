#include "drama/llm/tasks.h"

#include <regex>

namespace drama::llm {

RankParse parse_ranking(const std::string& reply, std::size_t k) {
  if (k < 1) throw ConfigError("parse_ranking: k must be >= 1");
  static const std::regex kBracket(R"(\[\s*([0-9]+)\s*\])");
  RankParse out;
  std::vector<bool> seen(k + 1, false);
  for (auto it = std::sregex_iterator(reply.begin(), reply.end(), kBracket); it != std::sregex_iterator(); ++it) {
    const std::string digits = (*it)[1];
    std::size_t idx = 0;
    try {
      idx = digits.size() > 9 ? 0 : std::stoul(digits);
    } catch (const std::exception&) {
      idx = 0;
    }
    if (idx < 1 || idx > k) {
      out.repairs.push_back(digits + " out of range");
      continue;
    }
    if (seen[idx]) {
      out.repairs.push_back("duplicate " + digits + " dropped");
      continue;
    }
    seen[idx] = true;
    out.order.push_back(idx);
  }
  out.unrepairable = out.order.empty();
  std::vector<std::size_t> missing;
  for (std::size_t i = 1; i <= k; ++i)
    if (!seen[i]) missing.push_back(i);
  if (out.order.empty()) {
    out.repairs.push_back("all missing appended");
  } else {
    for (std::size_t i : missing) out.repairs.push_back("missing " + std::to_string(i) + " appended");
  }
  out.order.insert(out.order.end(), missing.begin(), missing.end());
  return out;
}

GeneratedQuery generate_query(const Client& client, const std::string& document) {
  if (document.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ConfigError("generate_query: empty document");
  std::string line;
  auto first_line = [](const std::string& reply) {
    std::size_t pos = 0;
    while (pos <= reply.size()) {
      std::size_t nl = reply.find('\n', pos);
      if (nl == std::string::npos) nl = reply.size();
      std::string l = reply.substr(pos, nl - pos);
      const auto b = l.find_first_not_of(" \t\r");
      if (b != std::string::npos) {
        const auto e = l.find_last_not_of(" \t\r");
        return l.substr(b, e - b + 1);
      }
      pos = nl + 1;
    }
    return std::string();
  };
  const CallRecord rec = client.call("query_gen", {{"document", document}}, [&](const std::string& reply) {
    if (first_line(reply).empty()) throw TransientError("empty generation");
  });
  return {first_line(rec.reply), rec.attempts};
}

RerankResult listwise_rerank(const Client& client, const std::string& query,
                             const std::vector<std::string>& candidates) {
  const std::size_t k = candidates.size();
  if (k < 2 || k > 20) throw ConfigError("listwise_rerank: k=" + std::to_string(k) + " outside [2, 20]");
  std::map<std::string, std::string> vars{{"query", query}, {"k", std::to_string(k)}};
  std::string block;
  for (std::size_t i = 0; i < k; ++i) {
    block += "[" + std::to_string(i + 1) + "] " + candidates[i] + "\n";
    vars["candidate." + std::to_string(i + 1)] = candidates[i];
  }
  vars["candidates"] = block;
  const CallRecord rec = client.call("rerank", vars);
  return {parse_ranking(rec.reply, k), rec.reply, rec.attempts};
}

}  // namespace drama::llm
