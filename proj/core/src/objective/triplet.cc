#include "drama/objective/triplet.h"

#include <algorithm>

#include "drama/util/error.h"
#include "drama/util/json_config.h"

namespace drama::objective {

std::string to_string(Source s) {
  switch (s) {
    case Source::kSft: return "sft";
    case Source::kSent: return "sent";
    case Source::kQgen: return "qgen";
    case Source::kRerank: return "rerank";
    case Source::kTriplet: return "triplet";
  }
  return "sft";
}

Source source_from_string(const std::string& s) {
  if (s == "sft") return Source::kSft;
  if (s == "sent") return Source::kSent;
  if (s == "qgen") return Source::kQgen;
  if (s == "rerank") return Source::kRerank;
  if (s == "triplet") return Source::kTriplet;
  throw DataError("unknown triplet source '" + s + "' (expected sft|sent|qgen|rerank|triplet)");
}

void TrainingTriplet::validate() const {
  if (query.empty()) throw DataError("triplet: empty query");
  if (positive.empty()) throw DataError("triplet: empty positive");
  if (negatives.empty() && source != Source::kSft) {
    throw DataError("triplet: source '" + to_string(source) + "' requires at least one hard negative");
  }
  if (std::find(negatives.begin(), negatives.end(), positive) != negatives.end()) {
    throw DataError("triplet: positive also listed as a hard negative (query '" + query + "')");
  }
}

Json to_json(const TrainingTriplet& t) {
  Json j{{"query", t.query}, {"positive", t.positive}, {"negatives", t.negatives},
         {"source", to_string(t.source)}};
  if (!t.ranks.is_null()) j["ranks"] = t.ranks;
  return j;
}

TrainingTriplet triplet_from_json(const Json& j) {
  if (!j.is_object()) throw DataError("triplet: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "query" && k != "positive" && k != "negatives" && k != "source" && k != "ranks") {
      throw DataError("triplet: unknown field '" + k + "'");
    }
  }
  TrainingTriplet t;
  try {
    t.query = j.at("query").get<std::string>();
    t.positive = j.at("positive").get<std::string>();
    t.negatives = j.value("negatives", std::vector<std::string>{});
    t.source = source_from_string(j.value("source", std::string("sft")));
    if (j.contains("ranks")) t.ranks = j.at("ranks");
  } catch (const Json::exception& e) {
    throw DataError(std::string("triplet: ") + e.what());
  }
  t.validate();
  return t;
}

std::vector<TrainingTriplet> read_triplets(const std::filesystem::path& path) {
  std::vector<TrainingTriplet> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    try {
      out.push_back(triplet_from_json(j));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

void write_triplets(const std::filesystem::path& path, const std::vector<TrainingTriplet>& triplets) {
  std::vector<Json> rows;
  rows.reserve(triplets.size());
  for (const auto& t : triplets) rows.push_back(to_json(t));
  write_jsonl(path, rows);
}

}  // namespace drama::objective
