#pragma once

#include <cstdint>
#include <vector>

#include "drama/data/corpus.h"
#include "drama/objective/triplet.h"
#include "drama/util/io.h"

namespace drama::data {

/// Knobs of the topic-structured toy corpus. Each document belongs to one
/// topic and mixes topic words, a few entity words of its own and shared
/// background words, in short sentences. Queries paraphrase one document by
/// naming some of its entities and topic words.
struct SynthSpec {
  std::size_t num_docs = 2000;
  std::size_t doc_tokens = 50;
  std::size_t num_topics = 50;
  std::size_t topic_words = 12;
  std::size_t background_words = 300;
  std::size_t entities_per_doc = 3;
  std::size_t eval_queries = 200;
  std::size_t train_queries = 200;
  /// Negatives per supervised triplet, drawn from the positive's topic.
  std::size_t train_negatives = 7;
  std::uint64_t seed = 0;

  void validate() const;
};

Json to_json(const SynthSpec& s);
SynthSpec synth_spec_from_json(const Json& j, const SynthSpec& defaults = {});

struct SynthData {
  std::vector<Document> corpus;
  /// Held-out evaluation queries and their judgments (target document
  /// grade 1).
  std::vector<Query> eval_queries;
  std::vector<std::tuple<std::string, std::string, int>> eval_qrels;
  /// Supervised triplets over documents disjoint from the eval targets.
  std::vector<objective::TrainingTriplet> train;
};

SynthData gen_synthetic(const SynthSpec& spec);

}  // namespace drama::data
