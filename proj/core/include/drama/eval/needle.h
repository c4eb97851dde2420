#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drama/data/corpus.h"
#include "drama/eval/metrics.h"
#include "drama/util/io.h"

namespace drama::eval {

/// A needle sentence and the question that asks for it. Placeholders:
/// {key} (a pseudo-word unique to the task) and {value}. Apart from {key},
/// the question should share no word with the needle or the filler, so the
/// needle document is the only lexical match.
struct NeedleTemplate {
  std::string needle;
  std::string question;

  friend bool operator==(const NeedleTemplate&, const NeedleTemplate&) = default;
};

struct NeedleTaskSpec {
  std::vector<std::size_t> lengths{256, 512, 1024};
  std::uint64_t seed = 0;
  std::vector<NeedleTemplate> templates{
      {"{key} guards the {value} vault .", "what does {key} protect ?"},
      {"{key} was born in {value} town .", "where is {key} from ?"}};
  std::size_t tasks_per_length = 10;
  std::size_t distractors = 99;
  std::size_t filler_vocab = 400;

  /// Throws ConfigError: empty or non-ascending lengths, a length shorter
  /// than a needle, a template missing {key}, zero tasks.
  void validate() const;
  friend bool operator==(const NeedleTaskSpec&, const NeedleTaskSpec&) = default;
};

Json to_json(const NeedleTaskSpec& s);
NeedleTaskSpec needle_spec_from_json(const Json& j, const NeedleTaskSpec& defaults = {});

struct NeedleSet {
  std::size_t length = 0;
  std::vector<data::Document> corpus;
  std::vector<data::Query> queries;
  Qrels qrels;
};

/// One NeedleSet per requested length. Every document has exactly `length`
/// whitespace pieces. Ids: "L{len}-t{task}" for queries and
/// "L{len}-t{task}-d{j}" for documents; the needle's slot j is seeded.
std::vector<NeedleSet> gen_needle_corpus(const NeedleTaskSpec& spec);

}  // namespace drama::eval
