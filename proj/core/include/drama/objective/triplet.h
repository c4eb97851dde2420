#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "drama/util/io.h"

namespace drama::objective {

/// Provenance of a training triplet: supervised data or one of the
/// augmentation pipelines.
enum class Source { kSft, kSent, kQgen, kRerank, kTriplet };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

/// One unit of contrastive supervision.
struct TrainingTriplet {
  std::string query;
  std::string positive;
  std::vector<std::string> negatives;
  Source source = Source::kSft;
  /// Optional pipeline metadata (retrieval ranks), carried through unchanged.
  Json ranks;

  /// Throws DataError: empty query/positive, positive repeated among the
  /// negatives, or no negatives for a non-sft triplet.
  void validate() const;

  friend bool operator==(const TrainingTriplet& a, const TrainingTriplet& b) {
    return a.query == b.query && a.positive == b.positive && a.negatives == b.negatives &&
           a.source == b.source && a.ranks == b.ranks;
  }
};

/// JSON-lines schema: {"query", "positive", "negatives", "source"} plus an
/// optional "ranks" object.
Json to_json(const TrainingTriplet& t);
TrainingTriplet triplet_from_json(const Json& j);

std::vector<TrainingTriplet> read_triplets(const std::filesystem::path& path);
void write_triplets(const std::filesystem::path& path, const std::vector<TrainingTriplet>& triplets);

}  // namespace drama::objective
