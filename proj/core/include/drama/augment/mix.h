#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drama/objective/triplet.h"
#include "drama/util/io.h"

namespace drama::augment {

struct MixSpec {
  /// Source tag -> positive weight.
  std::map<std::string, double> ratios;
  std::size_t total = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

Json to_json(const MixSpec& s);
MixSpec mix_spec_from_json(const Json& j);

/// Integer quotas by largest remainder (ties by source name). Sources with
/// fewer items than their quota keep all of them; the shortfall is spread
/// over the others in proportion to their weights, again by largest
/// remainder, until it is absorbed or every source is exhausted.
std::map<std::string, std::size_t> mix_quotas(const MixSpec& spec, const std::map<std::string, std::size_t>& available,
                                              std::vector<std::string>* log = nullptr);

struct MixResult {
  std::vector<objective::TrainingTriplet> triplets;
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> log;
};

/// Seeded sampling without replacement per source, then one seeded shuffle
/// of the union. Throws ConfigError if a source in the spec has no shard.
MixResult mix_sources(const std::map<std::string, std::vector<objective::TrainingTriplet>>& shards,
                      const MixSpec& spec);

}  // namespace drama::augment
