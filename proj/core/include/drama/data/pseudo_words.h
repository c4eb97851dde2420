#pragma once

#include <set>
#include <string>
#include <vector>

#include "drama/util/rng.h"

namespace drama::data {

/// Draws pronounceable consonant-vowel words that are unique across every
/// call on the same generator. All of them end in a vowel; `suffix` can be
/// used to carve out a disjoint family (e.g. "x" for needle keys).
class PseudoWordGen {
 public:
  explicit PseudoWordGen(Rng rng) : rng_(std::move(rng)) {}

  std::string next(std::size_t min_syllables, std::size_t max_syllables, const std::string& suffix = "");
  std::vector<std::string> batch(std::size_t n, std::size_t min_syllables, std::size_t max_syllables,
                                 const std::string& suffix = "");
  /// Marks words as taken so they are never produced.
  void reserve(const std::vector<std::string>& words) { used_.insert(words.begin(), words.end()); }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

/// Zipf(1)-weighted index sampler over n ranks.
class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n, double exponent = 1.0);
  std::size_t operator()(Rng& rng) const;

 private:
  std::vector<double> cdf_;
};

}  // namespace drama::data
