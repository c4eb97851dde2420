#include "drama/data/pseudo_words.h"

#include <algorithm>
#include <cmath>

#include "drama/util/error.h"

namespace drama::data {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

}  // namespace

std::string PseudoWordGen::next(std::size_t min_syllables, std::size_t max_syllables, const std::string& suffix) {
  if (min_syllables < 1 || max_syllables < min_syllables) throw ConfigError("pseudo words: bad syllable range");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const std::size_t n = min_syllables + uniform_index(rng_, max_syllables - min_syllables + 1);
    std::string w;
    for (std::size_t s = 0; s < n; ++s) {
      w += kConsonants[uniform_index(rng_, kConsonants.size())];
      w += kVowels[uniform_index(rng_, kVowels.size())];
    }
    w += suffix;
    if (used_.insert(w).second) return w;
  }
  throw ConfigError("pseudo words: syllable range exhausted");
}

std::vector<std::string> PseudoWordGen::batch(std::size_t n, std::size_t min_syllables, std::size_t max_syllables,
                                              const std::string& suffix) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(next(min_syllables, max_syllables, suffix));
  return out;
}

ZipfSampler::ZipfSampler(std::size_t n, double exponent) {
  if (n == 0) throw ConfigError("zipf sampler over zero ranks");
  double acc = 0.0;
  cdf_.reserve(n);
  for (std::size_t r = 1; r <= n; ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r), exponent);
    cdf_.push_back(acc);
  }
  for (double& c : cdf_) c /= acc;
}

std::size_t ZipfSampler::operator()(Rng& rng) const {
  const double u = uniform_open(rng);
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

}  // namespace drama::data
