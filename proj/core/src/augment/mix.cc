#include "drama/augment/mix.h"

#include <algorithm>
#include <cmath>

#include "drama/util/error.h"
#include "drama/util/json_config.h"
#include "drama/util/rng.h"

namespace drama::augment {
namespace {

// Splits `amount` over the names in `weights` by largest remainder.
std::map<std::string, std::size_t> largest_remainder(const std::map<std::string, double>& weights,
                                                     std::size_t amount) {
  double sum = 0.0;
  for (const auto& [_, w] : weights) sum += w;
  std::map<std::string, std::size_t> out;
  std::vector<std::pair<double, std::string>> frac;
  std::size_t given = 0;
  for (const auto& [name, w] : weights) {
    const double exact = static_cast<double>(amount) * w / sum;
    const auto whole = static_cast<std::size_t>(std::floor(exact));
    out[name] = whole;
    given += whole;
    frac.emplace_back(exact - static_cast<double>(whole), name);
  }
  std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; given < amount && i < frac.size(); ++i, ++given) ++out[frac[i].second];
  return out;
}

}  // namespace

void MixSpec::validate() const {
  if (ratios.empty()) throw ConfigError("mix.ratios: empty");
  for (const auto& [name, w] : ratios)
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("mix.ratios." + name + ": weight must be > 0");
  if (total < 1) throw ConfigError("mix.total: must be >= 1");
}

Json to_json(const MixSpec& s) { return Json{{"ratios", s.ratios}, {"total", s.total}, {"seed", s.seed}}; }

MixSpec mix_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("mix: expected an object");
  reject_unknown_keys(j, {"ratios", "total", "seed"}, "mix");
  MixSpec s;
  read_opt(j, "ratios", s.ratios, "mix");
  read_opt(j, "total", s.total, "mix");
  read_opt(j, "seed", s.seed, "mix");
  s.validate();
  return s;
}

std::map<std::string, std::size_t> mix_quotas(const MixSpec& spec, const std::map<std::string, std::size_t>& available,
                                              std::vector<std::string>* log) {
  spec.validate();
  auto quotas = largest_remainder(spec.ratios, spec.total);
  std::map<std::string, double> open = spec.ratios;
  for (;;) {
    std::size_t shortfall = 0;
    for (auto& [name, q] : quotas) {
      const std::size_t have = available.count(name) ? available.at(name) : 0;
      if (q > have) {
        if (log) {
          log->push_back("source '" + name + "' has " + std::to_string(have) + " of its quota " + std::to_string(q) +
                         "; shortfall redistributed");
        }
        shortfall += q - have;
        q = have;
      }
      if (q >= have) open.erase(name);
    }
    if (shortfall == 0) break;
    if (open.empty()) {
      if (log) log->push_back("all sources exhausted; " + std::to_string(shortfall) + " items short of total");
      break;
    }
    for (const auto& [name, extra] : largest_remainder(open, shortfall)) quotas[name] += extra;
  }
  return quotas;
}

MixResult mix_sources(const std::map<std::string, std::vector<objective::TrainingTriplet>>& shards,
                      const MixSpec& spec) {
  spec.validate();
  std::map<std::string, std::size_t> available;
  for (const auto& [name, _] : spec.ratios) {
    auto it = shards.find(name);
    if (it == shards.end()) throw ConfigError("mix: no shard for source '" + name + "'");
    available[name] = it->second.size();
  }
  MixResult res;
  res.counts = mix_quotas(spec, available, &res.log);
  for (const auto& [name, quota] : res.counts) {
    const auto& shard = shards.at(name);
    std::vector<std::size_t> idx(shard.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng = make_rng(spec.seed, "mix." + name);
    for (std::size_t i = 0; i < quota; ++i) {
      const std::size_t j = i + uniform_index(rng, idx.size() - i);
      std::swap(idx[i], idx[j]);
      res.triplets.push_back(shard[idx[i]]);
    }
  }
  Rng order = make_rng(spec.seed, "mix.order");
  shuffle(res.triplets, order);
  return res;
}

}  // namespace drama::augment
