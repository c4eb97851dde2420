#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "drama/augment/mix.h"
#include "drama/augment/pipeline.h"
#include "drama/data/synthetic.h"
#include "drama/encoder/config.h"
#include "drama/eval/needle.h"
#include "drama/llm/client.h"
#include "drama/objective/trainer.h"
#include "drama/pruning/pruner.h"
#include "drama/util/io.h"
#include "gradcheck_suite.h"

namespace drama::cli {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

struct EvalOptions {
  std::size_t k = 10;
  /// MRL truncation width for encoding; the full width when absent.
  std::optional<std::size_t> dim;
  /// "auto" (checkpoint when one is given, else lexical), "lexical" or
  /// "checkpoint".
  std::string teacher = "auto";
};

/// Everything a subcommand may read. Module seeds not pinned in the config
/// are derived from the top-level seed as derive_seed(seed, "<section>").
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::map<std::string, std::string> paths;
  std::map<std::string, std::string> shards;

  encoder::EncoderConfig encoder = encoder::desk_config();
  objective::TrainConfig train;
  pruning::PruneConfig prune;
  augment::MixSpec mix;
  llm::ClientConfig client;
  eval::NeedleTaskSpec needle;
  augment::AugmentConfig augment;
  data::SynthSpec synth;
  std::size_t chunk_max_tokens = 256;
  EvalOptions eval;
  /// Vocabulary words kept when building a tokenizer; 0 means half the
  /// encoder vocabulary.
  std::size_t tokenizer_max_words = 0;
  GradCheckOptions gradcheck;

  /// Seeds of modules without a seed field in their own config.
  std::uint64_t init_seed = 0;
  std::uint64_t prune_seed = 0;
  std::uint64_t pretrain_seed = 0;

  std::optional<std::string> path(const std::string& key) const;
  /// Throws ConfigError naming the missing paths.<key>.
  std::string require_path(const std::string& key) const;
};

/// Parses a raw config object. Unknown keys at any level raise ConfigError
/// naming the dotted key.
RunConfig parse_run_config(const Json& raw);

/// Resolved config, including derived seeds; hashed into the manifest.
Json to_json(const RunConfig& c);
std::map<std::string, std::uint64_t> seeds_json(const RunConfig& c);

/// Sets raw[a][b]... = value for a dotted key, creating objects on the way.
void set_dotted(Json& raw, const std::string& dotted, const Json& value);

/// "true", numbers, arrays and objects parse as JSON; anything else is a
/// string.
Json parse_flag_value(const std::string& text);

}  // namespace drama::cli
