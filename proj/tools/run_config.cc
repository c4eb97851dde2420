#include "run_config.h"

#include "drama/util/json_config.h"
#include "drama/util/rng.h"

namespace drama::cli {

namespace {

constexpr const char* kPathKeys[] = {"corpus", "queries",  "qrels",    "chunks",   "triplets",
                                     "checkpoint", "embeddings", "index", "run", "report",
                                     "out",    "out_dir",  "failures", "vocab",    "templates",
                                     "manifest"};

/// Removes and returns an explicit "seed" from a section.
std::optional<std::uint64_t> take_seed(Json& section, const std::string& name) {
  if (!section.is_object() || !section.contains("seed")) return std::nullopt;
  std::uint64_t s = 0;
  read_opt(section, "seed", s, name);
  section.erase("seed");
  return s;
}

Json section(const Json& raw, const char* key) {
  auto it = raw.find(key);
  if (it == raw.end()) return Json::object();
  if (!it->is_object()) throw ConfigError(std::string(key) + ": expected an object");
  return *it;
}

}  // namespace

std::optional<std::string> RunConfig::path(const std::string& key) const {
  auto it = paths.find(key);
  if (it == paths.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::string RunConfig::require_path(const std::string& key) const {
  auto p = path(key);
  if (!p) throw ConfigError("missing paths." + key);
  return *p;
}

RunConfig parse_run_config(const Json& raw) {
  if (!raw.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown_keys(raw,
                      {"schema_version", "seed", "threads", "paths", "encoder", "loss", "train", "prune", "mix",
                       "client", "needle", "augment", "synth", "chunk", "eval", "tokenizer", "gradcheck"},
                      "config");
  RunConfig c;
  int version = kConfigSchemaVersion;
  read_opt(raw, "schema_version", version, "config");
  if (version != kConfigSchemaVersion)
    throw ConfigError("config.schema_version: unsupported version " + std::to_string(version));
  read_opt(raw, "seed", c.seed, "config");
  read_opt(raw, "threads", c.threads, "config");
  if (c.threads == 0) throw ConfigError("config.threads: must be at least 1");

  const Json paths = section(raw, "paths");
  for (const auto& [k, v] : paths.items()) {
    if (k == "shards") {
      if (!v.is_object()) throw ConfigError("paths.shards: expected an object");
      for (const auto& [name, p] : v.items()) {
        if (!p.is_string()) throw ConfigError("paths.shards." + name + ": expected a string");
        c.shards[name] = p.get<std::string>();
      }
      continue;
    }
    if (std::find(std::begin(kPathKeys), std::end(kPathKeys), k) == std::end(kPathKeys))
      throw ConfigError("paths: unknown key '" + k + "'");
    if (!v.is_string()) throw ConfigError("paths." + k + ": expected a string");
    c.paths[k] = v.get<std::string>();
  }

  auto seed_for = [&](Json& sec, const std::string& name) {
    return take_seed(sec, name).value_or(derive_seed(c.seed, name));
  };

  c.encoder = encoder::config_from_json(section(raw, "encoder"), encoder::desk_config());

  Json train = section(raw, "train");
  c.train.seed = seed_for(train, "train");
  c.train = objective::train_config_from_json(train, c.train);
  if (raw.contains("loss")) c.train.loss = objective::loss_config_from_json(section(raw, "loss"), c.train.loss);

  Json prune = section(raw, "prune");
  c.prune_seed = seed_for(prune, "prune");
  c.prune = pruning::prune_config_from_json(prune, c.prune);

  Json mix = section(raw, "mix");
  const auto mix_seed = seed_for(mix, "mix");
  if (!mix.empty()) c.mix = augment::mix_spec_from_json(mix);
  c.mix.seed = mix_seed;

  Json client = section(raw, "client");
  c.client.seed = seed_for(client, "client");
  c.client = llm::client_config_from_json(client, c.client);

  Json needle = section(raw, "needle");
  c.needle.seed = seed_for(needle, "needle");
  c.needle = eval::needle_spec_from_json(needle, c.needle);

  Json aug = section(raw, "augment");
  c.augment.seed = seed_for(aug, "augment");
  c.augment = augment::augment_config_from_json(aug, c.augment);

  Json synth = section(raw, "synth");
  c.synth.seed = seed_for(synth, "synth");
  c.synth = data::synth_spec_from_json(synth, c.synth);

  const Json chunk = section(raw, "chunk");
  reject_unknown_keys(chunk, {"max_tokens"}, "chunk");
  read_opt(chunk, "max_tokens", c.chunk_max_tokens, "chunk");
  if (c.chunk_max_tokens == 0) throw ConfigError("chunk.max_tokens: must be positive");

  const Json ev = section(raw, "eval");
  reject_unknown_keys(ev, {"k", "dim", "teacher"}, "eval");
  read_opt(ev, "k", c.eval.k, "eval");
  if (ev.contains("dim") && !ev["dim"].is_null()) {
    std::size_t d = 0;
    read_opt(ev, "dim", d, "eval");
    c.eval.dim = d;
  }
  read_opt(ev, "teacher", c.eval.teacher, "eval");
  if (c.eval.teacher != "auto" && c.eval.teacher != "lexical" && c.eval.teacher != "checkpoint")
    throw ConfigError("eval.teacher: expected auto, lexical or checkpoint, got '" + c.eval.teacher + "'");
  if (c.eval.k == 0) throw ConfigError("eval.k: must be positive");

  const Json tok = section(raw, "tokenizer");
  reject_unknown_keys(tok, {"max_words"}, "tokenizer");
  read_opt(tok, "max_words", c.tokenizer_max_words, "tokenizer");

  Json gc = section(raw, "gradcheck");
  c.gradcheck.seed = seed_for(gc, "gradcheck");
  reject_unknown_keys(gc, {"points", "step", "coords"}, "gradcheck");
  read_opt(gc, "points", c.gradcheck.points, "gradcheck");
  read_opt(gc, "step", c.gradcheck.step, "gradcheck");
  read_opt(gc, "coords", c.gradcheck.coords, "gradcheck");
  if (!(c.gradcheck.step > 0.0)) throw ConfigError("gradcheck.step: must be positive");

  c.init_seed = derive_seed(c.seed, "init");
  c.pretrain_seed = derive_seed(c.seed, "pretrain");

  c.augment.validate();
  c.client.validate();
  c.needle.validate();
  c.synth.validate();
  c.train.loss.validate();
  return c;
}

std::map<std::string, std::uint64_t> seeds_json(const RunConfig& c) {
  return {{"seed", c.seed},          {"train", c.train.seed},     {"prune", c.prune_seed},
          {"pretrain", c.pretrain_seed}, {"init", c.init_seed},   {"mix", c.mix.seed},
          {"client", c.client.seed}, {"needle", c.needle.seed},   {"augment", c.augment.seed},
          {"synth", c.synth.seed},   {"gradcheck", c.gradcheck.seed}};
}

Json to_json(const RunConfig& c) {
  Json paths(c.paths);
  if (!c.shards.empty()) paths["shards"] = Json(c.shards);
  Json eval = {{"k", c.eval.k}, {"teacher", c.eval.teacher}, {"dim", nullptr}};
  if (c.eval.dim) eval["dim"] = *c.eval.dim;
  Json train = objective::to_json(c.train);
  train["seed"] = c.train.seed;
  Json prune = pruning::to_json(c.prune);
  prune["seed"] = c.prune_seed;
  return {{"schema_version", kConfigSchemaVersion},
          {"seed", c.seed},
          {"threads", c.threads},
          {"paths", paths},
          {"encoder", encoder::to_json(c.encoder)},
          {"train", train},
          {"prune", prune},
          {"mix", augment::to_json(c.mix)},
          {"client", llm::to_json(c.client)},
          {"needle", eval::to_json(c.needle)},
          {"augment", augment::to_json(c.augment)},
          {"synth", data::to_json(c.synth)},
          {"chunk", {{"max_tokens", c.chunk_max_tokens}}},
          {"eval", eval},
          {"tokenizer", {{"max_words", c.tokenizer_max_words}}},
          {"gradcheck",
           {{"points", c.gradcheck.points},
            {"step", c.gradcheck.step},
            {"coords", c.gradcheck.coords},
            {"seed", c.gradcheck.seed}}},
          {"derived_seeds", Json(seeds_json(c))}};
}

void set_dotted(Json& raw, const std::string& dotted, const Json& value) {
  Json* node = &raw;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("bad config key '" + dotted + "'");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

Json parse_flag_value(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || j.is_string()) return Json(text);
  return j;
}

}  // namespace drama::cli
