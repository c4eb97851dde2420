#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.h"
#include "drama/util/error.h"
#include "drama/util/hash.h"
#include "drama/util/parallel.h"
#include "run_config.h"

namespace {

using drama::Json;
namespace cli = drama::cli;

constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitClient = 4;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::map<std::string, std::string> paths;
  std::vector<std::string> shards;
  std::vector<std::string> sets;
  std::vector<std::string> ratios;
  std::optional<std::size_t> total, k, dim, steps, max_tokens;
  std::string teacher, endpoint, mode, log_level = "info";
};

std::pair<std::string, std::string> split_kv(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw drama::ConfigError(std::string(flag) + ": expected KEY=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

Json load_raw(const Flags& f) {
  Json raw = Json::object();
  if (!f.config.empty()) {
    std::string text;
    try {
      text = drama::read_text_file(f.config);
    } catch (const drama::Error& e) {
      throw drama::ConfigError(std::string("config: ") + e.what());
    }
    raw = Json::parse(text, nullptr, false);
    if (raw.is_discarded()) throw drama::ConfigError("config: " + f.config + " is not valid JSON");
    if (!raw.is_object()) throw drama::ConfigError("config: expected a JSON object");
  }
  if (f.seed) raw["seed"] = *f.seed;
  if (f.threads) raw["threads"] = *f.threads;
  for (const auto& [k, v] : f.paths) cli::set_dotted(raw, "paths." + k, v);
  for (const auto& s : f.shards) {
    auto [name, path] = split_kv(s, "--shard");
    raw["paths"]["shards"][name] = path;
  }
  for (const auto& s : f.ratios) {
    auto [name, w] = split_kv(s, "--ratio");
    raw["mix"]["ratios"][name] = cli::parse_flag_value(w);
  }
  if (f.total) raw["mix"]["total"] = *f.total;
  if (f.k) raw["eval"]["k"] = *f.k;
  if (f.dim) raw["eval"]["dim"] = *f.dim;
  if (f.max_tokens) raw["chunk"]["max_tokens"] = *f.max_tokens;
  if (!f.teacher.empty()) raw["eval"]["teacher"] = f.teacher;
  if (!f.endpoint.empty()) raw["client"]["endpoint"] = f.endpoint;
  for (const auto& s : f.sets) {
    auto [key, value] = split_kv(s, "--set");
    cli::set_dotted(raw, key, cli::parse_flag_value(value));
  }
  return raw;
}

void apply_steps(Json& raw, const std::string& command, std::size_t steps) {
  if (command == "train") raw["train"]["steps"] = steps;
  else if (command == "prune") raw["prune"]["prune_steps"] = steps;
  else if (command == "pretrain") raw["prune"]["pretrain_steps"] = steps;
  else throw drama::ConfigError("--steps does not apply to '" + command + "'");
}

int execute(const std::string& command, const Flags& f) {
  Json raw = load_raw(f);
  if (f.steps) apply_steps(raw, command, *f.steps);
  const cli::RunConfig rc = cli::parse_run_config(raw);
  drama::set_max_threads(rc.threads);
  const Json resolved = cli::to_json(rc);
  spdlog::info("{}: config hash {}", command, drama::sha256_hex(drama::canonical_dump(resolved)));

  cli::CommandArgs args;
  args.mode = f.mode;
  const cli::Artifacts a = cli::run_command(command, rc, args);

  const std::string mpath = cli::manifest_path(command, rc);
  if (!mpath.empty()) {
    const std::filesystem::path p(mpath);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    drama::write_text_file(p, cli::build_manifest(command, args, rc, a).dump(2) + "\n");
    spdlog::info("manifest: {}", mpath);
  }
  return a.exit_code;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("-c,--config", f.config, "JSON run config")->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "top-level seed; module seeds derive from it");
  sub->add_option("--threads", f.threads, "worker cap for parallel sections");
  sub->add_option("--set", f.sets, "override any config key, e.g. --set train.lr=0.002");
  sub->add_option("--manifest", f.paths["manifest"], "manifest output path");
  sub->add_option("--log-level", f.log_level, "trace|debug|info|warn|error|off");
}

void add_path(CLI::App* sub, Flags& f, const char* flag, const char* key, const char* help) {
  sub->add_option(flag, f.paths[key], help);
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_logger_st("drama");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);

  CLI::App app{"drama: dense retrieval training, pruning, augmentation and evaluation"};
  app.require_subcommand(1);
  Flags f;
  std::string chosen;
  for (const auto& name : cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, cli::command_help(name));
    add_common(sub, f);
    if (name == "augment") sub->add_option("--mode", f.mode, "sent|qgen|rerank|triplet")->required();
    if (name == "train" || name == "prune" || name == "pretrain")
      sub->add_option("--steps", f.steps, "number of optimization steps");
    if (name == "mix") {
      sub->add_option("--shard", f.shards, "NAME=PATH triplet shard (repeatable)");
      sub->add_option("--ratio", f.ratios, "NAME=WEIGHT mixing weight (repeatable)");
      sub->add_option("--total", f.total, "triplets in the mixed output");
    }
    if (name == "chunk") sub->add_option("--max-tokens", f.max_tokens, "chunk length in whitespace pieces");
    if (name == "augment" || name == "eval" || name == "encode" || name == "search" || name == "needle") {
      sub->add_option("--teacher", f.teacher, "auto|lexical|checkpoint");
      sub->add_option("--dim", f.dim, "MRL truncation width");
    }
    if (name == "augment") sub->add_option("--endpoint", f.endpoint, "chat endpoint URL, or 'mock'");
    if (name == "eval" || name == "search" || name == "needle") sub->add_option("--k", f.k, "ranking depth");
    add_path(sub, f, "--corpus", "corpus", "corpus JSON lines");
    add_path(sub, f, "--queries", "queries", "queries JSON lines");
    add_path(sub, f, "--qrels", "qrels", "qrels TSV");
    add_path(sub, f, "--chunks", "chunks", "chunk JSON lines");
    add_path(sub, f, "--triplets", "triplets", "training triplets JSON lines");
    add_path(sub, f, "--checkpoint", "checkpoint", "input checkpoint");
    add_path(sub, f, "--embeddings", "embeddings", "embeddings JSON lines");
    add_path(sub, f, "--index", "index", "index file");
    add_path(sub, f, "--run", "run", "TREC run file");
    add_path(sub, f, "--report", "report", "report JSON");
    add_path(sub, f, "-o,--out", "out", "primary output file");
    add_path(sub, f, "--out-dir", "out_dir", "output directory");
    add_path(sub, f, "--failures", "failures", "augmentation failure log");
    add_path(sub, f, "--vocab", "vocab", "tokenizer vocabulary file");
    add_path(sub, f, "--templates", "templates", "prompt template directory");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const auto level = spdlog::level::from_str(f.log_level);
  spdlog::set_level(level);
  // Empty flag values mean "not given".
  for (auto it = f.paths.begin(); it != f.paths.end();) it = it->second.empty() ? f.paths.erase(it) : std::next(it);

  try {
    return execute(chosen, f);
  } catch (const drama::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const drama::ClientError& e) {
    spdlog::error("client error: {}", e.what());
    return kExitClient;
  } catch (const drama::DataError& e) {
    spdlog::error("data error: {}", e.what());
    return kExitData;
  } catch (const drama::ShapeError& e) {
    spdlog::error("data error: {}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
}
