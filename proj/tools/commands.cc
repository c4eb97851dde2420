#include "commands.h"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>

#include <spdlog/spdlog.h>

#include "drama/augment/chunk.h"
#include "drama/augment/mix.h"
#include "drama/augment/pipeline.h"
#include "drama/data/corpus.h"
#include "drama/data/synthetic.h"
#include "drama/encoder/checkpoint.h"
#include "drama/encoder/embedder.h"
#include "drama/encoder/parameters.h"
#include "drama/eval/index.h"
#include "drama/eval/lexical.h"
#include "drama/eval/metrics.h"
#include "drama/eval/needle.h"
#include "drama/eval/runner.h"
#include "drama/llm/client.h"
#include "drama/llm/template.h"
#include "drama/objective/triplet.h"
#include "drama/pruning/pruner.h"
#include "drama/util/hash.h"
#include "drama/util/rng.h"

namespace drama::cli {

namespace fs = std::filesystem;
using encoder::Checkpoint;
using encoder::EncoderConfig;
using encoder::ParameterSet;
using encoder::TokenSequence;
using encoder::WordTokenizer;

namespace {

struct Model {
  Checkpoint ckpt;
  std::shared_ptr<const WordTokenizer> tokenizer;
};

std::vector<std::string> vocab_of(const Json& metadata) {
  auto it = metadata.find("vocab");
  if (it == metadata.end()) return {};
  if (!it->is_array()) throw DataError("checkpoint metadata.vocab: expected an array");
  return it->get<std::vector<std::string>>();
}

Model load_model(const std::string& path) {
  Model m;
  m.ckpt = encoder::load_checkpoint(path);
  m.tokenizer = std::make_shared<WordTokenizer>(m.ckpt.config.vocab_size, vocab_of(m.ckpt.metadata));
  return m;
}

std::size_t max_words(const RunConfig& rc, const EncoderConfig& cfg) {
  return rc.tokenizer_max_words ? rc.tokenizer_max_words : cfg.vocab_size / 2;
}

std::unique_ptr<encoder::TextEmbedder> make_embedder(const RunConfig& rc, std::span<const std::string> fit_texts,
                                                     Artifacts& a, std::optional<std::size_t> dim) {
  std::string teacher = rc.eval.teacher;
  if (teacher == "auto") teacher = rc.path("checkpoint") ? "checkpoint" : "lexical";
  if (teacher == "lexical") {
    if (fit_texts.empty()) throw ConfigError("lexical teacher needs a corpus to fit (paths.corpus)");
    spdlog::info("embedder: lexical over {} texts", fit_texts.size());
    return std::make_unique<eval::LexicalEmbedder>(fit_texts);
  }
  const std::string path = rc.require_path("checkpoint");
  a.inputs.push_back(path);
  Model m = load_model(path);
  spdlog::info("embedder: checkpoint {} (dim {})", path, dim ? *dim : m.ckpt.config.hidden_dim);
  return std::make_unique<encoder::EncoderEmbedder>(m.ckpt.config, std::move(m.ckpt.params), m.tokenizer, dim);
}

std::vector<std::string> texts_of(const std::vector<data::Document>& docs) {
  std::vector<std::string> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.text);
  return out;
}

/// Sequences of at least two tokens, cut to the model's context.
std::vector<TokenSequence> lm_sequences(const std::vector<data::Document>& docs, const encoder::Tokenizer& tok,
                                        const EncoderConfig& cfg) {
  std::vector<TokenSequence> out;
  for (const auto& d : docs) {
    TokenSequence s = tok.encode(d.text, cfg.max_positions);
    if (s.active() >= 2) out.push_back(std::move(s));
  }
  if (out.empty()) throw DataError("corpus has no document with at least two tokens");
  return out;
}

std::string out_file(const RunConfig& rc) { return rc.require_path("out"); }

/// First of `keys` that is set; ConfigError naming the first otherwise.
std::string first_path(const RunConfig& rc, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (auto p = rc.path(k)) return *p;
  return rc.require_path(*keys.begin());
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).generic_string(); }

eval::Qrels qrels_of(const std::vector<std::tuple<std::string, std::string, int>>& rows) {
  eval::Qrels q;
  for (const auto& [qid, did, g] : rows) q[qid][did] = g;
  return q;
}

// ---------------------------------------------------------------------------

Artifacts cmd_synth(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const fs::path dir = rc.require_path("out_dir");
  fs::create_directories(dir);
  const data::SynthData d = data::gen_synthetic(rc.synth);
  const std::string corpus = join(dir, "corpus.jsonl"), queries = join(dir, "queries.jsonl"),
                    qrels = join(dir, "qrels.tsv"), train = join(dir, "train.jsonl");
  data::write_corpus(corpus, d.corpus);
  data::write_queries(queries, d.eval_queries);
  eval::write_qrels(qrels, qrels_of(d.eval_qrels));
  objective::write_triplets(train, d.train);
  a.outputs = {corpus, queries, qrels, train};
  a.details = {{"documents", d.corpus.size()}, {"queries", d.eval_queries.size()}, {"train", d.train.size()}};
  return a;
}

Artifacts cmd_chunk(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string in = rc.require_path("corpus"), out = out_file(rc);
  a.inputs.push_back(in);
  const auto chunks = augment::chunk_corpus(data::read_corpus(in), rc.chunk_max_tokens);
  ensure_parent(out);
  data::write_corpus(out, augment::to_documents(chunks));
  a.outputs.push_back(out);
  a.details = {{"chunks", chunks.size()}, {"max_tokens", rc.chunk_max_tokens}};
  return a;
}

Artifacts cmd_augment(const RunConfig& rc, const CommandArgs& args) {
  Artifacts a;
  if (args.mode.empty()) throw ConfigError("augment: --mode is required (sent, qgen, rerank, triplet)");
  const augment::AugmentMode mode = augment::augment_mode_from_string(args.mode);
  const std::string out = out_file(rc);
  const std::string failures_path = rc.path("failures").value_or(out + ".failures.jsonl");

  std::optional<llm::Client> client;
  if (mode != augment::AugmentMode::kSent) {
    const fs::path dir = rc.path("templates").value_or(llm::TemplateSet::default_dir().string());
    client.emplace(llm::Client::from_config(rc.client, llm::TemplateSet::load(dir)));
    a.templates = client->template_hashes();
  }

  augment::AugmentOutput res;
  if (mode == augment::AugmentMode::kTriplet) {
    if (rc.augment.num_queries == 0) throw ConfigError("augment.num_queries: must be positive for triplet mode");
    res = augment::run_triplet(*client, rc.augment);
  } else {
    const std::string in = first_path(rc, {"chunks", "corpus"});
    a.inputs.push_back(in);
    const auto docs = data::read_corpus(in);
    const auto chunks = augment::from_documents(docs);
    const auto texts = texts_of(docs);
    auto teacher = make_embedder(rc, texts, a, rc.eval.dim);
    const eval::ExactIndex index = eval::build_index(*teacher, docs);
    switch (mode) {
      case augment::AugmentMode::kSent: res = augment::run_sent(chunks, index, *teacher, rc.augment); break;
      case augment::AugmentMode::kQgen: res = augment::run_qgen(chunks, index, *teacher, *client, rc.augment); break;
      case augment::AugmentMode::kRerank:
        res = augment::run_rerank(chunks, index, *teacher, *client, rc.augment);
        break;
      case augment::AugmentMode::kTriplet: break;
    }
  }
  ensure_parent(out);
  objective::write_triplets(out, res.triplets);
  std::vector<Json> fails;
  for (const auto& f : res.failures) fails.push_back(to_json(f));
  write_jsonl(failures_path, fails);
  a.outputs = {out, failures_path};
  if (res.triplets.empty() && !res.failures.empty())
    throw ClientError("every query failed (" + std::to_string(res.failures.size()) + "), first: " +
                          res.failures.front().reason + "; see " + failures_path,
                      0);
  a.details = {{"mode", args.mode},
               {"triplets", res.triplets.size()},
               {"examples", res.examples.size()},
               {"failures", res.failures.size()},
               {"dropped", res.dropped}};
  spdlog::info("augment {}: {} triplets, {} dropped", args.mode, res.triplets.size(), res.dropped);
  return a;
}

Artifacts cmd_mix(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  if (rc.shards.empty()) throw ConfigError("mix: paths.shards is empty");
  std::map<std::string, std::vector<objective::TrainingTriplet>> shards;
  for (const auto& [name, path] : rc.shards) {
    a.inputs.push_back(path);
    shards[name] = objective::read_triplets(path);
  }
  const augment::MixResult r = augment::mix_sources(shards, rc.mix);
  const std::string out = out_file(rc);
  ensure_parent(out);
  objective::write_triplets(out, r.triplets);
  a.outputs.push_back(out);
  for (const auto& line : r.log) spdlog::warn("mix: {}", line);
  a.details = {{"counts", Json(r.counts)}, {"log", Json(r.log)}};
  for (const auto& [name, n] : r.counts) std::cout << name << '\t' << n << '\n';
  return a;
}

Artifacts cmd_train(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string in = rc.require_path("triplets"), out = out_file(rc);
  a.inputs.push_back(in);
  const auto triplets = objective::read_triplets(in);
  if (triplets.empty()) throw DataError(in + ": no triplets");

  EncoderConfig cfg = rc.encoder;
  ParameterSet params;
  std::vector<std::string> words;
  if (auto init = rc.path("checkpoint")) {
    a.inputs.push_back(*init);
    Checkpoint ck = encoder::load_checkpoint(*init);
    cfg = ck.config;
    params = std::move(ck.params);
    words = vocab_of(ck.metadata);
  } else {
    cfg.validate();
    params = encoder::init_parameters(cfg, rc.init_seed);
    if (auto vocab = rc.path("vocab")) {
      a.inputs.push_back(*vocab);
      words = WordTokenizer::from_vocab_file(*vocab, cfg.vocab_size).words();
    } else {
      std::vector<std::string> texts;
      for (const auto& t : triplets) {
        texts.push_back(t.query);
        texts.push_back(t.positive);
        for (const auto& n : t.negatives) texts.push_back(n);
      }
      words = WordTokenizer::build_vocab(texts, max_words(rc, cfg));
    }
  }
  const WordTokenizer tok(cfg.vocab_size, words);
  objective::Adam opt(params);
  const std::size_t every = std::max<std::size_t>(1, rc.train.steps / 10);
  const auto report = objective::train_retriever(cfg, params, tok, triplets, rc.train, opt,
                                                 [&](std::size_t step, const objective::StepResult& s) {
                                                   if ((step + 1) % every == 0)
                                                     spdlog::info("train step {}: loss {:.6f}", step + 1, s.loss);
                                                 });
  Checkpoint ck{cfg, std::move(params), {}, Json::object()};
  ck.metadata["vocab"] = words;
  ck.metadata["train"] = objective::to_json(rc.train);
  ck.metadata["final_loss"] = report.losses.empty() ? 0.0 : report.losses.back();
  ensure_parent(out);
  encoder::save_checkpoint(out, ck);
  a.outputs.push_back(out);
  a.details = {{"steps", report.losses.size()},
               {"first_loss", report.losses.empty() ? 0.0 : report.losses.front()},
               {"final_loss", ck.metadata["final_loss"]},
               {"duplicate_candidates", report.duplicate_candidates}};
  return a;
}

Json sums_json(const pruning::MaskSums& s) {
  return {{"head", s.head}, {"intermediate", s.intermediate}, {"layer", s.layer}, {"hidden", s.hidden}};
}

Artifacts cmd_prune(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string ckpath = rc.require_path("checkpoint"), corpus = rc.require_path("corpus"), out = out_file(rc);
  a.inputs = {ckpath, corpus};
  Model m = load_model(ckpath);
  const EncoderConfig cfg = m.ckpt.config;
  rc.prune.target.validate(cfg);
  const auto seqs = lm_sequences(data::read_corpus(corpus), *m.tokenizer, cfg);
  pruning::PruneState state = pruning::PruneState::init(cfg, std::move(m.ckpt.params), rc.prune);
  Rng rng = make_rng(rc.prune_seed, "prune.steps");
  Rng batch_rng = make_rng(rc.prune_seed, "prune.batches");
  const std::size_t bs = std::min(rc.prune.batch_size, seqs.size());
  const std::size_t every = std::max<std::size_t>(1, rc.prune.prune_steps / 10);
  pruning::PruneStepResult last;
  for (std::size_t step = 0; step < rc.prune.prune_steps; ++step) {
    std::vector<TokenSequence> batch;
    for (std::size_t i = 0; i < bs; ++i) batch.push_back(seqs[uniform_index(batch_rng, seqs.size())]);
    last = pruning::prune_step(state, batch, rc.prune.target, pruning::rates_at(rc.prune, step), rng);
    if ((step + 1) % every == 0) spdlog::info("prune step {}: lm {:.5f} total {:.5f}", step + 1, last.lm, last.total);
  }
  const auto sums = pruning::deterministic_sums(state.masks);
  Checkpoint ck{cfg, std::move(state.params), state.masks.as_parameters(), m.ckpt.metadata};
  ck.metadata["prune"] = {{"config", pruning::to_json(rc.prune)}, {"deterministic_sums", sums_json(sums)},
                          {"final_lm", last.lm}};
  ensure_parent(out);
  encoder::save_checkpoint(out, ck);
  a.outputs.push_back(out);
  a.details = {{"deterministic_sums", sums_json(sums)}, {"final_lm", last.lm}};
  return a;
}

Artifacts cmd_snap(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string ckpath = rc.require_path("checkpoint"), out = out_file(rc);
  a.inputs.push_back(ckpath);
  Checkpoint in = encoder::load_checkpoint(ckpath);
  if (!in.extra.contains("mask.layer")) throw DataError(ckpath + ": no pruning masks; run `drama prune` first");
  pruning::MaskSet masks = pruning::MaskSet::init(in.config, 0.0, rc.prune.hard_concrete);
  masks.assign(in.extra);
  const auto snap =
      pruning::snap_architecture(in.config, in.params, masks, rc.prune.target, rc.prune.fold_mask_values);
  Checkpoint ck{snap.config, snap.params, {}, in.metadata};
  ck.metadata.erase("prune");
  ck.metadata["snap"] = {{"kept_heads", snap.kept_heads},
                         {"kept_intermediate_counts", Json::array()},
                         {"kept_layers", snap.kept_layers},
                         {"kept_hidden", snap.kept_hidden}};
  for (const auto& k : snap.kept_intermediate) ck.metadata["snap"]["kept_intermediate_counts"].push_back(k.size());
  ensure_parent(out);
  encoder::save_checkpoint(out, ck);
  a.outputs.push_back(out);
  a.details = {{"config", encoder::to_json(snap.config)},
               {"parameters", encoder::parameter_count(snap.config)},
               {"source_parameters", encoder::parameter_count(in.config)}};
  return a;
}

Artifacts cmd_pretrain(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string ckpath = rc.require_path("checkpoint"), corpus = rc.require_path("corpus"), out = out_file(rc);
  a.inputs = {ckpath, corpus};
  Model m = load_model(ckpath);
  const EncoderConfig cfg = m.ckpt.config;
  const auto seqs = lm_sequences(data::read_corpus(corpus), *m.tokenizer, cfg);
  pruning::PretrainConfig pc{rc.prune.pretrain_steps, rc.prune.batch_size, rc.prune.pretrain_lr, rc.pretrain_seed};
  ParameterSet params = std::move(m.ckpt.params);
  objective::Adam opt(params);
  const double before = pruning::evaluate_lm(cfg, params, seqs);
  const auto losses = pruning::continued_pretrain(cfg, params, seqs, pc, opt);
  const double after = pruning::evaluate_lm(cfg, params, seqs);
  spdlog::info("pretrain: lm {:.5f} -> {:.5f} over {} steps", before, after, losses.size());
  Checkpoint ck{cfg, std::move(params), {}, m.ckpt.metadata};
  ck.metadata["pretrain"] = {{"steps", pc.steps}, {"lm_before", before}, {"lm_after", after}};
  ensure_parent(out);
  encoder::save_checkpoint(out, ck);
  a.outputs.push_back(out);
  a.details = {{"lm_before", before}, {"lm_after", after}};
  return a;
}

Artifacts cmd_encode(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string corpus = rc.require_path("corpus"), out = out_file(rc);
  a.inputs.push_back(corpus);
  const auto docs = data::read_corpus(corpus);
  const auto texts = texts_of(docs);
  auto emb = make_embedder(rc, texts, a, rc.eval.dim);
  std::size_t truncated = 0;
  const auto vecs = emb->embed_all(texts, &truncated);
  std::vector<Json> rows;
  rows.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) rows.push_back({{"id", docs[i].id}, {"embedding", vecs[i]}});
  ensure_parent(out);
  write_jsonl(out, rows);
  a.outputs.push_back(out);
  a.details = {{"documents", docs.size()}, {"dim", emb->dim()}, {"truncated", truncated}};
  return a;
}

Artifacts cmd_index(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string in = rc.require_path("embeddings"), out = out_file(rc);
  a.inputs.push_back(in);
  std::vector<std::pair<std::string, std::vector<double>>> pairs;
  for_each_jsonl(in, [&](const Json& j, std::size_t line) {
    if (!j.contains("id") || !j.contains("embedding"))
      throw DataError(in + ":" + std::to_string(line) + ": expected {\"id\", \"embedding\"}");
    try {
      pairs.emplace_back(j["id"].get<std::string>(), j["embedding"].get<std::vector<double>>());
    } catch (const Json::exception& e) {
      throw DataError(in + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  const eval::ExactIndex index = eval::ExactIndex::build(std::move(pairs));
  ensure_parent(out);
  index.save(out);
  a.outputs.push_back(out);
  a.details = {{"size", index.size()}, {"dim", index.dim()}};
  return a;
}

Artifacts cmd_search(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string idx = rc.require_path("index"), queries = rc.require_path("queries");
  const std::string out = first_path(rc, {"run", "out"});
  a.inputs = {idx, queries};
  const eval::ExactIndex index = eval::ExactIndex::load(idx);
  std::vector<std::string> fit;
  if (auto corpus = rc.path("corpus")) {
    a.inputs.push_back(*corpus);
    fit = texts_of(data::read_corpus(*corpus));
  }
  auto emb = make_embedder(rc, fit, a, rc.eval.dim);
  if (emb->dim() != index.dim())
    throw ConfigError("query embedding dim " + std::to_string(emb->dim()) + " != index dim " +
                      std::to_string(index.dim()));
  const auto qs = data::read_queries(queries);
  eval::Run run;
  const std::size_t k = std::min(rc.eval.k, index.size());
  for (const auto& q : qs) {
    eval::RankedList rl;
    for (const auto& h : index.search_topk(emb->embed(q.text), k)) {
      rl.ids.push_back(h.id);
      rl.scores.push_back(h.score);
    }
    run[q.id] = std::move(rl);
  }
  ensure_parent(out);
  eval::write_trec_run(out, run, "drama");
  a.outputs.push_back(out);
  a.details = {{"queries", qs.size()}, {"k", k}};
  return a;
}

Artifacts cmd_eval(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const std::string corpus = rc.require_path("corpus"), queries = rc.require_path("queries"),
                    qrels = rc.require_path("qrels");
  const std::string report = first_path(rc, {"report", "out"});
  const std::string run_path = rc.path("run").value_or(report + ".trec");
  const std::string timings_path = report + ".timings.json";
  a.inputs = {corpus, queries, qrels};
  const auto docs = data::read_corpus(corpus);
  const auto texts = texts_of(docs);
  auto emb = make_embedder(rc, texts, a, rc.eval.dim);
  const auto r = eval::run_eval(*emb, docs, data::read_queries(queries), eval::read_qrels(qrels), rc.eval.k);
  ensure_parent(report);
  write_text_file(report, eval::report_json(r).dump(2) + "\n");
  eval::write_trec_run(run_path, r.run, "drama");
  write_text_file(timings_path, eval::timings_json(r.timings).dump(2) + "\n");
  a.outputs = {report, run_path};
  a.sidecars = {timings_path};
  a.details = {{"ndcg", r.ndcg.mean}, {"k", r.k}, {"dim", r.embedding_dim}};
  std::cout << "nDCG@" << r.k << '\t' << r.ndcg.mean << '\n';
  return a;
}

Artifacts cmd_needle(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  const fs::path dir = rc.require_path("out_dir");
  const auto sets = eval::gen_needle_corpus(rc.needle);
  std::vector<std::string> all_texts;
  for (const auto& s : sets) {
    const fs::path sub = dir / ("L" + std::to_string(s.length));
    fs::create_directories(sub);
    const std::string c = join(sub, "corpus.jsonl"), q = join(sub, "queries.jsonl"), r = join(sub, "qrels.tsv");
    data::write_corpus(c, s.corpus);
    data::write_queries(q, s.queries);
    eval::write_qrels(r, s.qrels);
    a.outputs.insert(a.outputs.end(), {c, q, r});
    for (const auto& d : s.corpus) all_texts.push_back(d.text);
  }
  if (auto report = rc.path("report")) {
    auto emb = make_embedder(rc, all_texts, a, rc.eval.dim);
    const auto nr = eval::run_needle_eval(*emb, sets, rc.eval.k);
    const Json j = eval::report_json(nr);
    ensure_parent(*report);
    write_text_file(*report, j.dump(2) + "\n");
    a.outputs.push_back(*report);
    a.details = {{"ndcg_by_length", j["ndcg_by_length"]}};
    for (const auto& [len, v] : j["ndcg_by_length"].items()) std::cout << "L" << len << '\t' << v << '\n';
  }
  return a;
}

Artifacts cmd_gradcheck(const RunConfig& rc, const CommandArgs&) {
  Artifacts a;
  constexpr double kTolerance = 1e-5;
  const auto s = run_gradcheck_suite(rc.encoder, rc.gradcheck);
  for (const auto& c : s.cases)
    spdlog::info("gradcheck {} point {}: max rel error {:.3e} over {} coords", c.target, c.point, c.max_rel_error,
                 c.checked);
  std::cout << "max_rel_error " << s.max_rel_error << '\n';
  a.details = to_json(s);
  a.exit_code = s.max_rel_error <= kTolerance ? 0 : 1;
  return a;
}

struct CommandEntry {
  const char* name;
  const char* help;
  Artifacts (*fn)(const RunConfig&, const CommandArgs&);
};

const CommandEntry kCommands[] = {
    {"synth", "generate a synthetic topic corpus, held-out queries, qrels and SFT triplets into paths.out_dir",
     cmd_synth},
    {"chunk", "split paths.corpus into chunks of at most chunk.max_tokens pieces", cmd_chunk},
    {"augment", "mine triplets from chunks with --mode sent|qgen|rerank|triplet", cmd_augment},
    {"mix", "sample paths.shards by mix.ratios into mix.total triplets", cmd_mix},
    {"train", "contrastive training on paths.triplets", cmd_train},
    {"prune", "learn structure masks for paths.checkpoint toward prune.target", cmd_prune},
    {"snap", "materialize a pruned checkpoint into the target architecture", cmd_snap},
    {"pretrain", "continued language-model training of paths.checkpoint", cmd_pretrain},
    {"encode", "embed paths.corpus into a JSON-lines embedding file", cmd_encode},
    {"index", "build an exact cosine index from paths.embeddings", cmd_index},
    {"search", "search paths.queries against paths.index and write a TREC run", cmd_search},
    {"eval", "encode, search and score nDCG@k with paths.qrels", cmd_eval},
    {"needle", "generate needle-retrieval sets into paths.out_dir; score them when paths.report is set",
     cmd_needle},
    {"gradcheck", "finite-difference check of the encoder and pruning gradients", cmd_gradcheck},
};

const CommandEntry& find_command(const std::string& name) {
  for (const auto& c : kCommands)
    if (name == c.name) return c;
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : kCommands) v.push_back(c.name);
    return v;
  }();
  return names;
}

std::string command_help(const std::string& name) { return find_command(name).help; }

Artifacts run_command(const std::string& name, const RunConfig& rc, const CommandArgs& args) {
  return find_command(name).fn(rc, args);
}

std::string manifest_path(const std::string& command, const RunConfig& rc) {
  if (auto m = rc.path("manifest")) return *m;
  if (command == "synth" || command == "needle") {
    if (auto d = rc.path("out_dir")) return join(*d, "manifest.json");
  }
  if (command == "eval" || command == "needle") {
    if (auto r = rc.path("report")) return *r + ".manifest.json";
  }
  if (command == "search") {
    if (auto r = rc.path("run")) return *r + ".manifest.json";
  }
  if (auto o = rc.path("out")) return *o + ".manifest.json";
  return {};
}

Json build_manifest(const std::string& command, const CommandArgs& args, const RunConfig& rc, const Artifacts& a) {
  const Json config = to_json(rc);
  Json inputs = Json::object(), outputs = Json::object();
  for (const auto& p : a.inputs) inputs[p] = sha256_file(p);
  for (const auto& p : a.outputs) outputs[p] = sha256_file(p);
  Json m = {{"schema_version", kManifestSchemaVersion},
            {"tool", "drama"},
            {"command", command},
            {"config", config},
            {"config_hash", sha256_hex(canonical_dump(config))},
            {"seeds", config["derived_seeds"]},
            {"inputs", inputs},
            {"outputs", outputs},
            {"sidecars", a.sidecars},
            {"templates", a.templates},
            {"details", a.details}};
  if (!args.mode.empty()) m["mode"] = args.mode;
  return m;
}

}  // namespace drama::cli
