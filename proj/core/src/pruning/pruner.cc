#include "drama/pruning/pruner.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "drama/numerics/ops.h"
#include "drama/util/error.h"
#include "drama/util/json_config.h"

namespace drama::pruning {

namespace ops = numerics::ops;
using encoder::AttentionMode;
using encoder::BoundParameters;
using encoder::layer_key;
using numerics::Tape;

void PruneTarget::validate(const EncoderConfig& source) const {
  auto check = [](const char* name, std::size_t v, std::size_t limit) {
    if (v < 1 || v > limit) {
      throw ConfigError(std::string("prune target ") + name + " = " + std::to_string(v) + " must lie in [1, " +
                        std::to_string(limit) + "]");
    }
  };
  check("heads_per_layer", heads_per_layer, source.num_heads);
  check("hidden_dim", hidden_dim, source.hidden_dim);
  check("num_layers", num_layers, source.num_layers);
  check("intermediate_dim", intermediate_dim, source.intermediate_dim);
}

Json to_json(const PruneTarget& t) {
  return Json{{"heads_per_layer", t.heads_per_layer},
              {"hidden_dim", t.hidden_dim},
              {"num_layers", t.num_layers},
              {"intermediate_dim", t.intermediate_dim}};
}

PruneTarget prune_target_from_json(const Json& j, const PruneTarget& defaults) {
  reject_unknown_keys(j, {"heads_per_layer", "hidden_dim", "num_layers", "intermediate_dim"}, "target");
  PruneTarget t = defaults;
  read_opt(j, "heads_per_layer", t.heads_per_layer, "target");
  read_opt(j, "hidden_dim", t.hidden_dim, "target");
  read_opt(j, "num_layers", t.num_layers, "target");
  read_opt(j, "intermediate_dim", t.intermediate_dim, "target");
  return t;
}

namespace {

HardConcreteMask make_mask(std::size_t units, double init, const HardConcreteParams& p) {
  return HardConcreteMask{Tensor({units}, init), p};
}

}  // namespace

MaskSet MaskSet::init(const EncoderConfig& cfg, double init_log_alpha, const HardConcreteParams& p) {
  p.validate();
  MaskSet m;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    m.head.push_back(make_mask(cfg.num_heads, init_log_alpha, p));
    m.intermediate.push_back(make_mask(cfg.intermediate_dim, init_log_alpha, p));
  }
  m.layer = make_mask(cfg.num_layers, init_log_alpha, p);
  m.hidden = make_mask(cfg.hidden_dim, init_log_alpha, p);
  return m;
}

ParameterSet MaskSet::as_parameters() const {
  ParameterSet p;
  for (std::size_t l = 0; l < head.size(); ++l) p.add("mask.head." + std::to_string(l), head[l].log_alpha);
  for (std::size_t l = 0; l < intermediate.size(); ++l)
    p.add("mask.int." + std::to_string(l), intermediate[l].log_alpha);
  p.add("mask.layer", layer.log_alpha);
  p.add("mask.hidden", hidden.log_alpha);
  return p;
}

void MaskSet::assign(const ParameterSet& p) {
  for (std::size_t l = 0; l < head.size(); ++l) head[l].log_alpha = p.at("mask.head." + std::to_string(l));
  for (std::size_t l = 0; l < intermediate.size(); ++l)
    intermediate[l].log_alpha = p.at("mask.int." + std::to_string(l));
  layer.log_alpha = p.at("mask.layer");
  hidden.log_alpha = p.at("mask.hidden");
}

LagrangeState LagrangeState::init(std::size_t num_layers) {
  LagrangeState s;
  s.head.resize(num_layers);
  s.intermediate.resize(num_layers);
  return s;
}

bool LagrangeState::all_finite() const {
  auto ok = [](const Multiplier& m) { return std::isfinite(m.lambda) && std::isfinite(m.phi); };
  return std::all_of(head.begin(), head.end(), ok) && std::all_of(intermediate.begin(), intermediate.end(), ok) &&
         ok(layer) && ok(hidden);
}

double constraint_loss(double z_sum, double target, double lambda, double phi) {
  if (target < 0.0) throw ConfigError("constraint_loss: negative target");
  const double v = z_sum - target;
  return lambda * v + phi * v * v;
}

Var constraint_loss(Var z_sum, double target, double lambda, double phi) {
  if (target < 0.0) throw ConfigError("constraint_loss: negative target");
  Var v = ops::add_scalar(z_sum, -target);
  return ops::add(ops::scale(v, lambda), ops::scale(ops::mul(v, v), phi));
}

double prune_total_loss(double lm, std::span<const double> head_terms, std::span<const double> int_terms,
                        double layer_term, double hidden_term) {
  double total = lm;
  for (double t : head_terms) total += t;
  for (double t : int_terms) total += t;
  return total + layer_term + hidden_term;
}

Var prune_total_loss(Var lm, std::span<const Var> head_terms, std::span<const Var> int_terms, Var layer_term,
                     Var hidden_term) {
  Var total = lm;
  for (Var t : head_terms) total = ops::add(total, t);
  for (Var t : int_terms) total = ops::add(total, t);
  return ops::add(ops::add(total, layer_term), hidden_term);
}

Var lm_loss(const EncoderConfig& cfg, const BoundParameters& params, const TokenSequence& seq,
            const encoder::StructureMasks* masks) {
  if (seq.size() < 2) throw DataError("lm_loss: sequence of length " + std::to_string(seq.size()) + " < 2");
  EncoderConfig causal = cfg;
  causal.attention_mode = AttentionMode::kUnidirectional;
  std::vector<std::int32_t> targets(seq.size(), -1);
  std::size_t active = 0;
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    if (seq.mask[t] && seq.mask[t + 1]) {
      targets[t] = seq.ids[t + 1];
      ++active;
    }
  }
  if (active == 0) throw DataError("lm_loss: no unmasked next-token pairs");
  return ops::cross_entropy(encoder::lm_logits(causal, params, seq, masks), std::move(targets));
}

Var lm_loss_batch(const EncoderConfig& cfg, const BoundParameters& params, std::span<const TokenSequence> seqs,
                  const encoder::StructureMasks* masks) {
  if (seqs.empty()) throw DataError("lm_loss: empty batch");
  Var total = lm_loss(cfg, params, seqs[0], masks);
  for (std::size_t i = 1; i < seqs.size(); ++i) total = ops::add(total, lm_loss(cfg, params, seqs[i], masks));
  return ops::scale(total, 1.0 / static_cast<double>(seqs.size()));
}

Json to_json(const PruneConfig& c) {
  return Json{{"target", to_json(c.target)},
              {"hard_concrete", to_json(c.hard_concrete)},
              {"rates",
               {{"theta", c.rates.theta},
                {"log_alpha", c.rates.log_alpha},
                {"lambda", c.rates.lambda},
                {"phi", c.rates.phi},
                {"mask_optimizer", c.rates.mask_optimizer == MaskOptimizer::kAdam ? "adam" : "sgd"},
                {"constraint_gates",
                 c.rates.constraint_gates == ConstraintGates::kSampled ? "sampled" : "deterministic"}}},
              {"decay_log_alpha", c.decay_log_alpha},
              {"init_log_alpha", c.init_log_alpha},
              {"prune_steps", c.prune_steps},
              {"pretrain_steps", c.pretrain_steps},
              {"batch_size", c.batch_size},
              {"pretrain_lr", c.pretrain_lr},
              {"fold_mask_values", c.fold_mask_values}};
}

PruneConfig prune_config_from_json(const Json& j, const PruneConfig& defaults) {
  reject_unknown_keys(j,
                      {"target", "hard_concrete", "rates", "decay_log_alpha", "init_log_alpha", "prune_steps", "pretrain_steps",
                       "batch_size", "pretrain_lr", "fold_mask_values"},
                      "prune");
  PruneConfig c = defaults;
  if (j.contains("target")) c.target = prune_target_from_json(j.at("target"), c.target);
  if (j.contains("hard_concrete")) c.hard_concrete = hard_concrete_from_json(j.at("hard_concrete"), c.hard_concrete);
  if (j.contains("rates")) {
    const Json& r = j.at("rates");
    reject_unknown_keys(r, {"theta", "log_alpha", "lambda", "phi", "mask_optimizer", "constraint_gates"},
                        "prune.rates");
    read_opt(r, "theta", c.rates.theta, "prune.rates");
    read_opt(r, "log_alpha", c.rates.log_alpha, "prune.rates");
    read_opt(r, "lambda", c.rates.lambda, "prune.rates");
    read_opt(r, "phi", c.rates.phi, "prune.rates");
    std::string opt, gates;
    read_opt(r, "mask_optimizer", opt, "prune.rates");
    read_opt(r, "constraint_gates", gates, "prune.rates");
    if (opt == "adam") c.rates.mask_optimizer = MaskOptimizer::kAdam;
    else if (opt == "sgd") c.rates.mask_optimizer = MaskOptimizer::kSgd;
    else if (!opt.empty()) throw ConfigError("prune.rates.mask_optimizer must be adam or sgd");
    if (gates == "sampled") c.rates.constraint_gates = ConstraintGates::kSampled;
    else if (gates == "deterministic") c.rates.constraint_gates = ConstraintGates::kDeterministic;
    else if (!gates.empty()) throw ConfigError("prune.rates.constraint_gates must be sampled or deterministic");
  }
  for (double r : {c.rates.theta, c.rates.log_alpha, c.rates.lambda, c.rates.phi})
    if (!(r >= 0.0)) throw ConfigError("prune.rates must be non-negative");
  read_opt(j, "decay_log_alpha", c.decay_log_alpha, "prune");
  read_opt(j, "init_log_alpha", c.init_log_alpha, "prune");
  read_opt(j, "prune_steps", c.prune_steps, "prune");
  read_opt(j, "pretrain_steps", c.pretrain_steps, "prune");
  read_opt(j, "batch_size", c.batch_size, "prune");
  read_opt(j, "pretrain_lr", c.pretrain_lr, "prune");
  read_opt(j, "fold_mask_values", c.fold_mask_values, "prune");
  if (c.batch_size == 0) throw ConfigError("prune.batch_size must be positive");
  return c;
}

PruneRates rates_at(const PruneConfig& c, std::size_t step) {
  PruneRates r = c.rates;
  if (c.decay_log_alpha && c.prune_steps > 0) {
    const double left = step >= c.prune_steps ? 0.0 : 1.0 - static_cast<double>(step) / c.prune_steps;
    r.log_alpha *= left;
  }
  return r;
}

PruneState PruneState::init(const EncoderConfig& cfg, ParameterSet params, const PruneConfig& pc) {
  encoder::check_parameters(cfg, params);
  pc.target.validate(cfg);
  MaskSet masks = MaskSet::init(cfg, pc.init_log_alpha, pc.hard_concrete);
  objective::Adam theta_opt(params);
  objective::Adam alpha_opt(masks.as_parameters());
  return PruneState{cfg, std::move(params), std::move(masks), LagrangeState::init(cfg.num_layers),
                    std::move(theta_opt), std::move(alpha_opt), 0};
}

namespace {

double tensor_sum(const Tensor& t) { return std::accumulate(t.data().begin(), t.data().end(), 0.0); }

}  // namespace

MaskSums deterministic_sums(const MaskSet& masks) {
  MaskSums s;
  for (const auto& m : masks.head) s.head.push_back(tensor_sum(mask_deterministic(m)));
  for (const auto& m : masks.intermediate) s.intermediate.push_back(tensor_sum(mask_deterministic(m)));
  s.layer = tensor_sum(mask_deterministic(masks.layer));
  s.hidden = tensor_sum(mask_deterministic(masks.hidden));
  return s;
}

PruneNoise PruneNoise::draw(const MaskSet& masks, Rng& rng) {
  PruneNoise n;
  for (const auto& m : masks.head) n.head.push_back(draw_uniforms(m.units(), rng));
  for (const auto& m : masks.intermediate) n.intermediate.push_back(draw_uniforms(m.units(), rng));
  n.layer = draw_uniforms(masks.layer.units(), rng);
  n.hidden = draw_uniforms(masks.hidden.units(), rng);
  return n;
}

PruneGraph build_prune_graph(const EncoderConfig& cfg, const BoundParameters& params, const MaskSet& masks,
                             std::span<const Var> log_alpha_vars, const LagrangeState& lagrange,
                             const PruneTarget& target, const PruneNoise& noise,
                             std::span<const TokenSequence> batch, ConstraintGates gates) {
  const std::size_t L = cfg.num_layers;
  if (log_alpha_vars.size() != 2 * L + 2) throw ShapeError("build_prune_graph: wrong number of mask leaves");
  const HardConcreteParams& hc = masks.hidden.params;
  encoder::StructureMasks sm;
  for (std::size_t l = 0; l < L; ++l) sm.head.push_back(mask_sample(log_alpha_vars[l], noise.head[l], hc));
  for (std::size_t l = 0; l < L; ++l)
    sm.intermediate.push_back(mask_sample(log_alpha_vars[L + l], noise.intermediate[l], hc));
  sm.layer = mask_sample(log_alpha_vars[2 * L], noise.layer, hc);
  sm.hidden = mask_sample(log_alpha_vars[2 * L + 1], noise.hidden, hc);

  PruneGraph g;
  g.lm = lm_loss_batch(cfg, params, batch, &sm);
  std::vector<Var> head_terms, int_terms;
  auto gate = [&](std::size_t i, Var sampled) {
    return gates == ConstraintGates::kSampled ? sampled : mask_deterministic(log_alpha_vars[i], hc);
  };
  for (std::size_t l = 0; l < L; ++l) {
    Var hs = ops::sum(gate(l, sm.head[l]));
    Var is = ops::sum(gate(L + l, sm.intermediate[l]));
    g.sums.head.push_back(hs.item());
    g.sums.intermediate.push_back(is.item());
    head_terms.push_back(constraint_loss(hs, static_cast<double>(target.heads_per_layer), lagrange.head[l].lambda,
                                         lagrange.head[l].phi));
    int_terms.push_back(constraint_loss(is, static_cast<double>(target.intermediate_dim),
                                        lagrange.intermediate[l].lambda, lagrange.intermediate[l].phi));
  }
  Var ls = ops::sum(gate(2 * L, *sm.layer));
  Var hs = ops::sum(gate(2 * L + 1, *sm.hidden));
  g.sums.layer = ls.item();
  g.sums.hidden = hs.item();
  Var layer_term =
      constraint_loss(ls, static_cast<double>(target.num_layers), lagrange.layer.lambda, lagrange.layer.phi);
  Var hidden_term =
      constraint_loss(hs, static_cast<double>(target.hidden_dim), lagrange.hidden.lambda, lagrange.hidden.phi);
  g.total = prune_total_loss(g.lm, head_terms, int_terms, layer_term, hidden_term);
  return g;
}

namespace {

void ascend(Multiplier& m, double sum, double target, const PruneRates& rates) {
  const double v = sum - target;
  m.lambda += rates.lambda * v;
  m.phi += rates.phi * v * v;
}

}  // namespace

PruneStepResult prune_step(PruneState& state, std::span<const TokenSequence> batch, const PruneTarget& target,
                           const PruneRates& rates, Rng& rng) {
  const EncoderConfig& cfg = state.config;
  target.validate(cfg);
  const PruneNoise noise = PruneNoise::draw(state.masks, rng);
  const ParameterSet alpha = state.masks.as_parameters();

  Tape tape(true);
  BoundParameters theta(tape, state.params, true);
  BoundParameters alpha_vars(tape, alpha, true);
  std::vector<Var> la;
  for (std::size_t i = 0; i < alpha_vars.size(); ++i) la.push_back(alpha_vars.at(i));
  PruneGraph g = build_prune_graph(cfg, theta, state.masks, la, state.lagrange, target, noise, batch,
                                   rates.constraint_gates);
  const double total = g.total.item();
  if (!std::isfinite(total)) throw NumericError("prune_step: non-finite loss " + std::to_string(total));
  tape.backward(g.total);
  ParameterSet theta_grads = theta.gradients(state.params);
  ParameterSet alpha_grads = alpha_vars.gradients(alpha);
  if (!theta_grads.all_finite() || !alpha_grads.all_finite()) throw NumericError("prune_step: non-finite gradient");

  const MaskSums current = deterministic_sums(state.masks);
  LagrangeState lagrange = state.lagrange;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    ascend(lagrange.head[l], current.head[l], static_cast<double>(target.heads_per_layer), rates);
    ascend(lagrange.intermediate[l], current.intermediate[l], static_cast<double>(target.intermediate_dim), rates);
  }
  ascend(lagrange.layer, current.layer, static_cast<double>(target.num_layers), rates);
  ascend(lagrange.hidden, current.hidden, static_cast<double>(target.hidden_dim), rates);
  if (!lagrange.all_finite()) throw NumericError("prune_step: non-finite Lagrange multipliers");

  ParameterSet new_alpha = alpha;
  if (rates.theta != 0.0) state.theta_opt.step(state.params, theta_grads, rates.theta);
  if (rates.log_alpha != 0.0) {
    if (rates.mask_optimizer == MaskOptimizer::kAdam) {
      state.alpha_opt.step(new_alpha, alpha_grads, rates.log_alpha);
    } else {
      for (std::size_t i = 0; i < new_alpha.size(); ++i) {
        Tensor& t = new_alpha.tensor(i);
        const Tensor& g = alpha_grads.tensor(i);
        for (std::size_t k = 0; k < t.size(); ++k) t[k] -= rates.log_alpha * g[k];
      }
    }
    state.masks.assign(new_alpha);
  }
  state.lagrange = std::move(lagrange);
  ++state.step;
  return PruneStepResult{g.lm.item(), total, std::move(g.sums)};
}

std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k) {
  if (k > values.size()) {
    throw ConfigError("cannot keep " + std::to_string(k) + " of " + std::to_string(values.size()) + " units");
  }
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

// Dense copy of selected rows and columns of a rank-2 tensor.
Tensor select(const Tensor& src, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  const std::size_t C = src.shape()[1];
  Tensor out({rows.size(), cols.size()});
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out[r * cols.size() + c] = src[rows[r] * C + cols[c]];
  return out;
}

Tensor select_vec(const Tensor& src, std::span<const std::size_t> idx) {
  Tensor out({idx.size()});
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = src[idx[i]];
  return out;
}

std::vector<std::size_t> iota_vec(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<std::size_t> head_columns(std::span<const std::size_t> heads, std::size_t head_dim) {
  std::vector<std::size_t> cols;
  for (std::size_t h : heads)
    for (std::size_t i = 0; i < head_dim; ++i) cols.push_back(h * head_dim + i);
  return cols;
}

void scale_rows(Tensor& t, std::size_t begin, std::size_t count, double s) {
  const std::size_t C = t.shape()[1];
  for (std::size_t r = begin; r < begin + count; ++r)
    for (std::size_t c = 0; c < C; ++c) t[r * C + c] *= s;
}

void scale_cols(Tensor& t, std::span<const double> s) {
  const std::size_t R = t.shape()[0], C = t.shape()[1];
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) t[r * C + c] *= s[c];
}

}  // namespace

SnapResult snap_architecture(const EncoderConfig& cfg, const ParameterSet& params, const MaskSet& masks,
                             const PruneTarget& target, bool fold_mask_values) {
  encoder::check_parameters(cfg, params);
  if (masks.head.size() != cfg.num_layers || masks.intermediate.size() != cfg.num_layers ||
      masks.layer.units() != cfg.num_layers || masks.hidden.units() != cfg.hidden_dim) {
    throw ShapeError("snap_architecture: masks do not match the source config");
  }
  target.validate(cfg);

  const Tensor z_layer = mask_deterministic(masks.layer);
  const Tensor z_hidden = mask_deterministic(masks.hidden);

  SnapResult r;
  r.kept_layers = top_k_indices(z_layer.data(), target.num_layers);
  r.kept_hidden = top_k_indices(z_hidden.data(), target.hidden_dim);

  r.config = cfg;
  r.config.num_layers = target.num_layers;
  r.config.num_heads = target.heads_per_layer;
  r.config.hidden_dim = target.hidden_dim;
  r.config.intermediate_dim = target.intermediate_dim;
  r.config.validate();

  const std::size_t dh = cfg.head_dim;
  const auto& hid = r.kept_hidden;
  std::vector<double> hidden_scale(hid.size(), 1.0);
  if (fold_mask_values)
    for (std::size_t i = 0; i < hid.size(); ++i) hidden_scale[i] = z_hidden[hid[i]];

  const Tensor& embed = params.at("embed");
  Tensor new_embed = select(embed, iota_vec(embed.shape()[0]), hid);
  scale_cols(new_embed, hidden_scale);
  r.params.add("embed", std::move(new_embed));

  for (std::size_t nl = 0; nl < r.kept_layers.size(); ++nl) {
    const std::size_t l = r.kept_layers[nl];
    const Tensor z_head = mask_deterministic(masks.head[l]);
    const Tensor z_int = mask_deterministic(masks.intermediate[l]);
    const auto heads = top_k_indices(z_head.data(), target.heads_per_layer);
    const auto inter = top_k_indices(z_int.data(), target.intermediate_dim);
    const auto cols = head_columns(heads, dh);
    const double zl = fold_mask_values ? z_layer[l] : 1.0;
    auto key = [&](const char* part) { return layer_key(l, part); };
    auto nkey = [&](const char* part) { return layer_key(nl, part); };

    r.params.add(nkey("attn_norm"), select_vec(params.at(key("attn_norm")), hid));
    r.params.add(nkey("wq"), select(params.at(key("wq")), hid, cols));
    r.params.add(nkey("wk"), select(params.at(key("wk")), hid, cols));
    r.params.add(nkey("wv"), select(params.at(key("wv")), hid, cols));
    Tensor wo = select(params.at(key("wo")), cols, hid);
    if (fold_mask_values) {
      for (std::size_t i = 0; i < heads.size(); ++i) scale_rows(wo, i * dh, dh, z_head[heads[i]] * zl);
      scale_cols(wo, hidden_scale);
    }
    r.params.add(nkey("wo"), std::move(wo));
    r.params.add(nkey("ffn_norm"), select_vec(params.at(key("ffn_norm")), hid));
    r.params.add(nkey("w_gate"), select(params.at(key("w_gate")), hid, inter));
    r.params.add(nkey("w_up"), select(params.at(key("w_up")), hid, inter));
    Tensor w_down = select(params.at(key("w_down")), inter, hid);
    if (fold_mask_values) {
      for (std::size_t i = 0; i < inter.size(); ++i) scale_rows(w_down, i, 1, z_int[inter[i]] * zl);
      scale_cols(w_down, hidden_scale);
    }
    r.params.add(nkey("w_down"), std::move(w_down));
    r.kept_heads.push_back(heads);
    r.kept_intermediate.push_back(inter);
  }
  r.params.add("final_norm", select_vec(params.at("final_norm"), hid));
  encoder::check_parameters(r.config, r.params);
  return r;
}

std::vector<double> continued_pretrain(const EncoderConfig& cfg, ParameterSet& params,
                                       std::span<const TokenSequence> corpus, const PretrainConfig& pc,
                                       objective::Adam& opt) {
  if (corpus.empty()) throw DataError("continued_pretrain: empty corpus");
  if (pc.batch_size == 0) throw ConfigError("pretrain batch_size must be positive");
  std::vector<double> losses;
  for (std::size_t step = opt.steps(); step < pc.steps; ++step) {
    const auto idx = objective::batch_indices(corpus.size(), pc.batch_size, pc.seed, step);
    std::vector<TokenSequence> batch;
    for (std::size_t i : idx) batch.push_back(corpus[i]);
    Tape tape(true);
    BoundParameters bound(tape, params, true);
    Var loss = lm_loss_batch(cfg, bound, batch);
    if (!std::isfinite(loss.item())) throw NumericError("continued_pretrain: non-finite loss at step " + std::to_string(step));
    tape.backward(loss);
    opt.step(params, bound.gradients(params), pc.lr);
    losses.push_back(loss.item());
  }
  return losses;
}

double evaluate_lm(const EncoderConfig& cfg, const ParameterSet& params, std::span<const TokenSequence> seqs) {
  Tape tape(false);
  BoundParameters bound(tape, params, false);
  return lm_loss_batch(cfg, bound, seqs).item();
}

}  // namespace drama::pruning
