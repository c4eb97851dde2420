#include "drama/objective/trainer.h"

#include <cmath>
#include <numeric>

#include "drama/encoder/model.h"
#include "drama/util/error.h"
#include "drama/util/json_config.h"

namespace drama::objective {

Adam::Adam(const ParameterSet& like, AdamConfig cfg) : cfg_(cfg) {
  for (std::size_t i = 0; i < like.size(); ++i) {
    m_.add(like.name(i), Tensor(like.tensor(i).shape(), 0.0));
    v_.add(like.name(i), Tensor(like.tensor(i).shape(), 0.0));
  }
}

void Adam::step(ParameterSet& params, const ParameterSet& grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ConfigError("adam: parameter set does not match optimizer state");
  }
  if (!grads.all_finite()) throw NumericError("adam: non-finite gradient; step aborted");
  ++t_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params.tensor(k).data();
    auto g = grads.tensor(k).data();
    auto m = m_.tensor(k).data();
    auto v = v_.tensor(k).data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::save_to(ParameterSet& extra) const {
  for (std::size_t i = 0; i < m_.size(); ++i) {
    extra.add("adam.m." + m_.name(i), m_.tensor(i));
    extra.add("adam.v." + v_.name(i), v_.tensor(i));
  }
  extra.add("adam.t", Tensor::scalar(static_cast<double>(t_)));
}

Adam Adam::load_from(const ParameterSet& extra, const ParameterSet& like, AdamConfig cfg) {
  Adam a(like, cfg);
  if (!extra.contains("adam.t")) return a;
  for (std::size_t i = 0; i < like.size(); ++i) {
    a.m_.tensor(i) = extra.at("adam.m." + like.name(i));
    a.v_.tensor(i) = extra.at("adam.v." + like.name(i));
    if (a.m_.tensor(i).shape() != like.tensor(i).shape()) {
      throw ConfigError("adam state for '" + like.name(i) + "' has the wrong shape");
    }
  }
  a.t_ = static_cast<std::size_t>(extra.at("adam.t").item());
  return a;
}

Json to_json(const TrainConfig& c) {
  return Json{{"steps", c.steps},
              {"batch_size", c.batch_size},
              {"lr", c.lr},
              {"warmup_steps", c.warmup_steps},
              {"linear_decay", c.linear_decay},
              {"loss", to_json(c.loss)}};
}

TrainConfig train_config_from_json(const Json& j, const TrainConfig& defaults) {
  constexpr std::string_view ctx = "train";
  reject_unknown_keys(j, {"steps", "batch_size", "lr", "warmup_steps", "linear_decay", "loss"}, ctx);
  TrainConfig c = defaults;
  read_opt(j, "steps", c.steps, ctx);
  read_opt(j, "batch_size", c.batch_size, ctx);
  read_opt(j, "lr", c.lr, ctx);
  read_opt(j, "warmup_steps", c.warmup_steps, ctx);
  read_opt(j, "linear_decay", c.linear_decay, ctx);
  if (j.contains("loss")) c.loss = loss_config_from_json(j.at("loss"), c.loss);
  if (c.batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  if (!(c.lr >= 0.0)) throw ConfigError("train.lr must be >= 0");
  return c;
}

double learning_rate_at(const TrainConfig& cfg, std::size_t step) {
  double lr = cfg.lr;
  if (cfg.warmup_steps > 0 && step < cfg.warmup_steps) {
    return lr * static_cast<double>(step + 1) / static_cast<double>(cfg.warmup_steps);
  }
  if (cfg.linear_decay && cfg.steps > cfg.warmup_steps) {
    const double span = static_cast<double>(cfg.steps - cfg.warmup_steps);
    lr *= std::max(0.0, 1.0 - static_cast<double>(step - cfg.warmup_steps) / span);
  }
  return lr;
}

StepResult train_step(const encoder::EncoderConfig& cfg, ParameterSet& params,
                      const encoder::Tokenizer& tokenizer, std::span<const TrainingTriplet> triplets,
                      const LossConfig& loss, Adam& opt, double lr, Rng& rng) {
  if (!params.all_finite()) throw NumericError("train_step: parameters are not finite");
  numerics::Tape tape(true);
  encoder::BoundParameters bound(tape, params, true);
  auto encode = [&](const std::string& text) {
    return encoder::pooled(cfg, bound, tokenizer.encode(text, cfg.max_positions));
  };
  Batch batch = assemble_batch(triplets, loss.num_hard_negatives, encode, rng);
  Var l = mrl_loss(batch, loss);
  const double value = l.item();
  if (!std::isfinite(value)) throw NumericError("train_step: non-finite loss; step aborted");
  tape.backward(l);
  opt.step(params, bound.gradients(params), lr);
  return StepResult{value, batch.duplicate_candidates};
}

std::vector<std::size_t> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                       std::size_t step) {
  if (n == 0) throw DataError("train: no triplets");
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  std::size_t pos = step * batch_size;
  std::size_t cached_epoch = SIZE_MAX;
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < batch_size; ++k, ++pos) {
    const std::size_t epoch = pos / n;
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Rng rng = make_rng(seed, "train.epoch." + std::to_string(epoch));
      shuffle(perm, rng);
      cached_epoch = epoch;
    }
    out.push_back(perm[pos % n]);
  }
  return out;
}

TrainReport train_retriever(const encoder::EncoderConfig& cfg, ParameterSet& params,
                            const encoder::Tokenizer& tokenizer,
                            std::span<const TrainingTriplet> triplets, const TrainConfig& tc, Adam& opt,
                            const StepCallback& on_step) {
  tc.loss.validate();
  TrainReport report;
  std::vector<TrainingTriplet> batch;
  for (std::size_t step = opt.steps(); step < tc.steps; ++step) {
    batch.clear();
    for (auto i : batch_indices(triplets.size(), tc.batch_size, tc.seed, step)) batch.push_back(triplets[i]);
    Rng rng = make_rng(tc.seed, "train.negatives." + std::to_string(step));
    StepResult r = train_step(cfg, params, tokenizer, batch, tc.loss, opt, learning_rate_at(tc, step), rng);
    report.losses.push_back(r.loss);
    report.duplicate_candidates += r.duplicate_candidates;
    if (on_step) on_step(step, r);
  }
  return report;
}

}  // namespace drama::objective
