#include "gradcheck_suite.h"

#include <algorithm>

#include "drama/encoder/model.h"
#include "drama/encoder/parameters.h"
#include "drama/numerics/gradcheck.h"
#include "drama/numerics/ops.h"
#include "drama/objective/loss.h"
#include "drama/pruning/pruner.h"
#include "drama/util/rng.h"

namespace drama::cli {

namespace {

using encoder::BoundParameters;
using encoder::EncoderConfig;
using encoder::ParameterSet;
using encoder::TokenSequence;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

std::vector<std::size_t> spread(std::size_t n, std::size_t want, std::size_t offset) {
  std::vector<std::size_t> out;
  if (want == 0 || want >= n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  const std::size_t stride = n / want;
  for (std::size_t i = offset % stride; i < n && out.size() < want; i += stride) out.push_back(i);
  return out;
}

TokenSequence random_sequence(const EncoderConfig& c, Rng& rng, std::size_t len) {
  std::vector<std::int32_t> ids;
  for (std::size_t i = 0; i + 1 < len; ++i)
    ids.push_back(2 + static_cast<std::int32_t>(uniform_index(rng, c.vocab_size - 2)));
  ids.push_back(1);
  return TokenSequence::unpadded(std::move(ids));
}

/// Two queries, each with a positive and two negatives.
numerics::GradCheckResult check_encoder(const EncoderConfig& c, const GradCheckOptions& opt, std::size_t point) {
  Rng rng = make_rng(opt.seed, "gradcheck.encoder." + std::to_string(point));
  const ParameterSet p = init_parameters(c, derive_seed(opt.seed, "gradcheck.init." + std::to_string(point)));
  std::vector<TokenSequence> qs, cands;
  for (int i = 0; i < 2; ++i) {
    qs.push_back(random_sequence(c, rng, 4 + i));
    for (int j = 0; j < 3; ++j) cands.push_back(random_sequence(c, rng, 5 + j));
  }
  objective::LossConfig lc;
  lc.temperature = 0.5;
  lc.num_hard_negatives = 2;
  auto fn = [&](Tape&, Var flat) {
    BoundParameters b = BoundParameters::from_flat(flat, p);
    std::vector<Var> qv, cv;
    for (const auto& s : qs) qv.push_back(encoder::pooled(c, b, s));
    for (const auto& s : cands) cv.push_back(encoder::pooled(c, b, s));
    objective::Batch batch{numerics::ops::concat_rows(qv), numerics::ops::concat_rows(cv), {0, 3}, 0};
    return objective::batch_loss(batch, lc);
  };
  const auto coords = spread(p.total_elements(), opt.coords, point);
  return numerics::grad_check(fn, p.flatten(), opt.step, coords);
}

struct PruneFixture {
  ParameterSet params;
  pruning::MaskSet masks;
  ParameterSet alpha;
  pruning::LagrangeState lag;
  pruning::PruneNoise noise;
  std::vector<TokenSequence> batch;
  pruning::PruneTarget target;
};

PruneFixture prune_fixture(const EncoderConfig& c, const GradCheckOptions& opt, std::size_t point) {
  Rng rng = make_rng(opt.seed, "gradcheck.prune." + std::to_string(point));
  PruneFixture f;
  f.params = init_parameters(c, derive_seed(opt.seed, "gradcheck.prune_init." + std::to_string(point)));
  f.target = {std::max<std::size_t>(1, c.num_heads / 2), std::max<std::size_t>(1, c.hidden_dim / 2),
              std::max<std::size_t>(1, c.num_layers - 1), std::max<std::size_t>(1, c.intermediate_dim / 2)};
  f.masks = pruning::MaskSet::init(c, 0.0, {});
  f.alpha = f.masks.as_parameters();
  for (std::size_t i = 0; i < f.alpha.size(); ++i)
    for (double& x : f.alpha.tensor(i).data()) x = 0.8 * normal(rng);
  f.masks.assign(f.alpha);
  f.lag = pruning::LagrangeState::init(c.num_layers);
  auto mult = [&] { return pruning::Multiplier{0.5 * normal(rng), 0.2 * uniform_open(rng)}; };
  for (auto& m : f.lag.head) m = mult();
  for (auto& m : f.lag.intermediate) m = mult();
  f.lag.layer = mult();
  f.lag.hidden = mult();
  f.noise = pruning::PruneNoise::draw(f.masks, rng);
  for (int i = 0; i < 2; ++i) f.batch.push_back(random_sequence(c, rng, 6 + i));
  return f;
}

numerics::GradCheckResult check_prune(const EncoderConfig& c, const GradCheckOptions& opt, std::size_t point, bool wrt_theta) {
  const PruneFixture f = prune_fixture(c, opt, point);
  auto fn = [&](Tape& tape, Var flat) {
    if (wrt_theta) {
      BoundParameters theta = BoundParameters::from_flat(flat, f.params);
      BoundParameters la(tape, f.alpha, false);
      std::vector<Var> vars;
      for (std::size_t i = 0; i < la.size(); ++i) vars.push_back(la.at(i));
      return pruning::build_prune_graph(c, theta, f.masks, vars, f.lag, f.target, f.noise, f.batch).total;
    }
    BoundParameters theta(tape, f.params, false);
    BoundParameters la = BoundParameters::from_flat(flat, f.alpha);
    std::vector<Var> vars;
    for (std::size_t i = 0; i < la.size(); ++i) vars.push_back(la.at(i));
    return pruning::build_prune_graph(c, theta, f.masks, vars, f.lag, f.target, f.noise, f.batch).total;
  };
  const Tensor x = wrt_theta ? f.params.flatten() : f.alpha.flatten();
  const auto coords = spread(x.size(), opt.coords, point);
  return numerics::grad_check(fn, x, opt.step, coords);
}

}  // namespace

GradCheckSummary run_gradcheck_suite(const encoder::EncoderConfig& cfg, const GradCheckOptions& opt) {
  cfg.validate();
  GradCheckSummary s;
  for (std::size_t pt = 0; pt < opt.points; ++pt) {
    auto add = [&](const char* target, const numerics::GradCheckResult& r) {
      s.cases.push_back({target, pt, r.max_rel_error, r.checked});
    };
    add("encode_infonce", check_encoder(cfg, opt, pt));
    add("prune_theta", check_prune(cfg, opt, pt, true));
    add("prune_log_alpha", check_prune(cfg, opt, pt, false));
  }
  for (const auto& c : s.cases) s.max_rel_error = std::max(s.max_rel_error, c.max_rel_error);
  return s;
}

Json to_json(const GradCheckSummary& s) {
  Json cases = Json::array();
  for (const auto& c : s.cases)
    cases.push_back({{"target", c.target}, {"point", c.point}, {"max_rel_error", c.max_rel_error}, {"checked", c.checked}});
  return {{"cases", cases}, {"max_rel_error", s.max_rel_error}};
}

}  // namespace drama::cli
