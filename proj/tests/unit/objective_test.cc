#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "drama/encoder/model.h"
#include "drama/numerics/gradcheck.h"
#include "drama/numerics/ops.h"
#include "drama/objective/loss.h"
#include "drama/objective/trainer.h"
#include "drama/objective/triplet.h"
#include "drama/util/error.h"
#include "oracles/infonce_oracle.h"

namespace drama::objective {
namespace {

namespace ops = numerics::ops;
using numerics::Tape;

Tensor random_rows(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t({r, c});
  for (double& x : t.data()) x = normal(rng);
  return t;
}

using oracle::dot_cos;
using oracle::enumerate_batch_loss;

TEST(Cosine, Examples) {
  const std::vector<double> v = {0.3, -1.2, 2.0};
  EXPECT_NEAR(cosine_sim(v, v), 1.0, 1e-15);
  EXPECT_EQ(cosine_sim(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  const std::vector<double> q = {1.0, 2.0}, q2 = {2.0, 4.0}, d = {3.0, -1.0};
  EXPECT_EQ(cosine_sim(q2, d), cosine_sim(q, d));
  EXPECT_THROW(cosine_sim(std::vector<double>{0, 0}, d), ConfigError);
}

TEST(InfoNce, NoNegativesIsZero) {
  Tape tape(false);
  Var q = tape.constant(Tensor::matrix(1, 2, {1, 2}));
  Var p = tape.constant(Tensor::matrix(1, 2, {3, -1}));
  EXPECT_EQ(infonce(q, p, std::nullopt, 0.05).item(), 0.0);
}

TEST(InfoNce, EqualSimilaritiesGiveLogTwo) {
  Tape tape(false);
  Var q = tape.constant(Tensor::matrix(1, 2, {1, 0}));
  Var p = tape.constant(Tensor::matrix(1, 2, {1, 1}));
  Var n = tape.constant(Tensor::matrix(1, 2, {1, -1}));
  EXPECT_NEAR(infonce(q, p, n, 1.0).item(), 0.693147180559945, 1e-12);
}

TEST(InfoNce, UnitVersusOrthogonal) {
  Tape tape(false);
  Var q = tape.constant(Tensor::matrix(1, 2, {1, 0}));
  Var p = tape.constant(Tensor::matrix(1, 2, {1, 0}));
  Var n = tape.constant(Tensor::matrix(1, 2, {0, 1}));
  EXPECT_NEAR(infonce(q, p, n, 1.0).item(), std::log(1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(infonce(q, p, n, 1.0).item(), 0.313262, 1e-6);
}

TEST(InfoNce, RejectsNonPositiveTemperature) {
  Tape tape(false);
  Var q = tape.constant(Tensor::matrix(1, 2, {1, 0}));
  EXPECT_THROW(infonce(q, q, std::nullopt, 0.0), ConfigError);
}

TEST(InfoNce, ShiftInvarianceOfStableSoftmax) {
  Tape tape(false);
  const Tensor logits = Tensor::matrix(1, 4, {0.3, -1.0, 2.0, 0.7});
  const double base = ops::cross_entropy(tape.constant(logits), {0}).item();
  for (double c : {-500.0, 3.0, 800.0}) {
    Tensor shifted = logits;
    for (double& x : shifted.data()) x += c;
    EXPECT_NEAR(ops::cross_entropy(tape.constant(shifted), {0}).item(), base, 1e-10);
  }
}

TEST(InfoNce, MonotoneInMargin) {
  Tape tape(false);
  Var q = tape.constant(Tensor::matrix(1, 2, {1, 0}));
  Var n = tape.constant(Tensor::matrix(1, 2, {0, 1}));
  double prev = std::numeric_limits<double>::infinity();
  for (double angle = 3.0; angle >= 0.0; angle -= 0.25) {
    Var p = tape.constant(Tensor::matrix(1, 2, {std::cos(angle), std::sin(angle)}));
    const double v = infonce(q, p, n, 0.5).item();
    if (angle < 1.5) {
      EXPECT_LT(v, prev);
    }
    prev = v;
  }
}

TEST(InfoNce, GradCheckWrtAllEmbeddings) {
  Rng rng = make_rng(1, "infonce");
  const Tensor point = random_rows(1, 5 * 6, rng);
  auto fn = [](Tape&, Var x) {
    Var m = ops::reshape(x, {5, 6});
    return infonce(ops::slice_rows(m, 0, 1), ops::slice_rows(m, 1, 1), ops::slice_rows(m, 2, 3), 0.1);
  };
  EXPECT_LE(numerics::grad_check(fn, point, 1e-6).max_rel_error, 1e-5);
}

TEST(BatchLoss, SingleQueryPoolOfEight) {
  Rng rng = make_rng(2, "b1");
  Tape tape(false);
  Batch b{tape.constant(random_rows(1, 4, rng)), tape.constant(random_rows(8, 4, rng)), {0}, 0};
  EXPECT_EQ(b.candidates.value().rows(), 8u);
  LossConfig cfg;
  cfg.temperature = 1.0;
  EXPECT_NEAR(batch_loss(b, cfg).item(), enumerate_batch_loss(b.queries.value(), b.candidates.value(), {0}, 1.0),
              1e-10);
}

TEST(BatchLoss, SingleCandidateIsZero) {
  Rng rng = make_rng(3, "b0");
  Tape tape(false);
  Batch b{tape.constant(random_rows(1, 4, rng)), tape.constant(random_rows(1, 4, rng)), {0}, 0};
  EXPECT_EQ(batch_loss(b, LossConfig{}).item(), 0.0);
}

TEST(BatchLoss, OrthogonalPairMatchesEnumeration) {
  Tape tape(false);
  const Tensor q = Tensor::matrix(2, 4, {1, 0, 0, 0, 0, 1, 0, 0});
  const Tensor c = Tensor::matrix(4, 4, {1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1});
  Batch b{tape.constant(q), tape.constant(c), {0, 2}, 0};
  LossConfig cfg;
  cfg.temperature = 1.0;
  // Each query: one candidate at sim 1, three at sim 0.
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 3.0));
  EXPECT_NEAR(batch_loss(b, cfg).item(), expected, 1e-12);
  EXPECT_NEAR(batch_loss(b, cfg).item(), enumerate_batch_loss(q, c, {0, 2}, 1.0), 1e-10);
}

TEST(BatchLoss, RandomBatchesMatchEnumeration) {
  Rng rng = make_rng(4, "rb");
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t B = 1 + uniform_index(rng, 8), N = uniform_index(rng, 8), d = 2 + uniform_index(rng, 7);
    const double tau = 0.02 + uniform_open(rng);
    Tape tape(false);
    const Tensor q = random_rows(B, d, rng), c = random_rows(B * (1 + N), d, rng);
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < B; ++i) pos.push_back(i * (1 + N));
    LossConfig cfg;
    cfg.temperature = tau;
    Batch b{tape.constant(q), tape.constant(c), pos, 0};
    EXPECT_NEAR(batch_loss(b, cfg).item(), enumerate_batch_loss(q, c, pos, tau), 1e-10);
  }
}

Tensor prefix_cols(const Tensor& t, std::size_t dim) {
  const std::size_t R = t.shape()[0], C = t.shape()[1];
  Tensor out({R, dim});
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t k = 0; k < dim; ++k) out[r * dim + k] = t[r * C + k];
  return out;
}

TEST(MrlLoss, FullDimIsBitwiseBatchLoss) {
  Rng rng = make_rng(5, "mrl");
  Tape tape(false);
  Batch b{tape.constant(random_rows(3, 8, rng)), tape.constant(random_rows(9, 8, rng)), {0, 3, 6}, 0};
  LossConfig cfg;
  cfg.mrl_dims = {8};
  cfg.mrl_weights = {1.0};
  EXPECT_EQ(mrl_loss(b, cfg).item(), batch_loss(b, cfg).item());
  EXPECT_EQ(mrl_loss(b, LossConfig{}).item(), batch_loss(b, LossConfig{}).item());
}

TEST(MrlLoss, TwoDimsMatchPerDimEnumeration) {
  Rng rng = make_rng(6, "mrl2");
  Tape tape(false);
  const Tensor q = random_rows(2, 4, rng), c = random_rows(6, 4, rng);
  Batch b{tape.constant(q), tape.constant(c), {0, 3}, 0};
  LossConfig cfg;
  cfg.temperature = 0.3;
  cfg.mrl_dims = {2, 4};
  cfg.mrl_weights = {0.5, 0.5};
  const double oracle = 0.5 * enumerate_batch_loss(prefix_cols(q, 2), prefix_cols(c, 2), {0, 3}, 0.3) +
                        0.5 * enumerate_batch_loss(q, c, {0, 3}, 0.3);
  EXPECT_NEAR(mrl_loss(b, cfg).item(), oracle, 1e-10);
}

TEST(MrlLoss, ZeroPrefixNamesDimension) {
  Tape tape(false);
  Tensor q = Tensor::matrix(1, 4, {0, 0, 1, 1});
  Batch b{tape.constant(q), tape.constant(Tensor::matrix(1, 4, {1, 1, 1, 1})), {0}, 0};
  LossConfig cfg;
  cfg.mrl_dims = {2, 4};
  try {
    mrl_loss(b, cfg);
    FAIL();
  } catch (const DegenerateEmbeddingError& e) {
    EXPECT_NE(std::string(e.what()).find("dim 2"), std::string::npos);
  }
}

TEST(LossConfigTest, Validation) {
  LossConfig c;
  c.temperature = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.mrl_dims = {4, 2};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.mrl_dims = {2, 4};
  c.mrl_weights = {1.0, -1.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.mrl_dims = {2, 4};
  EXPECT_THROW(c.resolved_dims(8), ConfigError);
}

TrainingTriplet make_triplet(int i, std::size_t negs) {
  TrainingTriplet t;
  t.query = "q" + std::to_string(i);
  t.positive = "p" + std::to_string(i);
  for (std::size_t k = 0; k < negs; ++k) t.negatives.push_back("n" + std::to_string(i) + "_" + std::to_string(k));
  t.source = Source::kSent;
  return t;
}

TEST(Layout, FourTripletsSevenNegatives) {
  std::vector<TrainingTriplet> ts;
  for (int i = 0; i < 4; ++i) ts.push_back(make_triplet(i, 7));
  Rng rng = make_rng(7, "layout");
  const BatchTexts b = layout_batch(ts, 7, rng);
  EXPECT_EQ(b.candidates.size(), 32u);
  EXPECT_EQ(b.positive_index, (std::vector<std::size_t>{0, 8, 16, 24}));
  EXPECT_EQ(b.candidates[8], "p1");
  EXPECT_EQ(b.candidates[9], "n1_0");
}

TEST(Layout, ExtraNegativesKeepStoredOrder) {
  std::vector<TrainingTriplet> ts = {make_triplet(0, 10)};
  Rng rng = make_rng(8, "layout");
  const BatchTexts b = layout_batch(ts, 7, rng);
  ASSERT_EQ(b.candidates.size(), 8u);
  for (std::size_t k = 0; k < 7; ++k) EXPECT_EQ(b.candidates[1 + k], "n0_" + std::to_string(k));
}

TEST(Layout, ShortfallResampledOwnNegativesSeeded) {
  std::vector<TrainingTriplet> ts = {make_triplet(0, 3), make_triplet(1, 7)};
  Rng a = make_rng(9, "layout"), b = make_rng(9, "layout");
  const BatchTexts x = layout_batch(ts, 7, a), y = layout_batch(ts, 7, b);
  EXPECT_EQ(x.candidates, y.candidates);
  const std::set<std::string> own = {"n0_0", "n0_1", "n0_2"};
  for (std::size_t k = 1; k < 8; ++k) EXPECT_TRUE(own.count(x.candidates[k])) << x.candidates[k];
  EXPECT_GE(x.duplicate_candidates, 4u);
}

TEST(Layout, EmptyListRejected) {
  Rng rng = make_rng(10, "layout");
  EXPECT_THROW(layout_batch({}, 7, rng), DataError);
}

TEST(Triplet, ValidationRules) {
  TrainingTriplet t = make_triplet(0, 2);
  EXPECT_NO_THROW(t.validate());
  t.negatives.push_back(t.positive);
  EXPECT_THROW(t.validate(), DataError);
  t = make_triplet(0, 0);
  EXPECT_THROW(t.validate(), DataError);
  t.source = Source::kSft;
  EXPECT_NO_THROW(t.validate());
  t.query.clear();
  EXPECT_THROW(t.validate(), DataError);
}

TEST(Triplet, JsonlRoundTrip) {
  std::vector<TrainingTriplet> ts = {make_triplet(0, 2), make_triplet(1, 3)};
  ts[1].ranks = Json{{"positives", {1, 2}}};
  const auto path = std::filesystem::temp_directory_path() / "drama_triplets_test.jsonl";
  write_triplets(path, ts);
  EXPECT_EQ(read_triplets(path), ts);
  std::filesystem::remove(path);
}

TEST(Triplet, UnknownFieldRejected) {
  Json j = to_json(make_triplet(0, 1));
  j["extra"] = 1;
  EXPECT_THROW(triplet_from_json(j), DataError);
}

TEST(Adam, FirstStepMatchesClosedForm) {
  ParameterSet p;
  p.add("w", Tensor({1}, 0.5));
  ParameterSet g;
  g.add("w", Tensor({1}, -0.2));
  Adam opt(p);
  opt.step(p, g, 0.01);
  // m_hat = g, v_hat = g^2 at t = 1.
  const double expected = 0.5 - 0.01 * (-0.2) / (std::sqrt(0.04) + 1e-8);
  EXPECT_NEAR(p.at("w")[0], expected, 1e-15);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(Adam, NonFiniteGradientLeavesState) {
  ParameterSet p;
  p.add("w", Tensor({2}, 0.5));
  ParameterSet g;
  g.add("w", Tensor({2}, std::vector<double>{0.1, std::nan("")}));
  Adam opt(p);
  EXPECT_THROW(opt.step(p, g, 0.01), NumericError);
  EXPECT_EQ(p.at("w")[0], 0.5);
  EXPECT_EQ(opt.steps(), 0u);
}

encoder::EncoderConfig tiny_encoder() {
  encoder::EncoderConfig c;
  c.num_layers = 1;
  c.hidden_dim = 16;
  c.num_heads = 2;
  c.head_dim = 8;
  c.intermediate_dim = 32;
  c.vocab_size = 64;
  c.max_positions = 16;
  return c;
}

std::vector<TrainingTriplet> word_triplets() {
  const std::vector<std::string> words = {"apple", "river", "stone", "cloud", "ember", "frost", "grain", "harbor"};
  std::vector<TrainingTriplet> ts;
  for (std::size_t i = 0; i < 4; ++i) {
    TrainingTriplet t;
    t.query = words[i] + " question";
    t.positive = words[i] + " passage about " + words[i];
    t.negatives = {words[i + 4] + " passage about " + words[i + 4]};
    t.source = Source::kSft;
    ts.push_back(t);
  }
  return ts;
}

TEST(TrainStep, ZeroLearningRateLeavesParameters) {
  const auto cfg = tiny_encoder();
  ParameterSet p = encoder::init_parameters(cfg, 1);
  const ParameterSet before = p;
  encoder::WordTokenizer tok(64);
  Adam opt(p);
  LossConfig loss;
  loss.num_hard_negatives = 1;
  Rng rng = make_rng(1, "ts");
  train_step(cfg, p, tok, word_triplets(), loss, opt, 0.0, rng);
  EXPECT_EQ(p, before);
}

TEST(TrainStep, NonFiniteParametersRejected) {
  const auto cfg = tiny_encoder();
  ParameterSet p = encoder::init_parameters(cfg, 1);
  p.at("final_norm")[0] = std::nan("");
  encoder::WordTokenizer tok(64);
  Adam opt(p);
  Rng rng = make_rng(1, "ts");
  EXPECT_THROW(train_step(cfg, p, tok, word_triplets(), LossConfig{}, opt, 1e-3, rng), NumericError);
  EXPECT_EQ(opt.steps(), 0u);
}

TEST(TrainStep, LossDecreasesOnFixedBatch) {
  const auto cfg = tiny_encoder();
  ParameterSet p = encoder::init_parameters(cfg, 2);
  encoder::WordTokenizer tok(64);
  Adam opt(p);
  LossConfig loss;
  loss.num_hard_negatives = 1;
  const auto ts = word_triplets();
  double first = 0.0, last = 0.0;
  for (int s = 0; s < 200; ++s) {
    Rng rng = make_rng(2, "fixed");
    last = train_step(cfg, p, tok, ts, loss, opt, 1e-3, rng).loss;
    if (s == 0) first = last;
  }
  EXPECT_LT(last, first);
}

TEST(Train, BatchIndicesCoverEpochs) {
  std::set<std::size_t> seen;
  for (std::size_t step = 0; step < 5; ++step)
    for (auto i : batch_indices(10, 2, 3, step)) seen.insert(i);
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(batch_indices(10, 4, 3, 7), batch_indices(10, 4, 3, 7));
}

TEST(Train, ResumeReproducesTrajectory) {
  const auto cfg = tiny_encoder();
  encoder::WordTokenizer tok(64);
  const auto ts = word_triplets();
  TrainConfig tc;
  tc.steps = 6;
  tc.batch_size = 2;
  tc.loss.num_hard_negatives = 1;
  tc.seed = 5;
  ParameterSet a = encoder::init_parameters(cfg, 3);
  Adam oa(a);
  const auto full = train_retriever(cfg, a, tok, ts, tc, oa);

  ParameterSet b = encoder::init_parameters(cfg, 3);
  Adam ob(b);
  TrainConfig half = tc;
  half.steps = 3;
  train_retriever(cfg, b, tok, ts, half, ob);
  ParameterSet saved;
  ob.save_to(saved);
  Adam resumed = Adam::load_from(saved, b);
  const auto rest = train_retriever(cfg, b, tok, ts, tc, resumed);
  EXPECT_EQ(a, b);
  ASSERT_EQ(rest.losses.size(), 3u);
  EXPECT_EQ(rest.losses[2], full.losses[5]);
}

TEST(Train, LearningRateSchedule) {
  TrainConfig tc;
  tc.lr = 1.0;
  tc.steps = 10;
  tc.warmup_steps = 2;
  EXPECT_DOUBLE_EQ(learning_rate_at(tc, 0), 0.5);
  EXPECT_DOUBLE_EQ(learning_rate_at(tc, 5), 1.0);
  tc.linear_decay = true;
  EXPECT_LT(learning_rate_at(tc, 9), learning_rate_at(tc, 5));
}

}  // namespace
}  // namespace drama::objective
