#include <benchmark/benchmark.h>

#include "drama/encoder/model.h"
#include "drama/encoder/parameters.h"
#include "drama/eval/index.h"
#include "drama/eval/metrics.h"
#include "drama/numerics/ops.h"
#include "drama/numerics/tape.h"
#include "drama/objective/loss.h"
#include "drama/util/rng.h"

using namespace drama;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  for (double& x : v) x = normal(rng);
  return v;
}

encoder::TokenSequence random_seq(Rng& rng, std::size_t len, std::size_t vocab) {
  std::vector<std::int32_t> ids;
  for (std::size_t i = 0; i + 1 < len; ++i) ids.push_back(2 + static_cast<std::int32_t>(uniform_index(rng, vocab - 2)));
  ids.push_back(1);
  return encoder::TokenSequence::unpadded(std::move(ids));
}

void BM_SearchTopK(benchmark::State& state) {
  const std::size_t n = state.range(0), d = 64;
  Rng rng = make_rng(1, "bench.search");
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (std::size_t i = 0; i < n; ++i) rows.emplace_back("d" + std::to_string(i), random_vec(rng, d));
  const auto index = eval::ExactIndex::build(std::move(rows));
  const auto q = random_vec(rng, d);
  for (auto _ : state) benchmark::DoNotOptimize(index.search_topk(q, 10));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SearchTopK)->Arg(2000)->Arg(20000);

void BM_EncodeDesk(benchmark::State& state) {
  const auto cfg = encoder::desk_config();
  const auto params = encoder::init_parameters(cfg, 2);
  Rng rng = make_rng(2, "bench.encode");
  const auto seq = random_seq(rng, state.range(0), cfg.vocab_size);
  for (auto _ : state) benchmark::DoNotOptimize(encoder::encode(cfg, params, seq));
}
BENCHMARK(BM_EncodeDesk)->Arg(50)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto cfg = encoder::desk_config();
  const auto params = encoder::init_parameters(cfg, 3);
  Rng rng = make_rng(3, "bench.fb");
  const auto seq = random_seq(rng, state.range(0), cfg.vocab_size);
  for (auto _ : state) {
    numerics::Tape tape;
    encoder::BoundParameters b(tape, params, true);
    auto loss = numerics::ops::sum(encoder::pooled(cfg, b, seq));
    tape.backward(loss);
    benchmark::DoNotOptimize(b.gradients(params));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_BatchLoss(benchmark::State& state) {
  const std::size_t B = 8, N = 7, d = 64;
  Rng rng = make_rng(4, "bench.loss");
  numerics::Tensor q({B, d}), c({B * (1 + N), d});
  for (double& x : q.data()) x = normal(rng);
  for (double& x : c.data()) x = normal(rng);
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < B; ++i) pos.push_back(i * (1 + N));
  const objective::LossConfig cfg;
  for (auto _ : state) {
    numerics::Tape tape(false);
    objective::Batch b{tape.constant(q), tape.constant(c), pos, 0};
    benchmark::DoNotOptimize(objective::batch_loss(b, cfg).item());
  }
}
BENCHMARK(BM_BatchLoss);

void BM_NdcgAt10(benchmark::State& state) {
  Rng rng = make_rng(5, "bench.ndcg");
  eval::Run run;
  eval::Qrels qrels;
  for (int q = 0; q < 200; ++q) {
    const std::string qid = "q" + std::to_string(q);
    eval::RankedList rl;
    for (int r = 0; r < 100; ++r) {
      rl.ids.push_back("d" + std::to_string(uniform_index(rng, 2000)));
      rl.scores.push_back(1.0 - r * 0.01);
    }
    run[qid] = rl;
    for (int j = 0; j < 3; ++j) qrels[qid]["d" + std::to_string(uniform_index(rng, 2000))] = 1 + j % 2;
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::ndcg_at_k(run, qrels, 10).mean);
}
BENCHMARK(BM_NdcgAt10);

}  // namespace
BENCHMARK_MAIN();
