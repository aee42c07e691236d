#include <benchmark/benchmark.h>

#include "mflab/enc/analysis.hpp"
#include "mflab/enc/synthetic.hpp"
#include "mflab/flow/meanflow.hpp"
#include "mflab/flow/paths.hpp"
#include "mflab/net/velocity_net.hpp"
#include "mflab/num/kernels.hpp"
#include "mflab/num/rng.hpp"
#include "mflab/sample/metrics.hpp"
#include "mflab/sample/sampler.hpp"

namespace {

using namespace mflab;
using num::Tensor;

net::VelocityNet make_net(net::NetMode mode, std::size_t hidden) {
  num::Rng rng(3);
  net::VelocityNet net =
      net::VelocityNet::init(net::NetDims{2, 8, hidden, 3}, net::TimeEmbedConfig{32, 1.0, 10.0}, mode, rng);
  // A freshly initialised net is the zero field; perturb it so the work is realistic.
  for (auto& [name, t] : net.params())
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += 0.05 * rng.normal();
  return net;
}

flow::TrainBatch make_batch(std::size_t b) {
  num::Rng rng(4);
  flow::TrainBatch batch;
  batch.x = rng.normal_tensor({b, 2});
  batch.eps = rng.normal_tensor({b, 2});
  batch.psi = rng.normal_tensor({b, 8});
  batch.t = Tensor({b, 1});
  batch.r = Tensor({b, 1});
  for (std::size_t i = 0; i < b; ++i) {
    const double u = rng.uniform(), w = rng.uniform();
    batch.t[i] = std::max(u, w);
    batch.r[i] = std::min(u, w);
  }
  return batch;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  num::Rng rng(1);
  const Tensor a = rng.normal_tensor({n, n});
  const Tensor b = rng.normal_tensor({n, n});
  for (auto _ : state) benchmark::DoNotOptimize(num::matmul(a, b));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

void BM_ForwardU(benchmark::State& state) {
  const net::VelocityNet net = make_net(net::NetMode::mf, 64);
  const flow::TrainBatch batch = make_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_u(batch.x, batch.t, batch.r, batch.psi));
}
BENCHMARK(BM_ForwardU)->Arg(256);

void BM_FmLossGrad(benchmark::State& state) {
  const net::VelocityNet net = make_net(net::NetMode::fm, 64);
  const flow::TrainBatch batch = make_batch(static_cast<std::size_t>(state.range(0)));
  const Tensor z = flow::interpolate(batch.x, batch.eps, batch.t);
  const Tensor v = flow::cond_velocity(batch.x, batch.eps);
  for (auto _ : state) benchmark::DoNotOptimize(flow::fm_loss_grad(net, z, batch.t, batch.psi, v));
}
BENCHMARK(BM_FmLossGrad)->Arg(256);

void BM_MeanflowLossGrad(benchmark::State& state) {
  const net::VelocityNet net = make_net(net::NetMode::mf, 64);
  const flow::TrainBatch batch = make_batch(static_cast<std::size_t>(state.range(0)));
  const flow::VelocitySource source = flow::VelocitySource::conditional();
  for (auto _ : state) benchmark::DoNotOptimize(flow::meanflow_loss_grad(net, batch, source));
}
BENCHMARK(BM_MeanflowLossGrad)->Arg(256);

void BM_MeanflowSample(benchmark::State& state) {
  const net::VelocityNet net = make_net(net::NetMode::mf, 64);
  num::Rng rng(5);
  const Tensor psi = rng.normal_tensor({1, 8});
  for (auto _ : state) {
    num::Rng r(6);
    benchmark::DoNotOptimize(sample::meanflow_sample(net, psi, static_cast<std::size_t>(state.range(0)), r, 1000));
  }
}
BENCHMARK(BM_MeanflowSample)->Arg(1)->Arg(4);

void BM_EnergyDistance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  num::Rng rng(7);
  const Tensor a = rng.normal_tensor({n, 2});
  const Tensor b = rng.normal_tensor({n, 2});
  for (auto _ : state) benchmark::DoNotOptimize(sample::energy_distance(a, b));
}
BENCHMARK(BM_EnergyDistance)->Arg(1000)->Arg(5000);

void BM_RetrieveTopk(benchmark::State& state) {
  enc::SyntheticEmbedSpec spec;
  const enc::ConditionTable table = enc::gen_synthetic_embeddings(spec, 8);
  enc::SyntheticCorpusSpec cspec;
  cspec.records_per_condition = static_cast<std::size_t>(state.range(0));
  const enc::Corpus corpus = enc::synthetic_corpus(table, cspec, 9);
  const enc::EmbeddingRecord& query = corpus.at(0);
  for (auto _ : state) benchmark::DoNotOptimize(enc::retrieve_topk(query, corpus, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.size()));
}
BENCHMARK(BM_RetrieveTopk)->Arg(250);

}  // namespace
BENCHMARK_MAIN();
