#include <benchmark/benchmark.h>

#include <random>

#include "kgamc/loss.hpp"
#include "kgamc/mkg.hpp"
#include "kgamc/msnet.hpp"
#include "kgamc/nn/ops.hpp"
#include "kgamc/rgcn.hpp"
#include "kgamc/sigsyn.hpp"

using namespace kgamc;

namespace {

nn::Tensor<float> random_tensor(nn::Shape shape, std::uint64_t seed) {
  nn::Tensor<float> t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  for (auto& v : t.data) v = n(rng);
  return t;
}

mkg::HeteroGraph default_graph() {
  return mkg::build_graph(mkg::parse_triples(mkg::default_triples_text()));
}

}  // namespace

// Stem-sized convolution: 32 x 2 x 7 kernel over a batch of frames.
static void BM_Conv1dForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = nn::constant(random_tensor({2, n, 128}, 1));
  const auto w = nn::constant(random_tensor({32, 2, 7}, 2));
  const auto b = nn::constant(random_tensor({32}, 3));
  nn::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv1d(x, w, b, 2, true).value().data.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Conv1dForward)->Arg(32)->Arg(256)->Unit(benchmark::kMicrosecond);

static void BM_Conv1dBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = nn::parameter(random_tensor({32, 2, 7}, 2));
  const auto b = nn::parameter(random_tensor({32}, 3));
  const auto xt = random_tensor({2, n, 128}, 1);
  for (auto _ : state) {
    const auto x = nn::parameter(xt);
    nn::backward(nn::mean(nn::conv1d(x, w, b, 2, true)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Conv1dBackward)->Arg(32)->Arg(256)->Unit(benchmark::kMicrosecond);

// One MSNet forward + backward on a batch, the dominant cost of a training step.
static void BM_MsnetStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const msnet::MsnetConfig cfg;
  const auto params = msnet::MsnetParams<float>::init(cfg, 1);
  const auto head = msnet::ClassifierParams<float>::init(cfg, 2);
  const auto x = nn::constant(random_tensor({2, n, cfg.frame_len}, 3));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % cfg.num_classes);
  for (auto _ : state) {
    const auto logits = msnet::classify(msnet::msnet_forward(x, params), head);
    nn::backward(loss::ce_loss(logits, labels));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MsnetStep)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_MsnetInfer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const msnet::MsnetConfig cfg;
  const auto params = msnet::MsnetParams<float>::init(cfg, 1);
  const auto x = nn::constant(random_tensor({2, n, cfg.frame_len}, 3));
  nn::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(msnet::msnet_forward(x, params).value().data.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MsnetInfer)->Arg(512)->Unit(benchmark::kMillisecond);

// Whole-graph RGCN forward and anchor extraction on the shipped graph.
static void BM_RgcnForward(benchmark::State& state) {
  const auto g = default_graph();
  const auto ops = rgcn::GraphOperators<float>::build(g);
  const auto feats = nn::constant(mkg::init_node_features<float>(g));
  rgcn::RgcnConfig cfg;
  cfg.in_dim = feats.shape()[1];
  const auto params = rgcn::RgcnParams<float>::init(cfg, 1);
  const auto anchor_nodes = mkg::anchors(g, std::vector<ModulationClass>(kAllClasses.begin(), kAllClasses.end()));
  for (auto _ : state) {
    const auto a = rgcn::semantic_anchors(rgcn::rgcn_forward(ops, feats, params), anchor_nodes);
    nn::backward(loss::anchor_penalty(a));
  }
}
BENCHMARK(BM_RgcnForward)->Unit(benchmark::kMicrosecond);

static void BM_SynthFrame(benchmark::State& state) {
  const auto cls = static_cast<std::size_t>(state.range(0));
  const sigsyn::SynthConfig cfg;
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sigsyn::synth_frame(cfg, cls, 10, i++).iq.data());
  state.SetLabel(std::string(class_name(kAllClasses[cls])));
}
BENCHMARK(BM_SynthFrame)->DenseRange(0, 9)->Unit(benchmark::kMicrosecond);

static void BM_NpairLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = nn::parameter(random_tensor({n, 128}, 1));
  const auto anchors = nn::parameter(random_tensor({10, 128}, 2));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 10);
  for (auto _ : state) nn::backward(loss::npair_loss(x, anchors, labels));
}
BENCHMARK(BM_NpairLoss)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
