#include <random>

#include <benchmark/benchmark.h>

#include "bwsnn/costmodel.hpp"
#include "bwsnn/fileio.hpp"
#include "bwsnn/oracle.hpp"
#include "bwsnn/systolic.hpp"

namespace {

using namespace bwsnn;

NetworkGraph five_layer_stack() {
  NetworkGraph g;
  g.input = {3, 16, 16};
  for (const int k : {16, 16, 16, 16, 6}) {
    Layer l;
    l.shape.I = l.shape.J = 3;
    l.shape.K = k;
    l.neuron.threshold = {4};
    g.layers.push_back(l);
  }
  g = infer_shapes(g);
  attach_weights(g, random_weights(g, 1));
  return g;
}

std::vector<SpikeTensor> frames(int steps) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution spike(0.3);
  std::vector<SpikeTensor> out(static_cast<std::size_t>(steps), SpikeTensor(3, 16, 16));
  for (auto& f : out)
    for (auto& v : f.data()) v = spike(rng);
  return out;
}

void BM_Systolic(benchmark::State& state) {
  const auto g = five_layer_stack();
  const auto in = frames(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_network(g, in).counts);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Systolic)->Arg(1)->Arg(37);

void BM_Reference(benchmark::State& state) {
  const auto g = five_layer_stack();
  const auto in = frames(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(snn_forward_ref(g, in, false).counts);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Reference)->Arg(1)->Arg(37);

void BM_Sweep(benchmark::State& state) {
  TopologyFamily f;
  f.depths = {3, 4, 5, 6};
  f.hidden_kernels = {8, 16, 24, 32};
  for (auto _ : state) benchmark::DoNotOptimize(sweep(f, std::nullopt, 1).size());
}
BENCHMARK(BM_Sweep);

}  // namespace

BENCHMARK_MAIN();
