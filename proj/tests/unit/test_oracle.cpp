#include <doctest.h>

#include "bwsnn/errors.hpp"
#include "bwsnn/oracle.hpp"
#include "random_network.hpp"

using namespace bwsnn;

namespace {

LayerShape shape_of(int C, int H, int W, int I, int J, int K) { return {C, H, W, I, J, K, H - I + 1, W - J + 1}; }

}  // namespace

TEST_CASE("conv2d_ref: zero input gives zero sums") {
  const auto s = shape_of(3, 5, 5, 3, 3, 4);
  std::mt19937_64 rng(1);
  const auto out = conv2d_ref(SpikeTensor(3, 5, 5), testing::random_kernels(rng, LayerKind::Conv, s), s);
  for (const auto v : out.data()) CHECK(v == 0);
}

TEST_CASE("conv2d_ref: single spike times single weight") {
  const auto s = shape_of(1, 1, 1, 1, 1, 1);
  SpikeTensor in(1, 1, 1, 1);
  CHECK(conv2d_ref(in, BinaryKernelSet::from_values(LayerKind::Conv, 1, 1, 1, 1, {-1}), s).at(0, 0, 0) == -1);
  CHECK(conv2d_ref(in, BinaryKernelSet::from_values(LayerKind::Conv, 1, 1, 1, 1, {1}), s).at(0, 0, 0) == 1);
}

TEST_CASE("conv2d_ref agrees with a flat-index sum") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int C = testing::uniform(rng, 1, 4), H = testing::uniform(rng, 1, 7), W = testing::uniform(rng, 1, 7);
    const int I = testing::uniform(rng, 1, H), J = testing::uniform(rng, 1, W), K = testing::uniform(rng, 1, 4);
    const auto s = shape_of(C, H, W, I, J, K);
    const auto kernels = testing::random_kernels(rng, LayerKind::Conv, s);
    const auto in = testing::random_spikes(rng, C, H, W, 0.5);
    const auto out = conv2d_ref(in, kernels, s);
    const auto& wv = kernels.values();
    const auto& sv = in.data();
    for (int k = 0; k < K; ++k)
      for (int x = 0; x < s.X; ++x)
        for (int y = 0; y < s.Y; ++y) {
          int sum = 0;
          for (int n = 0; n < C * I * J; ++n) {
            const int c = n / (I * J), i = (n / J) % I, j = n % J;
            sum += wv[static_cast<std::size_t>(k * C * I * J + n)] * sv[static_cast<std::size_t>((c * H + x + i) * W + y + j)];
          }
          CHECK(out.at(k, x, y) == sum);
        }
  }
}

TEST_CASE("avgpool_ref: 2x2 window of ones sums to 4") {
  const auto s = shape_of(1, 2, 2, 2, 2, 1);
  SpikeTensor in(1, 2, 2, 1);
  CHECK(avgpool_ref(in, all_ones_kernels(LayerKind::AvgPool, s), s).at(0, 0, 0) == 4);
  auto bad = all_ones_kernels(LayerKind::AvgPool, s);
  bad.set(0, 0, 0, 0, -1);
  CHECK_THROWS_AS(avgpool_ref(in, bad, s), Error);
}

TEST_CASE("fc_ref: one-hot input selects a kernel column") {
  const auto s = shape_of(4, 1, 1, 1, 1, 3);
  std::mt19937_64 rng(9);
  const auto kernels = testing::random_kernels(rng, LayerKind::FullyConnected, s);
  for (int c = 0; c < 4; ++c) {
    SpikeTensor in(4, 1, 1);
    in.at(c, 0, 0) = 1;
    const auto out = fc_ref(in, kernels, s);
    for (int k = 0; k < 3; ++k) CHECK(out.at(k, 0, 0) == kernels.stored(k, c, 0, 0));
  }
  CHECK_THROWS_AS(fc_ref(SpikeTensor(4, 2, 2), kernels, shape_of(4, 2, 2, 2, 2, 3)), Error);
}

TEST_CASE("fc_ref equals conv2d_ref with the same 1x1 kernels") {
  std::mt19937_64 rng(13);
  const auto s = shape_of(5, 3, 4, 1, 1, 6);
  const auto conv = testing::random_kernels(rng, LayerKind::Conv, s);
  const auto fc = BinaryKernelSet::from_values(LayerKind::FullyConnected, 6, 5, 1, 1, conv.values());
  const auto in = testing::random_spikes(rng, 5, 3, 4, 0.5);
  CHECK(fc_ref(in, fc, s) == conv2d_ref(in, conv, s));
}

TEST_CASE("depthwise_ref equals conv2d_ref with block-diagonal kernels") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int C = testing::uniform(rng, 1, 5);
    const auto s = shape_of(C, 6, 5, 2, 3, C);
    const auto dw = testing::random_kernels(rng, LayerKind::Depthwise, s);
    std::vector<std::int8_t> full(static_cast<std::size_t>(C * C * 2 * 3), 1);
    auto conv = BinaryKernelSet::from_values(LayerKind::Conv, C, C, 2, 3, full);
    const auto in = testing::random_spikes(rng, C, 6, 5, 0.5);
    // Off-diagonal channels carry spikes, so zero them out by masking the input per kernel.
    const auto out = depthwise_ref(in, dw, s);
    for (int k = 0; k < C; ++k) {
      SpikeTensor masked(C, 6, 5);
      for (int r = 0; r < 6; ++r)
        for (int col = 0; col < 5; ++col) masked.at(k, r, col) = in.at(k, r, col);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) conv.set(k, k, i, j, dw.stored(k, 0, i, j));
      const auto ref = conv2d_ref(masked, conv, s);
      for (int x = 0; x < s.X; ++x)
        for (int y = 0; y < s.Y; ++y) CHECK(out.at(k, x, y) == ref.at(k, x, y));
    }
  }
}

TEST_CASE("conv2d_ref is additive over disjoint spike sets") {
  std::mt19937_64 rng(21);
  const auto s = shape_of(3, 6, 6, 3, 3, 4);
  const auto kernels = testing::random_kernels(rng, LayerKind::Conv, s);
  for (int trial = 0; trial < 20; ++trial) {
    const auto all = testing::random_spikes(rng, 3, 6, 6, 0.6);
    SpikeTensor a(3, 6, 6), b(3, 6, 6);
    for (std::size_t n = 0; n < all.size(); ++n) {
      if (!all.data()[n]) continue;
      (testing::coin(rng, 0.5) ? a : b).data()[n] = 1;
    }
    const auto sa = conv2d_ref(a, kernels, s), sb = conv2d_ref(b, kernels, s), sall = conv2d_ref(all, kernels, s);
    for (std::size_t n = 0; n < sall.size(); ++n) CHECK(sall.data()[n] == sa.data()[n] + sb.data()[n]);
  }
}

TEST_CASE("sums are bounded by the fan-in") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto rc = testing::random_case(seed);
    const auto& layer = rc.graph.layers[0];
    std::mt19937_64 rng(seed);
    const auto in = testing::random_spikes(rng, layer.shape.C, layer.shape.H, layer.shape.W, 0.5);
    const auto out = layer_ref(layer, in);
    const int bound = layer.shape.fan_in(layer.kind);
    for (const auto v : out.data()) CHECK(std::abs(v) <= bound);
  }
}

TEST_CASE("kernel and layer mismatches throw") {
  const auto s = shape_of(2, 4, 4, 3, 3, 2);
  CHECK_THROWS_AS(conv2d_ref(SpikeTensor(2, 4, 4), BinaryKernelSet(LayerKind::Depthwise, 2, 2, 3, 3), s), Error);
  CHECK_THROWS_AS(conv2d_ref(SpikeTensor(3, 4, 4), BinaryKernelSet(LayerKind::Conv, 2, 2, 3, 3), s), Error);
  CHECK_THROWS_AS(conv2d_ref(SpikeTensor(2, 4, 4), BinaryKernelSet(LayerKind::Conv, 2, 2, 2, 2), s), Error);
}

TEST_CASE("snn_forward_ref") {
  NetworkGraph g;
  g.input = {1, 1, 1};
  Layer l;
  l.kind = LayerKind::FullyConnected;
  l.shape = shape_of(1, 1, 1, 1, 1, 1);
  l.kernels = BinaryKernelSet(LayerKind::FullyConnected, 1, 1, 1, 1);
  g.layers.push_back(l);

  SUBCASE("T=0 gives zero counts and an empty trace") {
    const auto r = snn_forward_ref(g, {});
    CHECK(r.counts == std::vector<std::int64_t>{0});
    CHECK(r.trace.empty());
  }
  SUBCASE("pass-through neuron repeats its input") {
    std::vector<SpikeTensor> in(5, SpikeTensor(1, 1, 1, 1));
    const auto r = snn_forward_ref(g, in);
    CHECK(r.counts == std::vector<std::int64_t>{5});
    REQUIRE(r.trace.size() == 5);
    for (const auto& step : r.trace) CHECK(step[0].at(0, 0, 0) == 1);
  }
  SUBCASE("membrane state persists across steps") {
    g.layers[0].neuron.threshold = {2};
    std::vector<SpikeTensor> in(4, SpikeTensor(1, 1, 1, 1));
    const auto r = snn_forward_ref(g, in);
    CHECK(r.counts == std::vector<std::int64_t>{2});
    CHECK(r.trace[0][0].at(0, 0, 0) == 0);
    CHECK(r.trace[1][0].at(0, 0, 0) == 1);
  }
  SUBCASE("final layer spike counts sum over positions") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto rc = testing::random_case(seed);
      const auto r = snn_forward_ref(rc.graph, rc.inputs);
      std::vector<std::int64_t> counts(static_cast<std::size_t>(rc.graph.layers.back().shape.K), 0);
      for (const auto& step : r.trace) {
        const auto& t = step.back();
        for (int k = 0; k < t.channels(); ++k)
          for (int x = 0; x < t.rows(); ++x)
            for (int y = 0; y < t.cols(); ++y) counts[static_cast<std::size_t>(k)] += t.at(k, x, y);
      }
      CHECK(counts == r.counts);
    }
  }
}

TEST_CASE("concat_channels stacks in order") {
  SpikeTensor a(1, 2, 2, 1), b(2, 2, 2, 0);
  b.at(1, 1, 1) = 1;
  const SpikeTensor* parts[] = {&a, &b};
  const auto out = concat_channels(parts);
  CHECK(out.channels() == 3);
  CHECK(out.at(0, 0, 0) == 1);
  CHECK(out.at(1, 0, 0) == 0);
  CHECK(out.at(2, 1, 1) == 1);
}
