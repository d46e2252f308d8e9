#pragma once

// The five-layer 3x3 convolution stack with a 3x16x16 input.

#include "bwsnn/netmodel.hpp"

namespace bwsnn::testing {

inline NetworkGraph table1_partial() {
  NetworkGraph g;
  g.input = {3, 16, 16};
  const int kernels[] = {16, 16, 16, 16, 6};
  for (int l = 0; l < 5; ++l) {
    Layer layer;
    layer.name = "conv" + std::to_string(l + 1);
    layer.kind = LayerKind::Conv;
    layer.shape.I = 3;
    layer.shape.J = 3;
    layer.shape.K = kernels[l];
    layer.neuron.threshold = {l == 0 ? 4 : 8};
    g.layers.push_back(layer);
  }
  return g;
}

inline NetworkGraph table1() { return infer_shapes(table1_partial()); }

}  // namespace bwsnn::testing
