#include "bwsnn/oracle.hpp"

#include <algorithm>
#include <sstream>

#include "bwsnn/errors.hpp"
#include "bwsnn/neuron.hpp"

namespace bwsnn {

namespace {

void check_input(const SpikeTensor& spikes, const BinaryKernelSet& kernels, const LayerShape& shape) {
  if (!spikes.same_dims(shape.C, shape.H, shape.W)) {
    std::ostringstream msg;
    msg << "spike tensor " << spikes.channels() << "x" << spikes.rows() << "x" << spikes.cols()
        << " does not match layer input " << shape.C << "x" << shape.H << "x" << shape.W;
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (kernels.kernels() != shape.K || kernels.channels() != shape.C || kernels.height() != shape.I ||
      kernels.width() != shape.J) {
    throw Error(ErrorCode::DimensionMismatch, "kernel set does not match layer shape");
  }
  if (shape.X != shape.H - shape.I + 1 || shape.Y != shape.W - shape.J + 1) {
    throw Error(ErrorCode::DimensionMismatch, "output size inconsistent with stride 1, no padding");
  }
}

}  // namespace

SumTensor conv2d_ref(const SpikeTensor& S, const BinaryKernelSet& kernels, const LayerShape& shape) {
  if (is_per_channel(kernels.kind())) {
    throw Error(ErrorCode::KindMismatch, "conv2d_ref needs a full-depth kernel set");
  }
  check_input(S, kernels, shape);
  SumTensor O(shape.K, shape.X, shape.Y, 0);
  for (int k = 0; k < shape.K; ++k)
    for (int x = 0; x < shape.X; ++x)
      for (int y = 0; y < shape.Y; ++y)
        for (int c = 0; c < shape.C; ++c)
          for (int i = 0; i < shape.I; ++i)
            for (int j = 0; j < shape.J; ++j)
              O.at(k, x, y) += kernels.stored(k, c, i, j) * S.at(c, x + i, y + j);
  return O;
}

SumTensor depthwise_ref(const SpikeTensor& S, const BinaryKernelSet& kernels, const LayerShape& shape) {
  if (!is_per_channel(kernels.kind()) || shape.K != shape.C) {
    throw Error(ErrorCode::KindMismatch, "depthwise_ref needs a per-channel kernel set with K == C");
  }
  check_input(S, kernels, shape);
  SumTensor O(shape.K, shape.X, shape.Y, 0);
  for (int k = 0; k < shape.K; ++k)
    for (int x = 0; x < shape.X; ++x)
      for (int y = 0; y < shape.Y; ++y)
        for (int i = 0; i < shape.I; ++i)
          for (int j = 0; j < shape.J; ++j)
            O.at(k, x, y) += kernels.stored(k, 0, i, j) * S.at(k, x + i, y + j);
  return O;
}

SumTensor fc_ref(const SpikeTensor& S, const BinaryKernelSet& kernels, const LayerShape& shape) {
  if (shape.I != 1 || shape.J != 1) {
    throw Error(ErrorCode::KindMismatch, "fully-connected layers have a 1x1 kernel");
  }
  return conv2d_ref(S, kernels, shape);
}

SumTensor avgpool_ref(const SpikeTensor& S, const BinaryKernelSet& kernels, const LayerShape& shape) {
  if (!kernels.all_positive()) {
    throw Error(ErrorCode::KindMismatch, "average pooling uses all-ones weights");
  }
  return depthwise_ref(S, kernels, shape);
}

SumTensor layer_ref(const Layer& layer, const SpikeTensor& spikes) {
  switch (layer.kind) {
    case LayerKind::Conv: return conv2d_ref(spikes, layer.kernels, layer.shape);
    case LayerKind::Depthwise: return depthwise_ref(spikes, layer.kernels, layer.shape);
    case LayerKind::FullyConnected: return fc_ref(spikes, layer.kernels, layer.shape);
    case LayerKind::AvgPool:
      if (layer.kernels.empty()) {
        return avgpool_ref(spikes, all_ones_kernels(layer.kind, layer.shape), layer.shape);
      }
      return avgpool_ref(spikes, layer.kernels, layer.shape);
  }
  throw Error(ErrorCode::KindMismatch, "unknown layer kind");
}

SpikeTensor concat_channels(std::span<const SpikeTensor* const> parts) {
  if (parts.size() == 1) return *parts[0];
  int channels = 0;
  for (const auto* p : parts) {
    if (p->rows() != parts[0]->rows() || p->cols() != parts[0]->cols()) {
      throw Error(ErrorCode::DimensionMismatch, "concatenated tensors differ in spatial shape");
    }
    channels += p->channels();
  }
  SpikeTensor out(channels, parts[0]->rows(), parts[0]->cols());
  auto dst = out.data().begin();
  for (const auto* p : parts) dst = std::copy(p->data().begin(), p->data().end(), dst);
  return out;
}

ReferenceResult snn_forward_ref(const NetworkGraph& graph, std::span<const SpikeTensor> inputs,
                                bool keep_trace) {
  if (const auto violations = validate(graph); !violations.empty()) {
    throw Error(ErrorCode::InvalidGraph, violations.front().message);
  }
  if (graph.layers.empty()) throw Error(ErrorCode::InvalidGraph, "network has no layers");

  const auto n_layers = graph.layers.size();
  std::vector<NeuronBank> banks;
  banks.reserve(n_layers);
  for (const auto& layer : graph.layers) {
    banks.emplace_back(layer.neuron, layer.shape.K, layer.shape.X, layer.shape.Y);
  }

  const auto& last = graph.layers.back().shape;
  ReferenceResult result;
  result.counts.assign(static_cast<std::size_t>(last.K), 0);

  for (const auto& input : inputs) {
    if (!input.same_dims(graph.input.C, graph.input.H, graph.input.W)) {
      throw Error(ErrorCode::DimensionMismatch, "input spike tensor does not match network input");
    }
    std::vector<SpikeTensor> outputs(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
      const auto& layer = graph.layers[l];
      std::vector<const SpikeTensor*> parts;
      for (const int src : graph.sources(static_cast<int>(l))) {
        parts.push_back(src == kNetworkInput ? &input : &outputs[static_cast<std::size_t>(src)]);
      }
      const auto layer_in = concat_channels(parts);
      const auto sums = layer_ref(layer, layer_in);

      SpikeTensor spikes(layer.shape.K, layer.shape.X, layer.shape.Y);
      for (int k = 0; k < layer.shape.K; ++k)
        for (int x = 0; x < layer.shape.X; ++x)
          for (int y = 0; y < layer.shape.Y; ++y)
            spikes.at(k, x, y) = banks[l].update(k, x, y, sums.at(k, x, y));
      outputs[l] = std::move(spikes);
    }

    const auto& final_spikes = outputs.back();
    for (int k = 0; k < last.K; ++k)
      for (int x = 0; x < last.X; ++x)
        for (int y = 0; y < last.Y; ++y) result.counts[static_cast<std::size_t>(k)] += final_spikes.at(k, x, y);

    if (keep_trace) result.trace.push_back(std::move(outputs));
  }
  return result;
}

}  // namespace bwsnn
