#pragma once

// Brute-force reference model. Every routine is a direct loop nest over the
// layer definition with no reuse of the systolic data path; it is the ground
// truth the simulator is checked against.

#include <cstdint>
#include <span>
#include <vector>

#include "bwsnn/netmodel.hpp"
#include "bwsnn/tensor.hpp"

namespace bwsnn {

// O[k,x,y] = sum over c,i,j of W[k,c,i,j] * S[c,x+i,y+j].
SumTensor conv2d_ref(const SpikeTensor& spikes, const BinaryKernelSet& kernels, const LayerShape& shape);
// O[k,x,y] = sum over i,j of W[k,i,j] * S[k,x+i,y+j].
SumTensor depthwise_ref(const SpikeTensor& spikes, const BinaryKernelSet& kernels, const LayerShape& shape);
// Convolution with a 1x1 kernel.
SumTensor fc_ref(const SpikeTensor& spikes, const BinaryKernelSet& kernels, const LayerShape& shape);
// Window sum (depthwise with all-ones weights); the division by I*J is left
// to the neuron threshold.
SumTensor avgpool_ref(const SpikeTensor& spikes, const BinaryKernelSet& kernels, const LayerShape& shape);

// Dispatches on layer.kind. AvgPool layers with no kernel set use all-ones.
SumTensor layer_ref(const Layer& layer, const SpikeTensor& spikes);

// Stacks tensors of equal spatial size along the channel axis.
SpikeTensor concat_channels(std::span<const SpikeTensor* const> parts);

struct ReferenceResult {
  // Spikes of the final layer summed over positions and time, one per output channel.
  std::vector<std::int64_t> counts;
  // trace[step][layer]; empty unless requested.
  std::vector<std::vector<SpikeTensor>> trace;
};

// Time-stepped inference; membrane state persists across the steps.
ReferenceResult snn_forward_ref(const NetworkGraph& graph, std::span<const SpikeTensor> inputs,
                                bool keep_trace = true);

}  // namespace bwsnn
