#pragma once

// Rate encoding of [0,1] images into binary spike frames, and the argmax
// readout over final-layer spike counts.

#include <cstdint>
#include <span>
#include <vector>

#include "bwsnn/tensor.hpp"

namespace bwsnn {

enum class EncoderMode { DeterministicAccumulator, BernoulliRate };

struct EncoderSpec {
  EncoderMode mode = EncoderMode::DeterministicAccumulator;
  int time_steps = 0;
  std::uint64_t seed = 0;  // BernoulliRate only
};

// DeterministicAccumulator: per pixel a <- a + v each step, spike and
// a <- a - 1 once a >= 1 (error diffusion, floor(T*v) spikes in total).
// BernoulliRate: independent spike with probability v per step.
// Throws ValueOutOfRange for values outside [0,1] or a negative T.
std::vector<SpikeTensor> encode(const RealTensor& image, const EncoderSpec& spec);

// Argmax, lowest index on ties. Throws EmptyCounts.
std::size_t classify(std::span<const std::int64_t> counts);

}  // namespace bwsnn
