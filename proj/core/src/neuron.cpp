#include "bwsnn/neuron.hpp"

#include <bit>
#include <cassert>
#include <cstdlib>

namespace bwsnn {

std::uint8_t if_update(NeuronState& state, const IfParams& params, std::int64_t u) {
  assert(params.threshold > 0);
  state.potential += u + params.bias;
  if (state.potential < params.threshold) return 0;
  if (params.reset == ResetMode::Subtractive) {
    state.potential -= params.threshold;
  } else {
    state.potential = 0;
  }
  return 1;
}

int potential_word_bits(std::int64_t fan_in, std::int64_t max_abs_bias, std::int64_t max_threshold,
                        std::int64_t max_abs_initial, std::int64_t steps) {
  const auto bound = static_cast<std::uint64_t>(max_abs_initial) +
                     static_cast<std::uint64_t>(steps) * static_cast<std::uint64_t>(fan_in + max_abs_bias) +
                     static_cast<std::uint64_t>(max_threshold);
  return static_cast<int>(std::bit_width(bound)) + 1;
}

NeuronBank::NeuronBank(const NeuronParams& params, int channels, int rows, int cols)
    : params_(params), channels_(channels), rows_(rows), cols_(cols) {
  reset();
}

std::uint8_t NeuronBank::update(int k, int x, int y, std::int64_t u) {
  return if_update(state_[index(k, x, y)], params(k), u);
}

IfParams NeuronBank::params(int k) const {
  return {params_.threshold_of(k), params_.bias_of(k), params_.reset};
}

void NeuronBank::reset() {
  state_.assign(static_cast<std::size_t>(channels_) * rows_ * cols_, NeuronState{});
  for (std::size_t n = 0; n < state_.size(); ++n) state_[n].potential = params_.initial_of(n);
}

}  // namespace bwsnn
