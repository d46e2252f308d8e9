#pragma once

// Integrate-and-fire neuron blocks shared by the reference model and the
// systolic simulator. No leak, no refractory period; at most one spike per
// neuron per time step.

#include <cstdint>
#include <vector>

#include "bwsnn/netmodel.hpp"

namespace bwsnn {

struct IfParams {
  std::int64_t threshold = 1;  // > 0
  std::int64_t bias = 0;
  ResetMode reset = ResetMode::Subtractive;
};

struct NeuronState {
  std::int64_t potential = 0;
};

// V <- V + u + bias; fires when V >= threshold, then subtracts the threshold
// once (Subtractive) or clears V (ToZero).
std::uint8_t if_update(NeuronState& state, const IfParams& params, std::int64_t u);

// Bits needed for a signed membrane register that can never overflow over
// `steps` updates: |V| <= |V0| + steps * (fan_in + |bias|) + threshold.
int potential_word_bits(std::int64_t fan_in, std::int64_t max_abs_bias, std::int64_t max_threshold,
                        std::int64_t max_abs_initial, std::int64_t steps);

// The K*X*Y membrane records of one layer module, i.e. its local buffer.
class NeuronBank {
 public:
  NeuronBank() = default;
  NeuronBank(const NeuronParams& params, int channels, int rows, int cols);

  std::uint8_t update(int k, int x, int y, std::int64_t u);
  std::int64_t potential(int k, int x, int y) const { return state_[index(k, x, y)].potential; }
  IfParams params(int k) const;
  std::size_t size() const { return state_.size(); }
  void reset();

 private:
  std::size_t index(int k, int x, int y) const {
    return (static_cast<std::size_t>(k) * rows_ + x) * cols_ + y;
  }

  NeuronParams params_;
  int channels_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<NeuronState> state_;
};

}  // namespace bwsnn
