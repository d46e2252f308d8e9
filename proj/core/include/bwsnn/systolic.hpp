#pragma once

// Cycle-accurate model of the layer modules.
//
// A layer module is a buffer chain of (I-1)*W + J cells feeding a CJ x KI PE
// crossbar, followed by the neuron blocks and their local buffer. One C-word
// spike vector enters the chain per valid cycle; the chain shifts only on a
// valid vector, so the producer's bubbles never break the row geometry. When
// the vector at stream position (r, c) enters with r >= I-1 and c >= J-1 the
// taps hold the complete window whose bottom-right corner is (r, c). Its K
// weighted sums leave the column adders `accumulation_delay` cycles later and
// are applied to the neurons at (r-I+1, c-J+1).
//
// Layers are chained through a one-cycle hand-off register. A layer that
// concatenates several streams reads each through a bypass delay line sized
// so all streams present the same spatial position on the same cycle.

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "bwsnn/netmodel.hpp"
#include "bwsnn/neuron.hpp"
#include "bwsnn/tensor.hpp"

namespace bwsnn {

// One cycle on a stream: a spike vector, or a bubble.
using Flit = std::optional<std::vector<std::uint8_t>>;

inline constexpr int kHandoffCycles = 1;

// PE output for spike s and stored inverse weight w_bar: the two-bit word
// {w_bar & s, s}.
constexpr std::uint8_t pe_output_bits(std::uint8_t spike, std::uint8_t w_bar) {
  return static_cast<std::uint8_t>(((w_bar & spike) << 1) | spike);
}

// Two's-complement reading of a two-bit PE word: 00 -> 0, 01 -> +1, 11 -> -1.
constexpr int decode_pe_output(std::uint8_t bits) {
  return (bits & 1) - 2 * ((bits >> 1) & 1);
}

class BufferChain {
 public:
  BufferChain() = default;
  BufferChain(int channels, int width, int kernel_h, int kernel_w);

  int length() const { return length_; }
  int channels() const { return channels_; }

  void shift_in(std::span<const std::uint8_t> vec);

  // Cell positions count from the oldest end of the chain, so the tap for
  // kernel element (i, j) sits at i*W + j.
  int tap_position(int i, int j) const { return i * width_ + j; }
  bool cell_valid(int position) const { return position >= length_ - filled_; }
  std::span<const std::uint8_t> cell(int position) const;
  std::span<const std::uint8_t> tap(int i, int j) const { return cell(tap_position(i, j)); }

 private:
  int channels_ = 0;
  int width_ = 0;
  int length_ = 0;
  int newest_ = 0;  // physical slot of the last shifted-in cell
  int filled_ = 0;
  std::vector<std::uint8_t> storage_;
};

class PeCrossbar {
 public:
  PeCrossbar() = default;
  PeCrossbar(const LayerShape& shape, const PeMatrix& weights);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int active_count() const;
  // Flip-flop contents of PE (row, col): the inverse of the stored weight bit.
  std::uint8_t w_bar(int row, int col) const { return w_bar_[index(row, col)]; }
  bool active(int row, int col) const { return active_[index(row, col)] != 0; }

  // Sub-array (j, i) reads tap (i, j); every column sums its CJ PE words and
  // the I column groups of kernel k are then added into sums[k].
  void accumulate(const BufferChain& chain, std::span<std::int32_t> sums) const;

 private:
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * cols_ + col; }

  int C_ = 0;
  int K_ = 0;
  int I_ = 0;
  int J_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> w_bar_;
  std::vector<std::uint8_t> active_;
};

struct StreamPosition {
  int step = 0;
  int x = 0;
  int y = 0;

  bool operator==(const StreamPosition&) const = default;
};

struct Emission {
  StreamPosition position;
  std::vector<std::uint8_t> spikes;  // K bits
};

class LayerModule {
 public:
  // step_budget > 0 limits the stream to step_budget * H * W vectors.
  explicit LayerModule(const Layer& layer, std::int64_t step_budget = 0);

  // Advances one cycle. Throws StreamOverrun past the step budget and
  // DimensionMismatch on a vector that is not C words wide.
  std::optional<Emission> step(const Flit& input);

  const LayerShape& shape() const { return shape_; }
  LayerKind kind() const { return kind_; }
  int accumulation_delay() const { return delay_; }
  const BufferChain& chain() const { return chain_; }
  const PeCrossbar& crossbar() const { return crossbar_; }
  const NeuronBank& neurons() const { return neurons_; }
  // Neuron records held in the local buffer.
  std::size_t local_buffer_records() const { return neurons_.size(); }

  std::uint64_t fetches() const { return fetches_; }
  std::uint64_t valid_outputs() const { return valid_outputs_; }
  std::uint64_t cycles() const { return cycles_; }

 private:
  struct Pending {
    StreamPosition position;
    std::vector<std::int32_t> sums;
  };

  LayerShape shape_;
  LayerKind kind_ = LayerKind::Conv;
  int delay_ = 0;
  std::int64_t step_budget_ = 0;
  BufferChain chain_;
  PeCrossbar crossbar_;
  NeuronBank neurons_;
  std::deque<std::optional<Pending>> accumulation_;
  int stream_index_ = 0;
  int time_step_ = 0;
  std::uint64_t fetches_ = 0;
  std::uint64_t valid_outputs_ = 0;
  std::uint64_t cycles_ = 0;
};

// Throws InvalidGraph when a Conv/Depthwise/FC layer has no kernels.
LayerModule build_layer_module(const Layer& layer, std::int64_t step_budget = 0);

// Fixed-length shift register of flits; length 0 is a wire.
class DelayLine {
 public:
  explicit DelayLine(int length = 0) : cells_(static_cast<std::size_t>(length)) {}

  int length() const { return static_cast<int>(cells_.size()); }
  Flit shift(Flit in);

 private:
  std::vector<Flit> cells_;
  std::size_t head_ = 0;
};

// Stream timing shared by the simulator and the analytic latency model.
// A layer's output_depth is the number of cycles between the network-input
// fetch of the element at the bottom-right of its receptive field and the
// emission of the corresponding output.
struct PipelineTiming {
  std::vector<int> output_depth;
  // bypass_cells[layer][n]: extra delay on the n-th source of `layer`, on top
  // of the hand-off register.
  std::vector<std::vector<int>> bypass_cells;
  int fill_depth = 0;  // max output_depth
};

PipelineTiming pipeline_timing(const NetworkGraph& graph);

// Bypass delay-line length for a stream edge. Throws UnalignableStreams when
// the edge joins streams of different spatial shape and InvalidGraph when the
// edge does not exist.
int compute_bypass_delay(const NetworkGraph& graph, const SkipEdge& edge);

struct LayerCycleStats {
  std::uint64_t fetches = 0;
  std::uint64_t valid_outputs = 0;
  std::int64_t first_output_cycle = -1;
  std::int64_t last_output_cycle = -1;
  int accumulation_delay = 0;
  int output_depth = 0;
  int chain_cells = 0;
  std::uint64_t order_violations = 0;

  bool operator==(const LayerCycleStats&) const = default;
};

struct CycleStats {
  std::uint64_t total_cycles = 0;
  double cycles_per_step = 0.0;
  std::uint64_t input_fetches = 0;
  int fill_depth = 0;
  std::vector<LayerCycleStats> layers;

  bool operator==(const CycleStats&) const = default;
};

struct SimulationOptions {
  bool keep_trace = false;
  // Per-cycle CSV: cycle,layer,event,position,value
  std::ostream* trace_csv = nullptr;
};

struct SimulationResult {
  std::vector<std::int64_t> counts;
  CycleStats stats;
  // trace[step][layer]; empty unless keep_trace.
  std::vector<std::vector<SpikeTensor>> trace;
  // emission_order[layer]: positions in the order they left the layer; empty
  // unless keep_trace.
  std::vector<std::vector<StreamPosition>> emission_order;
};

// Streams inputs.size() time steps back to back through the layer modules and
// drains the pipeline once at the end.
SimulationResult run_network(const NetworkGraph& graph, std::span<const SpikeTensor> inputs,
                             const SimulationOptions& options = {});

}  // namespace bwsnn
