#pragma once

// Network description: layer shapes, binary kernels, neuron parameters and the
// stream graph connecting layer modules. Stride is fixed at 1 and padding at 0
// throughout, so every layer obeys X = H - I + 1 and Y = W - J + 1.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bwsnn {

enum class LayerKind { Conv, Depthwise, FullyConnected, AvgPool };

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(std::string_view name);

// Depthwise and average-pool layers keep one I x J kernel per channel.
constexpr bool is_per_channel(LayerKind kind) {
  return kind == LayerKind::Depthwise || kind == LayerKind::AvgPool;
}

struct LayerShape {
  int C = 0;  // input channels
  int H = 0;  // input height
  int W = 0;  // input width
  int I = 0;  // kernel height
  int J = 0;  // kernel width
  int K = 0;  // kernels / output channels
  int X = 0;  // output height
  int Y = 0;  // output width

  int chain_length() const { return (I - 1) * W + J; }
  int pe_rows() const { return C * J; }
  int pe_cols() const { return K * I; }
  int fan_in(LayerKind kind) const { return (is_per_channel(kind) ? 1 : C) * I * J; }

  bool operator==(const LayerShape&) const = default;
};

// K kernels of +-1 weights. Conv/FC sets hold K x C x I x J entries; per-channel
// kinds hold K x 1 x I x J entries where kernel k only sees input channel k.
class BinaryKernelSet {
 public:
  BinaryKernelSet() = default;
  // All weights +1.
  BinaryKernelSet(LayerKind kind, int kernels, int channels, int height, int width);

  // Throws DimensionMismatch on a size mismatch and ValueOutOfRange on any
  // entry other than -1 or +1.
  static BinaryKernelSet from_values(LayerKind kind, int kernels, int channels, int height,
                                     int width, std::vector<std::int8_t> values);

  LayerKind kind() const { return kind_; }
  int kernels() const { return kernels_; }
  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int depth_per_kernel() const { return is_per_channel(kind_) ? 1 : channels_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  // Stored weight; c indexes [0, depth_per_kernel()).
  std::int8_t stored(int k, int c, int i, int j) const { return values_[index(k, c, i, j)]; }
  void set(int k, int c, int i, int j, std::int8_t w);
  // Stored-bit convention: -1 <-> 0, +1 <-> 1.
  bool stored_bit(int k, int c, int i, int j) const { return stored(k, c, i, j) > 0; }

  // Weight seen by input channel c of kernel k across the full C inputs; zero
  // where a per-channel kernel has no connection.
  int weight(int k, int c, int i, int j) const;

  bool all_positive() const;
  bool matches(LayerKind kind, const LayerShape& shape) const;

  const std::vector<std::int8_t>& values() const { return values_; }

  bool operator==(const BinaryKernelSet&) const = default;

 private:
  std::size_t index(int k, int c, int i, int j) const {
    return ((static_cast<std::size_t>(k) * depth_per_kernel() + c) * height_ + i) * width_ + j;
  }

  LayerKind kind_ = LayerKind::Conv;
  int kernels_ = 0;
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<std::int8_t> values_;
};

enum class ResetMode { Subtractive, ToZero };

std::string_view to_string(ResetMode mode);
std::optional<ResetMode> parse_reset_mode(std::string_view name);

// Vectors of length 1 broadcast to every channel (threshold, bias) or every
// neuron (initial_potential).
struct NeuronParams {
  std::vector<std::int64_t> threshold{1};
  std::vector<std::int64_t> bias{0};
  std::vector<std::int64_t> initial_potential{0};
  ResetMode reset = ResetMode::Subtractive;

  std::int64_t threshold_of(int k) const { return threshold.size() == 1 ? threshold[0] : threshold[k]; }
  std::int64_t bias_of(int k) const { return bias.size() == 1 ? bias[0] : bias[k]; }
  std::int64_t initial_of(std::size_t neuron) const {
    return initial_potential.size() == 1 ? initial_potential[0] : initial_potential[neuron];
  }

  bool operator==(const NeuronParams&) const = default;
};

// Source id for the external (layer-1) input stream.
inline constexpr int kNetworkInput = -1;

struct Layer {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  LayerShape shape;
  BinaryKernelSet kernels;
  NeuronParams neuron;
  // Streams concatenated channel-wise, in order, to form this layer's input.
  // Empty means the previous layer (or the network input for layer 0).
  std::vector<int> inputs;
  // Column-accumulation latency in cycles.
  int accumulation_delay = 1;
  int stride = 1;
  int padding = 0;

  bool operator==(const Layer&) const = default;
};

struct StreamShape {
  int C = 0;
  int H = 0;
  int W = 0;

  bool operator==(const StreamShape&) const = default;
};

// A non-default stream edge: source output concatenated into the input of
// layer `to`.
struct SkipEdge {
  int from = kNetworkInput;
  int to = 0;

  bool operator==(const SkipEdge&) const = default;
};

struct NetworkGraph {
  StreamShape input;
  std::vector<Layer> layers;

  std::vector<int> sources(int layer) const;
  // Shape of the stream produced by `source` (kNetworkInput or a layer).
  StreamShape stream_shape(int source) const;

  // Routes the output of `from` into `to`, inserted at `position` within the
  // concatenation (appended when absent).
  void add_skip(int from, int to, std::optional<int> position = std::nullopt);
  // Each chain starts from `fanout`; `join` concatenates the chain tails in order.
  void add_branch(int fanout, const std::vector<std::vector<int>>& chains, int join);

  bool operator==(const NetworkGraph&) const = default;
};

std::vector<SkipEdge> skip_edges(const NetworkGraph& graph);

// Fills C,H,W from producers (checking any preset values), K for per-channel
// kinds, I = J = 1 for fully-connected layers, and X,Y. Throws ShapeUnderflow,
// ChannelMismatch or InvalidGraph.
NetworkGraph infer_shapes(NetworkGraph graph);

struct Violation {
  int layer = kNetworkInput;  // kNetworkInput for graph-level problems
  std::string fields;
  std::string message;
};

// Every invariant violation; an empty result means the graph is legal.
std::vector<Violation> validate(const NetworkGraph& graph);

// CJ x KI weight grid of the PE array; 0 marks an inert PE.
struct PeMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::int8_t> weights;

  std::int8_t at(int row, int col) const { return weights[static_cast<std::size_t>(row) * cols + col]; }
  bool active(int row, int col) const { return at(row, col) != 0; }
  int active_count() const;
};

// Weight W[k,c,i,j] lands in sub-array (j,i) at local (c,k): global row j*C+c,
// global column i*K+k. Per-channel kernels occupy the sub-array diagonal.
// Throws DimensionMismatch.
PeMatrix map_kernels(const LayerShape& shape, const BinaryKernelSet& kernels);

BinaryKernelSet all_ones_kernels(LayerKind kind, const LayerShape& shape);

}  // namespace bwsnn
