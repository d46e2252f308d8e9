#include "bwsnn/netmodel.hpp"

#include <algorithm>
#include <sstream>

#include "bwsnn/errors.hpp"

namespace bwsnn {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Depthwise: return "depthwise";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::AvgPool: return "avgpool";
  }
  return "conv";
}

std::optional<LayerKind> parse_layer_kind(std::string_view name) {
  if (name == "conv") return LayerKind::Conv;
  if (name == "depthwise") return LayerKind::Depthwise;
  if (name == "fc") return LayerKind::FullyConnected;
  if (name == "avgpool") return LayerKind::AvgPool;
  return std::nullopt;
}

std::string_view to_string(ResetMode mode) {
  return mode == ResetMode::Subtractive ? "subtractive" : "to_zero";
}

std::optional<ResetMode> parse_reset_mode(std::string_view name) {
  if (name == "subtractive") return ResetMode::Subtractive;
  if (name == "to_zero") return ResetMode::ToZero;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// BinaryKernelSet

BinaryKernelSet::BinaryKernelSet(LayerKind kind, int kernels, int channels, int height, int width)
    : kind_(kind), kernels_(kernels), channels_(channels), height_(height), width_(width) {
  if (kernels < 0 || channels < 0 || height < 0 || width < 0) {
    throw Error(ErrorCode::DimensionMismatch, "negative kernel dimension");
  }
  values_.assign(static_cast<std::size_t>(kernels) * depth_per_kernel() * height * width, 1);
}

BinaryKernelSet BinaryKernelSet::from_values(LayerKind kind, int kernels, int channels, int height,
                                             int width, std::vector<std::int8_t> values) {
  BinaryKernelSet set(kind, kernels, channels, height, width);
  if (values.size() != set.values_.size()) {
    std::ostringstream msg;
    msg << "kernel set expects " << set.values_.size() << " weights, got " << values.size();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  for (const auto v : values) {
    if (v != 1 && v != -1) {
      throw Error(ErrorCode::ValueOutOfRange, "binary weights must be -1 or +1");
    }
  }
  set.values_ = std::move(values);
  return set;
}

void BinaryKernelSet::set(int k, int c, int i, int j, std::int8_t w) {
  if (w != 1 && w != -1) {
    throw Error(ErrorCode::ValueOutOfRange, "binary weights must be -1 or +1");
  }
  values_[index(k, c, i, j)] = w;
}

int BinaryKernelSet::weight(int k, int c, int i, int j) const {
  if (is_per_channel(kind_)) {
    return c == k ? stored(k, 0, i, j) : 0;
  }
  return stored(k, c, i, j);
}

bool BinaryKernelSet::all_positive() const {
  return std::all_of(values_.begin(), values_.end(), [](std::int8_t v) { return v == 1; });
}

bool BinaryKernelSet::matches(LayerKind kind, const LayerShape& shape) const {
  return kind_ == kind && kernels_ == shape.K && channels_ == shape.C && height_ == shape.I &&
         width_ == shape.J;
}

// ---------------------------------------------------------------------------
// NetworkGraph

std::vector<int> NetworkGraph::sources(int layer) const {
  const auto& inputs = layers.at(static_cast<std::size_t>(layer)).inputs;
  if (!inputs.empty()) return inputs;
  return {layer == 0 ? kNetworkInput : layer - 1};
}

StreamShape NetworkGraph::stream_shape(int source) const {
  if (source == kNetworkInput) return input;
  const auto& s = layers.at(static_cast<std::size_t>(source)).shape;
  return {s.K, s.X, s.Y};
}

void NetworkGraph::add_skip(int from, int to, std::optional<int> position) {
  if (to < 0 || to >= static_cast<int>(layers.size())) {
    throw Error(ErrorCode::InvalidGraph, "skip destination out of range");
  }
  auto srcs = sources(to);
  const int at = position.value_or(static_cast<int>(srcs.size()));
  if (at < 0 || at > static_cast<int>(srcs.size())) {
    throw Error(ErrorCode::InvalidGraph, "skip concatenation position out of range");
  }
  srcs.insert(srcs.begin() + at, from);
  layers[static_cast<std::size_t>(to)].inputs = std::move(srcs);
}

void NetworkGraph::add_branch(int fanout, const std::vector<std::vector<int>>& chains, int join) {
  const int n = static_cast<int>(layers.size());
  if (join < 0 || join >= n) throw Error(ErrorCode::InvalidGraph, "branch join out of range");
  std::vector<int> tails;
  for (const auto& chain : chains) {
    if (chain.empty()) {
      tails.push_back(fanout);
      continue;
    }
    int prev = fanout;
    for (const int layer : chain) {
      if (layer < 0 || layer >= n) throw Error(ErrorCode::InvalidGraph, "branch layer out of range");
      layers[static_cast<std::size_t>(layer)].inputs = {prev};
      prev = layer;
    }
    tails.push_back(prev);
  }
  layers[static_cast<std::size_t>(join)].inputs = std::move(tails);
}

std::vector<SkipEdge> skip_edges(const NetworkGraph& graph) {
  std::vector<SkipEdge> edges;
  for (int l = 0; l < static_cast<int>(graph.layers.size()); ++l) {
    const int def = l == 0 ? kNetworkInput : l - 1;
    for (const int src : graph.sources(l)) {
      if (src != def) edges.push_back({src, l});
    }
  }
  return edges;
}

// ---------------------------------------------------------------------------
// Shape inference

namespace {

std::string layer_label(const NetworkGraph& g, int l) {
  std::ostringstream out;
  out << "layer " << l;
  const auto& name = g.layers[static_cast<std::size_t>(l)].name;
  if (!name.empty()) out << " (" << name << ")";
  return out.str();
}

void fill_or_check(int& field, int value, const char* name, const std::string& where) {
  if (field == 0) {
    field = value;
  } else if (field != value) {
    std::ostringstream msg;
    msg << where << ": " << name << "=" << field << " but producer gives " << value;
    throw Error(ErrorCode::ChannelMismatch, msg.str());
  }
}

}  // namespace

NetworkGraph infer_shapes(NetworkGraph graph) {
  if (graph.layers.empty()) throw Error(ErrorCode::InvalidGraph, "network has no layers");
  for (int l = 0; l < static_cast<int>(graph.layers.size()); ++l) {
    const auto where = layer_label(graph, l);
    const auto srcs = graph.sources(l);
    int channels = 0;
    std::optional<StreamShape> spatial;
    for (const int src : srcs) {
      if (src < kNetworkInput || src >= l) {
        throw Error(ErrorCode::InvalidGraph, where + ": input must come from an earlier layer");
      }
      const auto s = graph.stream_shape(src);
      if (spatial && (spatial->H != s.H || spatial->W != s.W)) {
        throw Error(ErrorCode::ChannelMismatch, where + ": concatenated streams differ in spatial shape");
      }
      spatial = s;
      channels += s.C;
    }

    auto& layer = graph.layers[static_cast<std::size_t>(l)];
    auto& shape = layer.shape;
    fill_or_check(shape.C, channels, "C", where);
    fill_or_check(shape.H, spatial->H, "H", where);
    fill_or_check(shape.W, spatial->W, "W", where);
    if (layer.kind == LayerKind::FullyConnected) {
      if (shape.I == 0) shape.I = 1;
      if (shape.J == 0) shape.J = 1;
    }
    if (is_per_channel(layer.kind) && shape.K == 0) shape.K = shape.C;
    if (shape.I < 1 || shape.J < 1 || shape.K < 1) {
      throw Error(ErrorCode::DimensionMismatch, where + ": I, J and K must be positive");
    }

    const int x = shape.H - shape.I + 1;
    const int y = shape.W - shape.J + 1;
    if (x < 1 || y < 1) {
      std::ostringstream msg;
      msg << where << ": kernel " << shape.I << "x" << shape.J << " does not fit input " << shape.H
          << "x" << shape.W;
      throw Error(ErrorCode::ShapeUnderflow, msg.str());
    }
    fill_or_check(shape.X, x, "X", where);
    fill_or_check(shape.Y, y, "Y", where);
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const NetworkGraph& graph) {
  std::vector<Violation> out;
  auto add = [&](int layer, std::string fields, std::string message) {
    out.push_back({layer, std::move(fields), std::move(message)});
  };

  if (graph.input.C < 1 || graph.input.H < 1 || graph.input.W < 1) {
    add(kNetworkInput, "input", "input C, H and W must be >= 1");
  }

  for (int l = 0; l < static_cast<int>(graph.layers.size()); ++l) {
    const auto& layer = graph.layers[static_cast<std::size_t>(l)];
    const auto& s = layer.shape;

    if (std::min({s.C, s.H, s.W, s.I, s.J, s.K, s.X, s.Y}) < 1) {
      add(l, "C,H,W,I,J,K,X,Y", "all shape fields must be >= 1");
      continue;
    }
    if (s.X != s.H - s.I + 1 || s.Y != s.W - s.J + 1) {
      add(l, "X,Y", "output size must equal H-I+1 by W-J+1");
    }
    if (is_per_channel(layer.kind) && s.K != s.C) {
      add(l, "K,C", std::string(to_string(layer.kind)) + " layer requires K == C");
    }
    if (layer.kind == LayerKind::FullyConnected && (s.I != 1 || s.J != 1)) {
      add(l, "I,J", "fully-connected layer requires I == J == 1");
    }
    if (layer.stride != 1) add(l, "stride", "only stride 1 is supported");
    if (layer.padding != 0) add(l, "padding", "only zero padding is supported");
    if (layer.accumulation_delay < 0) add(l, "accumulation_delay", "must be >= 0");

    // Stream connectivity.
    const auto srcs = graph.sources(l);
    bool sources_ok = true;
    for (const int src : srcs) {
      if (src < kNetworkInput || src >= l) {
        add(l, "inputs", "input " + std::to_string(src) + " is not an earlier layer");
        sources_ok = false;
      }
    }
    if (sources_ok) {
      int channels = 0;
      for (const int src : srcs) {
        const auto ss = graph.stream_shape(src);
        channels += ss.C;
        if (ss.H != s.H || ss.W != s.W) {
          std::ostringstream msg;
          msg << "stream from " << (src == kNetworkInput ? std::string("input") : "layer " + std::to_string(src))
              << " is " << ss.H << "x" << ss.W << " but layer expects " << s.H << "x" << s.W;
          add(l, "inputs,H,W", msg.str());
        }
      }
      if (channels != s.C) {
        add(l, "C", "C=" + std::to_string(s.C) + " but incoming streams carry " +
                        std::to_string(channels) + " channels");
      }
    }

    // Neuron parameters.
    const auto& n = layer.neuron;
    const auto per_channel_ok = [&](std::size_t size) {
      return size == 1 || size == static_cast<std::size_t>(s.K);
    };
    if (!per_channel_ok(n.threshold.size())) add(l, "threshold", "expects 1 or K values");
    if (!per_channel_ok(n.bias.size())) add(l, "bias", "expects 1 or K values");
    if (std::any_of(n.threshold.begin(), n.threshold.end(), [](std::int64_t t) { return t <= 0; })) {
      add(l, "threshold", "thresholds must be > 0");
    }
    const auto neurons = static_cast<std::size_t>(s.K) * s.X * s.Y;
    if (n.initial_potential.size() != 1 && n.initial_potential.size() != neurons) {
      add(l, "initial_potential", "expects 1 or K*X*Y values");
    }

    if (!layer.kernels.empty()) {
      if (!layer.kernels.matches(layer.kind, s)) {
        add(l, "kernels", "kernel set dimensions or kind do not match the layer");
      } else if (layer.kind == LayerKind::AvgPool && !layer.kernels.all_positive()) {
        add(l, "kernels", "average-pool weights must all be +1");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel mapping

int PeMatrix::active_count() const {
  return static_cast<int>(std::count_if(weights.begin(), weights.end(), [](std::int8_t w) { return w != 0; }));
}

PeMatrix map_kernels(const LayerShape& shape, const BinaryKernelSet& kernels) {
  if (kernels.kernels() != shape.K || kernels.channels() != shape.C || kernels.height() != shape.I ||
      kernels.width() != shape.J) {
    throw Error(ErrorCode::DimensionMismatch, "kernel set does not match layer shape");
  }
  if (is_per_channel(kernels.kind()) && shape.K != shape.C) {
    throw Error(ErrorCode::DimensionMismatch, "per-channel kernels need K == C");
  }

  PeMatrix pe;
  pe.rows = shape.pe_rows();
  pe.cols = shape.pe_cols();
  pe.weights.assign(static_cast<std::size_t>(pe.rows) * pe.cols, 0);
  auto at = [&](int row, int col) -> std::int8_t& {
    return pe.weights[static_cast<std::size_t>(row) * pe.cols + col];
  };

  for (int k = 0; k < shape.K; ++k) {
    for (int i = 0; i < shape.I; ++i) {
      for (int j = 0; j < shape.J; ++j) {
        if (is_per_channel(kernels.kind())) {
          at(j * shape.C + k, i * shape.K + k) = kernels.stored(k, 0, i, j);
        } else {
          for (int c = 0; c < shape.C; ++c) {
            at(j * shape.C + c, i * shape.K + k) = kernels.stored(k, c, i, j);
          }
        }
      }
    }
  }
  return pe;
}

BinaryKernelSet all_ones_kernels(LayerKind kind, const LayerShape& shape) {
  return BinaryKernelSet(kind, shape.K, shape.C, shape.I, shape.J);
}

}  // namespace bwsnn
