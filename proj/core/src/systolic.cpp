#include "bwsnn/systolic.hpp"

#include <algorithm>
#include <sstream>

#include "bwsnn/errors.hpp"

namespace bwsnn {

// ---------------------------------------------------------------------------
// BufferChain

BufferChain::BufferChain(int channels, int width, int kernel_h, int kernel_w)
    : channels_(channels), width_(width), length_((kernel_h - 1) * width + kernel_w) {
  if (channels < 1 || width < 1 || kernel_h < 1 || kernel_w < 1 || kernel_w > width) {
    throw Error(ErrorCode::DimensionMismatch, "invalid buffer chain geometry");
  }
  storage_.assign(static_cast<std::size_t>(length_) * channels_, 0);
  newest_ = length_ - 1;
}

void BufferChain::shift_in(std::span<const std::uint8_t> vec) {
  newest_ = (newest_ + 1) % length_;
  std::copy(vec.begin(), vec.end(), storage_.begin() + static_cast<std::ptrdiff_t>(newest_) * channels_);
  filled_ = std::min(filled_ + 1, length_);
}

std::span<const std::uint8_t> BufferChain::cell(int position) const {
  // The oldest cell sits one slot past the newest in the ring.
  const int slot = (newest_ + 1 + position) % length_;
  return {storage_.data() + static_cast<std::size_t>(slot) * channels_, static_cast<std::size_t>(channels_)};
}

// ---------------------------------------------------------------------------
// PeCrossbar

PeCrossbar::PeCrossbar(const LayerShape& shape, const PeMatrix& weights)
    : C_(shape.C), K_(shape.K), I_(shape.I), J_(shape.J), rows_(weights.rows), cols_(weights.cols) {
  if (rows_ != shape.pe_rows() || cols_ != shape.pe_cols()) {
    throw Error(ErrorCode::DimensionMismatch, "PE matrix does not match layer shape");
  }
  w_bar_.resize(weights.weights.size());
  active_.resize(weights.weights.size());
  for (std::size_t n = 0; n < weights.weights.size(); ++n) {
    const auto w = weights.weights[n];
    active_[n] = w != 0;
    w_bar_[n] = w < 0;  // -1 is stored as 0, so its inverse is 1
  }
}

int PeCrossbar::active_count() const {
  return static_cast<int>(std::count(active_.begin(), active_.end(), std::uint8_t{1}));
}

void PeCrossbar::accumulate(const BufferChain& chain, std::span<std::int32_t> sums) const {
  std::fill(sums.begin(), sums.end(), 0);
  for (int i = 0; i < I_; ++i) {
    for (int k = 0; k < K_; ++k) {
      const int col = i * K_ + k;
      std::int32_t column_sum = 0;
      for (int j = 0; j < J_; ++j) {
        const auto data = chain.tap(i, j);
        const int row0 = j * C_;
        for (int c = 0; c < C_; ++c) {
          const auto n = index(row0 + c, col);
          if (!active_[n]) continue;
          column_sum += decode_pe_output(pe_output_bits(data[static_cast<std::size_t>(c)], w_bar_[n]));
        }
      }
      sums[static_cast<std::size_t>(k)] += column_sum;
    }
  }
}

// ---------------------------------------------------------------------------
// LayerModule

LayerModule::LayerModule(const Layer& layer, std::int64_t step_budget)
    : shape_(layer.shape),
      kind_(layer.kind),
      delay_(layer.accumulation_delay),
      step_budget_(step_budget),
      chain_(layer.shape.C, layer.shape.W, layer.shape.I, layer.shape.J),
      neurons_(layer.neuron, layer.shape.K, layer.shape.X, layer.shape.Y) {
  if (delay_ < 0) throw Error(ErrorCode::DimensionMismatch, "accumulation delay must be >= 0");
  const auto& kernels = (layer.kind == LayerKind::AvgPool && layer.kernels.empty())
                            ? all_ones_kernels(layer.kind, layer.shape)
                            : layer.kernels;
  if (kernels.kind() != layer.kind) {
    throw Error(ErrorCode::KindMismatch, "kernel set kind does not match layer kind");
  }
  crossbar_ = PeCrossbar(shape_, map_kernels(shape_, kernels));
  accumulation_.assign(static_cast<std::size_t>(delay_), std::nullopt);
}

std::optional<Emission> LayerModule::step(const Flit& input) {
  ++cycles_;
  std::optional<Pending> produced;

  if (input) {
    if (input->size() != static_cast<std::size_t>(shape_.C)) {
      throw Error(ErrorCode::DimensionMismatch, "input vector width differs from C");
    }
    const auto per_step = static_cast<std::uint64_t>(shape_.H) * shape_.W;
    if (step_budget_ > 0 && fetches_ >= static_cast<std::uint64_t>(step_budget_) * per_step) {
      throw Error(ErrorCode::StreamOverrun, "more than H*W vectors per time step");
    }
    chain_.shift_in(*input);
    ++fetches_;

    const int r = stream_index_ / shape_.W;
    const int c = stream_index_ % shape_.W;
    if (r >= shape_.I - 1 && c >= shape_.J - 1) {
      Pending p{{time_step_, r - shape_.I + 1, c - shape_.J + 1},
                std::vector<std::int32_t>(static_cast<std::size_t>(shape_.K))};
      crossbar_.accumulate(chain_, p.sums);
      produced = std::move(p);
    }
    if (++stream_index_ == shape_.H * shape_.W) {
      stream_index_ = 0;
      ++time_step_;
    }
  }

  accumulation_.push_back(std::move(produced));
  auto ready = std::move(accumulation_.front());
  accumulation_.pop_front();
  if (!ready) return std::nullopt;

  Emission out{ready->position, std::vector<std::uint8_t>(static_cast<std::size_t>(shape_.K))};
  for (int k = 0; k < shape_.K; ++k) {
    out.spikes[static_cast<std::size_t>(k)] =
        neurons_.update(k, out.position.x, out.position.y, ready->sums[static_cast<std::size_t>(k)]);
  }
  ++valid_outputs_;
  return out;
}

LayerModule build_layer_module(const Layer& layer, std::int64_t step_budget) {
  if (layer.kernels.empty() && layer.kind != LayerKind::AvgPool) {
    throw Error(ErrorCode::InvalidGraph, "layer '" + layer.name + "' has no weights");
  }
  return LayerModule(layer, step_budget);
}

// ---------------------------------------------------------------------------
// DelayLine

Flit DelayLine::shift(Flit in) {
  if (cells_.empty()) return in;
  Flit out = std::move(cells_[head_]);
  cells_[head_] = std::move(in);
  head_ = (head_ + 1) % cells_.size();
  return out;
}

// ---------------------------------------------------------------------------
// Timing

PipelineTiming pipeline_timing(const NetworkGraph& graph) {
  PipelineTiming timing;
  const auto n = graph.layers.size();
  timing.output_depth.resize(n);
  timing.bypass_cells.resize(n);
  for (int l = 0; l < static_cast<int>(n); ++l) {
    const auto srcs = graph.sources(l);
    std::vector<int> arrival;
    for (const int src : srcs) {
      if (src < kNetworkInput || src >= l) {
        throw Error(ErrorCode::InvalidGraph, "input must come from an earlier layer");
      }
      arrival.push_back(src == kNetworkInput ? 0
                                             : timing.output_depth[static_cast<std::size_t>(src)] + kHandoffCycles);
    }
    const int latest = *std::max_element(arrival.begin(), arrival.end());
    auto& bypass = timing.bypass_cells[static_cast<std::size_t>(l)];
    for (const int a : arrival) bypass.push_back(latest - a);
    timing.output_depth[static_cast<std::size_t>(l)] = latest + graph.layers[static_cast<std::size_t>(l)].accumulation_delay;
    timing.fill_depth = std::max(timing.fill_depth, timing.output_depth[static_cast<std::size_t>(l)]);
  }
  return timing;
}

int compute_bypass_delay(const NetworkGraph& graph, const SkipEdge& edge) {
  if (edge.to < 0 || edge.to >= static_cast<int>(graph.layers.size())) {
    throw Error(ErrorCode::InvalidGraph, "edge destination out of range");
  }
  const auto srcs = graph.sources(edge.to);
  const auto it = std::find(srcs.begin(), srcs.end(), edge.from);
  if (it == srcs.end()) throw Error(ErrorCode::InvalidGraph, "no such stream edge");

  const auto& dst = graph.layers[static_cast<std::size_t>(edge.to)].shape;
  for (const int src : srcs) {
    const auto s = graph.stream_shape(src);
    if (s.H != dst.H || s.W != dst.W) {
      throw Error(ErrorCode::UnalignableStreams, "concatenated streams differ in spatial shape");
    }
  }
  const auto timing = pipeline_timing(graph);
  return timing.bypass_cells[static_cast<std::size_t>(edge.to)][static_cast<std::size_t>(it - srcs.begin())];
}

// ---------------------------------------------------------------------------
// Network simulation

namespace {

std::string bits_of(const std::vector<std::uint8_t>& v) {
  std::string s(v.size(), '0');
  for (std::size_t n = 0; n < v.size(); ++n) s[n] = v[n] ? '1' : '0';
  return s;
}

StreamPosition next_position(StreamPosition p, const LayerShape& s) {
  if (++p.y == s.Y) {
    p.y = 0;
    if (++p.x == s.X) {
      p.x = 0;
      ++p.step;
    }
  }
  return p;
}

}  // namespace

SimulationResult run_network(const NetworkGraph& graph, std::span<const SpikeTensor> inputs,
                             const SimulationOptions& options) {
  if (const auto violations = validate(graph); !violations.empty()) {
    throw Error(ErrorCode::InvalidGraph, violations.front().message);
  }
  if (graph.layers.empty()) throw Error(ErrorCode::InvalidGraph, "network has no layers");

  const auto steps = static_cast<std::int64_t>(inputs.size());
  const auto n_layers = graph.layers.size();
  const auto& in_shape = graph.input;
  const auto per_step = static_cast<std::int64_t>(in_shape.H) * in_shape.W;
  for (const auto& t : inputs) {
    if (!t.same_dims(in_shape.C, in_shape.H, in_shape.W)) {
      throw Error(ErrorCode::DimensionMismatch, "input spike tensor does not match network input");
    }
  }

  const auto timing = pipeline_timing(graph);
  std::vector<LayerModule> modules;
  std::vector<std::vector<int>> sources(n_layers);
  std::vector<std::vector<DelayLine>> lines(n_layers);
  modules.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    modules.push_back(build_layer_module(graph.layers[l], steps));
    sources[l] = graph.sources(static_cast<int>(l));
    for (std::size_t n = 0; n < sources[l].size(); ++n) {
      const int handoff = sources[l][n] == kNetworkInput ? 0 : kHandoffCycles;
      lines[l].emplace_back(handoff + timing.bypass_cells[l][n]);
    }
  }

  SimulationResult result;
  const auto& last = graph.layers.back().shape;
  result.counts.assign(static_cast<std::size_t>(last.K), 0);
  auto& stats = result.stats;
  stats.fill_depth = timing.fill_depth;
  stats.layers.resize(n_layers);
  std::vector<StreamPosition> expected(n_layers);
  std::vector<std::uint64_t> target(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& s = graph.layers[l].shape;
    stats.layers[l].accumulation_delay = graph.layers[l].accumulation_delay;
    stats.layers[l].output_depth = timing.output_depth[l];
    stats.layers[l].chain_cells = s.chain_length();
    target[l] = static_cast<std::uint64_t>(steps) * s.X * s.Y;
  }
  if (options.keep_trace) {
    result.trace.resize(static_cast<std::size_t>(steps));
    for (auto& per_step_trace : result.trace) {
      for (const auto& layer : graph.layers) {
        per_step_trace.emplace_back(layer.shape.K, layer.shape.X, layer.shape.Y);
      }
    }
    result.emission_order.resize(n_layers);
  }
  if (options.trace_csv) *options.trace_csv << "cycle,layer,event,position,value\n";

  auto done = [&] {
    for (std::size_t l = 0; l < n_layers; ++l) {
      if (modules[l].valid_outputs() < target[l]) return false;
    }
    return true;
  };

  // Generous ceiling; reaching it means the stream timing is broken.
  const std::int64_t cycle_limit = steps * per_step + timing.fill_depth + 16;
  std::vector<Flit> outputs(n_layers);
  std::int64_t cycle = 0;
  for (; !done(); ++cycle) {
    if (cycle > cycle_limit) throw Error(ErrorCode::UnalignableStreams, "pipeline failed to drain");

    Flit net_in;
    if (cycle < steps * per_step) {
      const auto& frame = inputs[static_cast<std::size_t>(cycle / per_step)];
      const int pos = static_cast<int>(cycle % per_step);
      std::vector<std::uint8_t> vec(static_cast<std::size_t>(in_shape.C));
      for (int c = 0; c < in_shape.C; ++c) vec[static_cast<std::size_t>(c)] = frame.at(c, pos / in_shape.W, pos % in_shape.W);
      ++stats.input_fetches;
      if (options.trace_csv) {
        *options.trace_csv << cycle << ",input,fetch," << cycle / per_step << ":" << pos / in_shape.W << ":"
                           << pos % in_shape.W << "," << bits_of(vec) << "\n";
      }
      net_in = std::move(vec);
    }

    for (std::size_t l = 0; l < n_layers; ++l) {
      // Gather every incoming stream through its delay line.
      std::size_t valid = 0;
      std::vector<Flit> parts;
      parts.reserve(sources[l].size());
      for (std::size_t n = 0; n < sources[l].size(); ++n) {
        const int src = sources[l][n];
        parts.push_back(lines[l][n].shift(src == kNetworkInput ? net_in : outputs[static_cast<std::size_t>(src)]));
        if (parts.back()) ++valid;
      }
      Flit layer_in;
      if (valid == parts.size()) {
        std::vector<std::uint8_t> vec;
        for (auto& p : parts) vec.insert(vec.end(), p->begin(), p->end());
        layer_in = std::move(vec);
      } else if (valid != 0) {
        std::ostringstream msg;
        msg << "streams into layer " << l << " misaligned at cycle " << cycle;
        throw Error(ErrorCode::UnalignableStreams, msg.str());
      }

      auto emission = modules[l].step(layer_in);
      if (!emission) {
        outputs[l].reset();
        continue;
      }

      auto& ls = stats.layers[l];
      if (ls.first_output_cycle < 0) ls.first_output_cycle = cycle;
      ls.last_output_cycle = cycle;
      if (!(emission->position == expected[l])) ++ls.order_violations;
      expected[l] = next_position(emission->position, graph.layers[l].shape);

      const auto& p = emission->position;
      if (options.keep_trace) {
        auto& tensor = result.trace[static_cast<std::size_t>(p.step)][l];
        for (std::size_t k = 0; k < emission->spikes.size(); ++k) {
          tensor.at(static_cast<int>(k), p.x, p.y) = emission->spikes[k];
        }
        result.emission_order[l].push_back(p);
      }
      if (options.trace_csv) {
        *options.trace_csv << cycle << "," << l << ",emit," << p.step << ":" << p.x << ":" << p.y << ","
                           << bits_of(emission->spikes) << "\n";
      }
      if (l == n_layers - 1) {
        for (std::size_t k = 0; k < emission->spikes.size(); ++k) result.counts[k] += emission->spikes[k];
      }
      outputs[l] = std::move(emission->spikes);
    }
  }

  stats.total_cycles = static_cast<std::uint64_t>(cycle);
  stats.cycles_per_step = steps > 0 ? static_cast<double>(cycle) / static_cast<double>(steps) : 0.0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    stats.layers[l].fetches = modules[l].fetches();
    stats.layers[l].valid_outputs = modules[l].valid_outputs();
  }
  return result;
}

}  // namespace bwsnn
