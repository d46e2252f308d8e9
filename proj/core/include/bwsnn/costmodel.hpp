#pragma once

// Closed-form area and latency estimates for a layer-module network.
//
// Per layer (areas in um^2):
//   PE array      210 * C * K * I * J
//   buffer chain   15 * C * ((I-1) * W + J)
//   local buffer   40 * K * X * Y
// Bypass delay cells are charged at the buffer-chain rate of 15 * C per cell.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bwsnn/netmodel.hpp"

namespace bwsnn {

inline constexpr std::int64_t kPeAreaPerWeight = 210;
inline constexpr std::int64_t kChainAreaPerWord = 15;
inline constexpr std::int64_t kLocalAreaPerNeuron = 40;

struct LayerArea {
  std::int64_t pe = 0;
  std::int64_t chain = 0;
  std::int64_t local = 0;

  std::int64_t total() const { return pe + chain + local; }
  bool operator==(const LayerArea&) const = default;
};

LayerArea layer_area(const LayerShape& shape);

struct LayerCost {
  std::string name;
  LayerArea area;
};

struct BypassCost {
  SkipEdge edge;
  int cells = 0;
  int channels = 0;
  std::int64_t area = 0;
};

// User-supplied energy constants; none ship by default.
struct EnergyConstants {
  std::optional<double> pj_per_pe_op;
  std::optional<double> pj_per_neuron_update;
};

struct CostReport {
  std::vector<LayerCost> layers;
  std::vector<BypassCost> bypass;
  LayerArea totals;
  std::int64_t bypass_total = 0;
  std::int64_t total_um2 = 0;
  // Set by normalize_to_node: area scaled by (target/source)^2.
  std::optional<double> node_scale;
  std::optional<double> normalized_total_um2;
  EnergyConstants energy;

  double total_mm2() const { return static_cast<double>(total_um2) * 1e-6; }
};

CostReport network_area(const NetworkGraph& graph);

// Area scales with the square of the feature size; the cubic rule applies to
// energy only and is not used here.
CostReport normalize_to_node(CostReport report, double source_nm, double target_nm = 28.0);

struct LatencyPrediction {
  std::uint64_t cycles = 0;
  std::uint64_t stream_cycles = 0;  // T * H * W of the network input
  int fill_cycles = 0;
  double seconds = 0.0;
};

// cycles = T * H * W + fill, fill being the deepest layer output depth
// (accumulation delays plus hand-off registers along the longest path).
LatencyPrediction latency_model(const NetworkGraph& graph, std::int64_t time_steps, double clock_hz);

// Enumerable family of plain convolution stacks. Each list is a set of
// candidate values; the cartesian product is evaluated.
struct TopologyFamily {
  StreamShape input{3, 16, 16};
  std::vector<int> depths{5};
  std::vector<int> kernel_sizes{3};
  std::vector<int> hidden_kernels{16};
  std::vector<int> final_kernels{6};
  std::int64_t threshold = 1;
};

struct SweepEntry {
  std::string label;
  NetworkGraph graph;
  CostReport report;
};

// Candidates that fail shape inference or validation are skipped; the result
// is sorted by total area (ties keep enumeration order). Throws EmptyFamily
// when the family enumerates no candidates at all.
std::vector<SweepEntry> sweep(const TopologyFamily& family, std::optional<std::int64_t> budget_um2,
                              unsigned threads = 1);

nlohmann::json to_json(const CostReport& report);
std::string to_csv(const CostReport& report);
std::string sweep_to_csv(const std::vector<SweepEntry>& entries);

}  // namespace bwsnn
