#include "bwsnn/costmodel.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include "bwsnn/errors.hpp"
#include "bwsnn/systolic.hpp"

namespace bwsnn {

LayerArea layer_area(const LayerShape& s) {
  LayerArea a;
  a.pe = kPeAreaPerWeight * s.C * s.K * s.I * s.J;
  a.chain = kChainAreaPerWord * s.C * s.chain_length();
  a.local = kLocalAreaPerNeuron * static_cast<std::int64_t>(s.K) * s.X * s.Y;
  return a;
}

CostReport network_area(const NetworkGraph& graph) {
  CostReport report;
  for (const auto& layer : graph.layers) {
    const auto a = layer_area(layer.shape);
    report.layers.push_back({layer.name, a});
    report.totals.pe += a.pe;
    report.totals.chain += a.chain;
    report.totals.local += a.local;
  }
  if (!graph.layers.empty()) {
    const auto timing = pipeline_timing(graph);
    for (int l = 0; l < static_cast<int>(graph.layers.size()); ++l) {
      const auto srcs = graph.sources(l);
      for (std::size_t n = 0; n < srcs.size(); ++n) {
        const int cells = timing.bypass_cells[static_cast<std::size_t>(l)][n];
        if (cells == 0) continue;
        const int channels = graph.stream_shape(srcs[n]).C;
        const auto area = kChainAreaPerWord * channels * cells;
        report.bypass.push_back({{srcs[n], l}, cells, channels, area});
        report.bypass_total += area;
      }
    }
  }
  report.total_um2 = report.totals.total() + report.bypass_total;
  return report;
}

CostReport normalize_to_node(CostReport report, double source_nm, double target_nm) {
  if (source_nm <= 0.0 || target_nm <= 0.0) {
    throw Error(ErrorCode::ValueOutOfRange, "technology node must be positive");
  }
  const double scale = (target_nm / source_nm) * (target_nm / source_nm);
  report.node_scale = scale;
  report.normalized_total_um2 = static_cast<double>(report.total_um2) * scale;
  return report;
}

LatencyPrediction latency_model(const NetworkGraph& graph, std::int64_t time_steps, double clock_hz) {
  if (graph.layers.empty()) throw Error(ErrorCode::InvalidGraph, "network has no layers");
  if (time_steps < 0) throw Error(ErrorCode::ValueOutOfRange, "time steps must be >= 0");
  if (clock_hz <= 0.0) throw Error(ErrorCode::ValueOutOfRange, "clock frequency must be positive");
  LatencyPrediction p;
  p.stream_cycles = static_cast<std::uint64_t>(time_steps) * graph.input.H * graph.input.W;
  p.fill_cycles = pipeline_timing(graph).fill_depth;
  p.cycles = p.stream_cycles + static_cast<std::uint64_t>(p.fill_cycles);
  p.seconds = static_cast<double>(p.cycles) / clock_hz;
  return p;
}

namespace {

struct Candidate {
  std::string label;
  NetworkGraph graph;
};

std::vector<Candidate> enumerate(const TopologyFamily& f) {
  std::vector<Candidate> out;
  for (const int depth : f.depths)
    for (const int ks : f.kernel_sizes)
      for (const int hidden : f.hidden_kernels)
        for (const int final_k : f.final_kernels) {
          if (depth < 1) continue;
          // A single-layer stack has no hidden layers, so every hidden K gives the same network.
          if (depth == 1 && hidden != f.hidden_kernels.front()) continue;
          Candidate c;
          std::ostringstream label;
          label << "depth=" << depth << " kernel=" << ks << " hidden_K=" << hidden << " final_K=" << final_k;
          c.label = label.str();
          c.graph.input = f.input;
          for (int l = 0; l < depth; ++l) {
            Layer layer;
            layer.name = "conv" + std::to_string(l + 1);
            layer.kind = LayerKind::Conv;
            layer.shape.I = ks;
            layer.shape.J = ks;
            layer.shape.K = l + 1 == depth ? final_k : hidden;
            layer.neuron.threshold = {f.threshold};
            c.graph.layers.push_back(std::move(layer));
          }
          out.push_back(std::move(c));
        }
  return out;
}

std::optional<SweepEntry> evaluate(const Candidate& c, std::optional<std::int64_t> budget) {
  NetworkGraph graph;
  try {
    graph = infer_shapes(c.graph);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!validate(graph).empty()) return std::nullopt;
  auto report = network_area(graph);
  if (budget && report.total_um2 > *budget) return std::nullopt;
  return SweepEntry{c.label, std::move(graph), std::move(report)};
}

}  // namespace

std::vector<SweepEntry> sweep(const TopologyFamily& family, std::optional<std::int64_t> budget_um2,
                              unsigned threads) {
  const auto candidates = enumerate(family);
  if (candidates.empty()) throw Error(ErrorCode::EmptyFamily, "topology family enumerates no candidates");

  std::vector<std::optional<SweepEntry>> results(candidates.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(candidates.size())));
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t n = w; n < candidates.size(); n += workers) results[n] = evaluate(candidates[n], budget_um2);
    }));
  }
  for (auto& j : jobs) j.get();

  std::vector<SweepEntry> out;
  for (auto& r : results) {
    if (r) out.push_back(std::move(*r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SweepEntry& a, const SweepEntry& b) { return a.report.total_um2 < b.report.total_um2; });
  return out;
}

nlohmann::json to_json(const CostReport& report) {
  nlohmann::json j;
  j["schema"] = "bwsnn-area/1";
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& l : report.layers) {
    layers.push_back({{"name", l.name},
                      {"pe_area_um2", l.area.pe},
                      {"buffer_chain_area_um2", l.area.chain},
                      {"local_buffer_area_um2", l.area.local},
                      {"total_um2", l.area.total()}});
  }
  auto& bypass = j["bypass"] = nlohmann::json::array();
  for (const auto& b : report.bypass) {
    bypass.push_back({{"from", b.edge.from}, {"to", b.edge.to}, {"cells", b.cells}, {"channels", b.channels},
                      {"area_um2", b.area}});
  }
  j["totals"] = {{"pe_area_um2", report.totals.pe},
                 {"buffer_chain_area_um2", report.totals.chain},
                 {"local_buffer_area_um2", report.totals.local},
                 {"bypass_area_um2", report.bypass_total},
                 {"total_um2", report.total_um2},
                 {"total_mm2", report.total_mm2()}};
  j["node_scale"] = report.node_scale ? nlohmann::json(*report.node_scale) : nlohmann::json(nullptr);
  j["normalized_total_um2"] =
      report.normalized_total_um2 ? nlohmann::json(*report.normalized_total_um2) : nlohmann::json(nullptr);
  j["energy"] = {
      {"pj_per_pe_op", report.energy.pj_per_pe_op ? nlohmann::json(*report.energy.pj_per_pe_op) : nlohmann::json(nullptr)},
      {"pj_per_neuron_update",
       report.energy.pj_per_neuron_update ? nlohmann::json(*report.energy.pj_per_neuron_update) : nlohmann::json(nullptr)}};
  return j;
}

std::string to_csv(const CostReport& report) {
  std::ostringstream out;
  out << "item,pe_area_um2,buffer_chain_area_um2,local_buffer_area_um2,bypass_area_um2,total_um2\n";
  for (std::size_t n = 0; n < report.layers.size(); ++n) {
    const auto& l = report.layers[n];
    out << (l.name.empty() ? "layer" + std::to_string(n) : l.name) << "," << l.area.pe << "," << l.area.chain << ","
        << l.area.local << ",0," << l.area.total() << "\n";
  }
  for (const auto& b : report.bypass) {
    out << "bypass:" << b.edge.from << "->" << b.edge.to << ",0,0,0," << b.area << "," << b.area << "\n";
  }
  out << "total," << report.totals.pe << "," << report.totals.chain << "," << report.totals.local << ","
      << report.bypass_total << "," << report.total_um2 << "\n";
  return out.str();
}

std::string sweep_to_csv(const std::vector<SweepEntry>& entries) {
  std::ostringstream out;
  out << "rank,topology,pe_area_um2,buffer_chain_area_um2,local_buffer_area_um2,total_um2\n";
  for (std::size_t n = 0; n < entries.size(); ++n) {
    const auto& r = entries[n].report;
    out << n << ",\"" << entries[n].label << "\"," << r.totals.pe << "," << r.totals.chain << "," << r.totals.local
        << "," << r.total_um2 << "\n";
  }
  return out.str();
}

}  // namespace bwsnn
