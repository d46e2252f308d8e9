#include "bwsnn/run.hpp"

#include <sstream>

#include "bwsnn/config.hpp"
#include "bwsnn/costmodel.hpp"
#include "bwsnn/fileio.hpp"
#include "bwsnn/oracle.hpp"

namespace bwsnn {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
      return kExitConfigError;
    case ErrorCode::FileError:
    case ErrorCode::BadMagic:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::ValueOutOfRange:
      return kExitFileError;
    default:
      return kExitValidationFailure;
  }
}

void apply_overrides(NetworkGraph& graph, std::optional<ResetMode> reset, std::optional<int> accumulation_delay) {
  for (auto& layer : graph.layers) {
    if (reset) layer.neuron.reset = *reset;
    if (accumulation_delay) layer.accumulation_delay = *accumulation_delay;
  }
}

nlohmann::json to_json(const CycleStats& stats) {
  nlohmann::json j;
  j["total_cycles"] = stats.total_cycles;
  j["cycles_per_step"] = stats.cycles_per_step;
  j["input_fetches"] = stats.input_fetches;
  j["fill_depth"] = stats.fill_depth;
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& l : stats.layers) {
    layers.push_back({{"fetches", l.fetches},
                      {"valid_outputs", l.valid_outputs},
                      {"first_output_cycle", l.first_output_cycle},
                      {"last_output_cycle", l.last_output_cycle},
                      {"accumulation_delay", l.accumulation_delay},
                      {"output_depth", l.output_depth},
                      {"chain_cells", l.chain_cells},
                      {"order_violations", l.order_violations}});
  }
  return j;
}

namespace {

std::string csv_row(std::size_t index, std::size_t cls, const std::vector<std::int64_t>& counts,
                    std::optional<int> label) {
  std::ostringstream out;
  out << index << "," << cls << "," << (label ? std::to_string(*label) : "");
  for (const auto c : counts) out << "," << c;
  out << "\n";
  return out.str();
}

RunOutcome run_checked(const RunConfig& cfg) {
  RunOutcome outcome;
  auto& messages = outcome.messages;

  if (cfg.time_steps < 0) throw Error(ErrorCode::ConfigError, "time steps must be >= 0");
  auto graph = load_network_config(cfg.network);
  apply_overrides(graph, cfg.reset, cfg.accumulation_delay);
  if (const auto violations = validate(graph); !violations.empty()) {
    for (const auto& v : violations) {
      messages.push_back("layer " + std::to_string(v.layer) + " [" + v.fields + "]: " + v.message);
    }
    outcome.exit_code = kExitValidationFailure;
    return outcome;
  }
  attach_weights(graph, read_weight_file(cfg.weights));

  std::vector<RealTensor> images;
  if (cfg.zero_input) {
    images.assign(static_cast<std::size_t>(std::max(cfg.zero_input_count, 0)),
                  RealTensor(graph.input.C, graph.input.H, graph.input.W, 0.0f));
  } else {
    if (cfg.input.empty()) throw Error(ErrorCode::ConfigError, "no input file given");
    images = read_images(cfg.input);
  }
  if (cfg.limit && images.size() > *cfg.limit) images.resize(*cfg.limit);
  for (std::size_t n = 0; n < images.size(); ++n) {
    if (!images[n].same_dims(graph.input.C, graph.input.H, graph.input.W)) {
      std::ostringstream msg;
      msg << "image " << n << " is " << images[n].channels() << "x" << images[n].rows() << "x" << images[n].cols()
          << " but the network input is " << graph.input.C << "x" << graph.input.H << "x" << graph.input.W;
      throw Error(ErrorCode::DimMismatchWithConfig, msg.str());
    }
  }
  std::vector<std::uint8_t> labels;
  if (!cfg.labels.empty()) {
    labels = read_labels(cfg.labels);
    if (labels.size() < images.size()) throw Error(ErrorCode::FileError, "fewer labels than images");
  }

  EncoderSpec spec = cfg.encoder;
  spec.time_steps = cfg.time_steps;

  nlohmann::json results;
  results["schema"] = "bwsnn-results/1";
  results["network"] = {{"layers", graph.layers.size()},
                        {"input", {graph.input.C, graph.input.H, graph.input.W}},
                        {"reset", std::string(to_string(graph.layers.front().neuron.reset))}};
  results["time_steps"] = cfg.time_steps;
  results["encoder"] = {
      {"mode", spec.mode == EncoderMode::DeterministicAccumulator ? "deterministic" : "bernoulli"},
      {"seed", spec.seed}};

  std::string csv = "index,class,label";
  for (int k = 0; k < graph.layers.back().shape.K; ++k) csv += ",count" + std::to_string(k);
  csv += "\n";

  bool all_match = true;
  std::size_t correct_sys = 0;
  std::size_t correct_ref = 0;
  auto& per_image = results["images"] = nlohmann::json::array();
  nlohmann::json stats_json = nullptr;
  std::string trace_csv;

  for (std::size_t n = 0; n < images.size(); ++n) {
    auto frames = encode(images[n], spec);
    std::ostringstream trace_stream;
    SimulationOptions options;
    options.keep_trace = cfg.oracle_check;
    if (n == 0 && !cfg.trace_out.empty()) options.trace_csv = &trace_stream;
    const auto sim = run_network(graph, frames, options);
    if (n == 0) {
      stats_json = to_json(sim.stats);
      trace_csv = trace_stream.str();
    }

    const auto cls = classify(sim.counts);
    nlohmann::json entry = {{"index", n}, {"class", cls}, {"counts", sim.counts}};
    std::optional<int> label;
    if (!labels.empty()) {
      label = labels[n];
      entry["label"] = *label;
      if (static_cast<int>(cls) == *label) ++correct_sys;
    }

    if (cfg.oracle_check) {
      const auto ref = snn_forward_ref(graph, frames, true);
      const bool match = ref.counts == sim.counts && ref.trace == sim.trace;
      entry["oracle_class"] = classify(ref.counts);
      entry["oracle_match"] = match;
      if (label && static_cast<int>(classify(ref.counts)) == *label) ++correct_ref;
      if (!match) {
        all_match = false;
        messages.push_back("oracle mismatch on image " + std::to_string(n));
      }
    }
    csv += csv_row(n, cls, sim.counts, label);
    per_image.push_back(std::move(entry));
  }

  results["cycle_stats"] = stats_json;
  const auto latency = latency_model(graph, cfg.time_steps, cfg.clock_hz);
  results["predicted_latency"] = {{"cycles", latency.cycles},
                                  {"fill_cycles", latency.fill_cycles},
                                  {"seconds", latency.seconds},
                                  {"clock_hz", cfg.clock_hz}};
  results["oracle"] = cfg.oracle_check ? (all_match ? "match" : "mismatch") : "skipped";
  if (!labels.empty() && !images.empty()) {
    const auto total = static_cast<double>(images.size());
    results["accuracy"] = {{"systolic", static_cast<double>(correct_sys) / total}};
    if (cfg.oracle_check) results["accuracy"]["oracle"] = static_cast<double>(correct_ref) / total;
  }

  if (!cfg.results_out.empty()) write_file_atomic(cfg.results_out, results.dump(2) + "\n");
  if (!cfg.csv_out.empty()) write_file_atomic(cfg.csv_out, csv);
  if (!cfg.trace_out.empty()) write_file_atomic(cfg.trace_out, trace_csv);

  outcome.results = std::move(results);
  outcome.exit_code = all_match ? kExitOk : kExitOracleMismatch;
  return outcome;
}

}  // namespace

RunOutcome run_simulation(const RunConfig& config) {
  try {
    return run_checked(config);
  } catch (const Error& e) {
    RunOutcome outcome;
    outcome.exit_code = exit_code_for(e.code());
    outcome.messages.emplace_back(e.what());
    return outcome;
  }
}

}  // namespace bwsnn
