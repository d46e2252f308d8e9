// bwsnn: command-line front end for the layer-module simulator and cost model.

#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bwsnn/codec.hpp"
#include "bwsnn/config.hpp"
#include "bwsnn/costmodel.hpp"
#include "bwsnn/errors.hpp"
#include "bwsnn/fileio.hpp"
#include "bwsnn/run.hpp"

namespace {

using namespace bwsnn;

void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(output, text);
  }
}

void add_run_options(CLI::App* cmd, RunConfig& cfg, std::string& encoder, std::string& reset, int& delay) {
  cmd->add_option("--network", cfg.network, "Network config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--weights", cfg.weights, "Weight file (BWSN)")->required()->check(CLI::ExistingFile);
  auto* input = cmd->add_option("--input", cfg.input, "Input images (BWIN or IDX)")->check(CLI::ExistingFile);
  auto* zero = cmd->add_flag("--zero-input", cfg.zero_input, "Use all-zero images instead of an input file");
  input->excludes(zero);
  cmd->add_option("--zero-count", cfg.zero_input_count, "Number of all-zero images")->check(CLI::NonNegativeNumber);
  cmd->add_option("--labels", cfg.labels, "IDX label file for accuracy")->check(CLI::ExistingFile);
  cmd->add_option("--limit", cfg.limit, "Evaluate at most N images");
  cmd->add_option("-T,--time-steps", cfg.time_steps, "Time steps per inference")->required()->check(CLI::NonNegativeNumber);
  cmd->add_option("--encoder", encoder, "deterministic | bernoulli")
      ->check(CLI::IsMember({"deterministic", "bernoulli"}));
  cmd->add_option("--seed", cfg.encoder.seed, "Bernoulli encoder seed");
  cmd->add_option("--reset", reset, "Override reset mode: subtractive | to_zero")
      ->check(CLI::IsMember({"subtractive", "to_zero"}));
  cmd->add_option("--accumulation-delay", delay, "Override column accumulation delay (cycles)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--clock-hz", cfg.clock_hz, "Clock for latency prediction")->check(CLI::PositiveNumber);
  cmd->add_option("--results", cfg.results_out, "Write results JSON here (default: stdout)");
  cmd->add_option("--csv", cfg.csv_out, "Write per-image CSV here");
  cmd->add_option("--trace", cfg.trace_out, "Write per-cycle trace CSV of the first image here");
}

int do_run(RunConfig cfg, const std::string& encoder, const std::string& reset, int delay) {
  cfg.encoder.mode = encoder == "bernoulli" ? EncoderMode::BernoulliRate : EncoderMode::DeterministicAccumulator;
  if (!reset.empty()) cfg.reset = parse_reset_mode(reset);
  if (delay >= 0) cfg.accumulation_delay = delay;
  if (!cfg.zero_input && cfg.input.empty()) {
    std::cerr << "error: one of --input or --zero-input is required\n";
    return kExitUsage;
  }
  const auto outcome = run_simulation(cfg);
  for (const auto& m : outcome.messages) std::cerr << m << "\n";
  if (!outcome.results.is_null()) {
    if (cfg.results_out.empty()) std::cout << outcome.results.dump(2) << "\n";
    if (cfg.oracle_check) std::cerr << "oracle: " << outcome.results.value("oracle", "skipped") << "\n";
  }
  return outcome.exit_code;
}

int do_area(const std::string& network, const std::string& format, const std::string& output, int delay,
            double node_nm, double target_nm) {
  auto graph = load_network_config(network);
  if (delay >= 0) apply_overrides(graph, std::nullopt, delay);
  if (const auto violations = validate(graph); !violations.empty()) {
    for (const auto& v : violations) {
      std::cerr << "layer " << v.layer << " [" << v.fields << "]: " << v.message << "\n";
    }
    return kExitValidationFailure;
  }
  auto report = network_area(graph);
  if (node_nm > 0.0) report = normalize_to_node(report, node_nm, target_nm);
  emit(format == "csv" ? to_csv(report) : to_json(report).dump(2) + "\n", output);
  return kExitOk;
}

int do_sweep(const std::string& family_path, std::optional<std::int64_t> budget, const std::string& format,
             const std::string& output, unsigned threads) {
  auto family = load_family_config(family_path);
  if (budget) family.budget_um2 = budget;
  const auto entries = sweep(family.family, family.budget_um2, threads);
  if (format == "csv") {
    emit(sweep_to_csv(entries), output);
  } else {
    nlohmann::json j;
    j["schema"] = "bwsnn-sweep/1";
    j["budget_um2"] = family.budget_um2 ? nlohmann::json(*family.budget_um2) : nlohmann::json(nullptr);
    auto& list = j["entries"] = nlohmann::json::array();
    for (const auto& e : entries) {
      list.push_back({{"topology", e.label}, {"network", network_to_json(e.graph)}, {"area", to_json(e.report)}});
    }
    emit(j.dump(2) + "\n", output);
  }
  return kExitOk;
}

int do_encode(const std::string& input, int steps, const std::string& encoder, std::uint64_t seed,
              std::optional<std::size_t> limit, const std::string& output) {
  auto images = read_images(input);
  if (limit && images.size() > *limit) images.resize(*limit);
  EncoderSpec spec;
  spec.mode = encoder == "bernoulli" ? EncoderMode::BernoulliRate : EncoderMode::DeterministicAccumulator;
  spec.time_steps = steps;
  spec.seed = seed;

  nlohmann::json j;
  j["schema"] = "bwsnn-spikes/1";
  j["time_steps"] = steps;
  j["encoder"] = encoder;
  if (!images.empty()) j["shape"] = {images.front().channels(), images.front().rows(), images.front().cols()};
  auto& list = j["images"] = nlohmann::json::array();
  for (std::size_t n = 0; n < images.size(); ++n) {
    const auto frames = encode(images[n], spec);
    auto frames_json = nlohmann::json::array();
    for (const auto& f : frames) {
      std::string bits(f.size(), '0');
      for (std::size_t p = 0; p < f.size(); ++p) bits[p] = f.data()[p] ? '1' : '0';
      frames_json.push_back(std::move(bits));
    }
    list.push_back({{"index", n}, {"steps", std::move(frames_json)}});
  }
  emit(j.dump(2) + "\n", output);
  return kExitOk;
}

int do_mkweights(const std::string& network, const std::string& output, const std::string& mode, std::uint64_t seed) {
  const auto graph = load_network_config(network);
  const auto weights = mode == "ones" ? ones_weights(graph) : random_weights(graph, seed);
  write_weight_file(output, weights);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary-weight SNN layer-module simulator and cost model"};
  app.require_subcommand(1);

  RunConfig sim_cfg;
  std::string sim_encoder = "deterministic", sim_reset;
  int sim_delay = -1;
  auto* simulate = app.add_subcommand("simulate", "Run the cycle-accurate simulator");
  add_run_options(simulate, sim_cfg, sim_encoder, sim_reset, sim_delay);
  simulate->add_flag("--check", sim_cfg.oracle_check, "Also run the reference model and compare");

  RunConfig chk_cfg;
  std::string chk_encoder = "deterministic", chk_reset;
  int chk_delay = -1;
  auto* check = app.add_subcommand("check", "Simulate and verify against the reference model");
  add_run_options(check, chk_cfg, chk_encoder, chk_reset, chk_delay);

  std::string area_network, area_format = "json", area_output;
  int area_delay = -1;
  double node_nm = 0.0, target_nm = 28.0;
  auto* area = app.add_subcommand("area", "Estimate layer-module area");
  area->add_option("--network", area_network, "Network config (JSON)")->required()->check(CLI::ExistingFile);
  area->add_option("--format", area_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  area->add_option("--output", area_output, "Write the report here (default: stdout)");
  area->add_option("--accumulation-delay", area_delay, "Override accumulation delay (sizes bypass lines)")
      ->check(CLI::NonNegativeNumber);
  area->add_option("--node-nm", node_nm, "Technology node of the coefficients, enables normalization")
      ->check(CLI::PositiveNumber);
  area->add_option("--target-nm", target_nm, "Normalization target node")->check(CLI::PositiveNumber);

  std::string family_path, sweep_format = "json", sweep_output;
  std::optional<std::int64_t> sweep_budget;
  unsigned sweep_threads = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Enumerate a topology family and rank by area");
  sweep_cmd->add_option("--family", family_path, "Family description (JSON)")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--budget-um2", sweep_budget, "Drop candidates above this area");
  sweep_cmd->add_option("--format", sweep_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  sweep_cmd->add_option("--output", sweep_output, "Write the ranking here (default: stdout)");
  sweep_cmd->add_option("--threads", sweep_threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string enc_input, enc_encoder = "deterministic", enc_output;
  int enc_steps = 0;
  std::uint64_t enc_seed = 0;
  std::optional<std::size_t> enc_limit;
  auto* encode_cmd = app.add_subcommand("encode", "Dump encoded spike streams");
  encode_cmd->add_option("--input", enc_input, "Input images (BWIN or IDX)")->required()->check(CLI::ExistingFile);
  encode_cmd->add_option("-T,--time-steps", enc_steps, "Time steps")->required()->check(CLI::NonNegativeNumber);
  encode_cmd->add_option("--encoder", enc_encoder, "deterministic | bernoulli")
      ->check(CLI::IsMember({"deterministic", "bernoulli"}));
  encode_cmd->add_option("--seed", enc_seed, "Bernoulli encoder seed");
  encode_cmd->add_option("--limit", enc_limit, "Encode at most N images");
  encode_cmd->add_option("--output", enc_output, "Write JSON here (default: stdout)");

  std::string mk_network, mk_output, mk_mode = "random";
  std::uint64_t mk_seed = 1;
  auto* mkweights = app.add_subcommand("mkweights", "Generate a random or all-ones weight file");
  mkweights->add_option("--network", mk_network, "Network config (JSON)")->required()->check(CLI::ExistingFile);
  mkweights->add_option("--output", mk_output, "Weight file to write")->required();
  mkweights->add_option("--mode", mk_mode, "random | ones")->check(CLI::IsMember({"random", "ones"}));
  mkweights->add_option("--seed", mk_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return do_run(sim_cfg, sim_encoder, sim_reset, sim_delay);
    if (*check) {
      chk_cfg.oracle_check = true;
      return do_run(chk_cfg, chk_encoder, chk_reset, chk_delay);
    }
    if (*area) return do_area(area_network, area_format, area_output, area_delay, node_nm, target_nm);
    if (*sweep_cmd) return do_sweep(family_path, sweep_budget, sweep_format, sweep_output, sweep_threads);
    if (*encode_cmd) return do_encode(enc_input, enc_steps, enc_encoder, enc_seed, enc_limit, enc_output);
    if (*mkweights) return do_mkweights(mk_network, mk_output, mk_mode, mk_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kExitUsage;
}
