#pragma once

// Run orchestration behind the `simulate` and `check` commands.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bwsnn/codec.hpp"
#include "bwsnn/errors.hpp"
#include "bwsnn/netmodel.hpp"
#include "bwsnn/systolic.hpp"

namespace bwsnn {

// Process exit codes; stable across releases.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfigError = 2,
  kExitFileError = 3,
  kExitValidationFailure = 4,
  kExitOracleMismatch = 5,
};

int exit_code_for(ErrorCode code);

struct RunConfig {
  std::filesystem::path network;
  std::filesystem::path weights;
  std::filesystem::path input;   // BWIN or IDX images; empty with zero_input
  std::filesystem::path labels;  // optional IDX labels
  bool zero_input = false;
  int zero_input_count = 1;
  std::optional<std::size_t> limit;  // evaluate at most this many images
  int time_steps = 0;
  EncoderSpec encoder;
  std::optional<ResetMode> reset;
  std::optional<int> accumulation_delay;
  double clock_hz = 100e6;
  std::filesystem::path results_out;
  std::filesystem::path csv_out;
  std::filesystem::path trace_out;  // per-cycle CSV of the first image
  bool oracle_check = false;
};

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::json results;
  std::vector<std::string> messages;
};

// Never throws for library errors; they are mapped to exit codes.
RunOutcome run_simulation(const RunConfig& config);

// Applies the reset-mode and accumulation-delay overrides to every layer.
void apply_overrides(NetworkGraph& graph, std::optional<ResetMode> reset, std::optional<int> accumulation_delay);

nlohmann::json to_json(const CycleStats& stats);

}  // namespace bwsnn
