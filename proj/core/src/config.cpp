#include "bwsnn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "bwsnn/errors.hpp"

namespace bwsnn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

int get_int(const json& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(where, std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

std::vector<std::int64_t> get_int_list(const json& obj, const char* key, const std::string& where,
                                       std::vector<std::int64_t> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_number_integer()) return {v.get<std::int64_t>()};
  if (!v.is_array() || v.empty()) fail(where, std::string("'") + key + "' must be an integer or non-empty list");
  std::vector<std::int64_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) fail(where, std::string("'") + key + "' entries must be integers");
    out.push_back(e.get<std::int64_t>());
  }
  return out;
}

// int | [int, ...] | "a..b" | "a..b:step"
std::vector<int> get_range(const json& obj, const char* key, const std::string& where, std::vector<int> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  const std::string name = std::string("'") + key + "'";
  if (v.is_number_integer()) return {v.get<int>()};
  if (v.is_array()) {
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(where, name + " entries must be integers");
      out.push_back(e.get<int>());
    }
    return out;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    const auto dots = s.find("..");
    if (dots == std::string::npos) fail(where, name + " range must look like a..b or a..b:step");
    int lo = 0, hi = 0, step = 1;
    try {
      lo = std::stoi(s.substr(0, dots));
      const auto colon = s.find(':', dots);
      hi = std::stoi(s.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
      if (colon != std::string::npos) step = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
      fail(where, name + " range must look like a..b or a..b:step");
    }
    if (step < 1 || hi < lo) fail(where, name + " range is empty or has a non-positive step");
    std::vector<int> out;
    for (int x = lo; x <= hi; x += step) out.push_back(x);
    return out;
  }
  fail(where, name + " must be an integer, list or range string");
}

}  // namespace

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

NetworkGraph network_from_json(const json& config) {
  reject_unknown(config, {"schema", "name", "input", "reset", "accumulation_delay", "layers", "skips", "branches"},
                 "network");
  if (config.contains("schema") && config.at("schema") != "bwsnn-network/1") {
    fail("network", "unsupported schema " + config.at("schema").dump());
  }

  NetworkGraph graph;
  if (!config.contains("input")) fail("network", "missing 'input'");
  const auto& input = config.at("input");
  reject_unknown(input, {"C", "H", "W"}, "input");
  graph.input = {get_int(input, "C", "input", 0), get_int(input, "H", "input", 0), get_int(input, "W", "input", 0)};

  ResetMode reset = ResetMode::Subtractive;
  if (config.contains("reset")) {
    const auto& r = config.at("reset");
    const auto parsed = r.is_string() ? parse_reset_mode(r.get<std::string>()) : std::nullopt;
    if (!parsed) fail("network", "'reset' must be \"subtractive\" or \"to_zero\"");
    reset = *parsed;
  }
  const int default_delay = get_int(config, "accumulation_delay", "network", 1);

  if (!config.contains("layers") || !config.at("layers").is_array()) fail("network", "'layers' must be a list");
  int index = 0;
  for (const auto& lj : config.at("layers")) {
    const std::string where = "layers[" + std::to_string(index++) + "]";
    reject_unknown(lj, {"name", "kind", "C", "H", "W", "I", "J", "K", "stride", "padding", "threshold", "bias",
                        "initial_potential", "accumulation_delay", "inputs"},
                   where);
    Layer layer;
    if (lj.contains("name")) {
      if (!lj.at("name").is_string()) fail(where, "'name' must be a string");
      layer.name = lj.at("name").get<std::string>();
    }
    if (!lj.contains("kind") || !lj.at("kind").is_string()) fail(where, "missing 'kind'");
    const auto kind = parse_layer_kind(lj.at("kind").get<std::string>());
    if (!kind) fail(where, "'kind' must be one of conv, depthwise, fc, avgpool");
    layer.kind = *kind;
    auto& s = layer.shape;
    s.C = get_int(lj, "C", where, 0);
    s.H = get_int(lj, "H", where, 0);
    s.W = get_int(lj, "W", where, 0);
    s.I = get_int(lj, "I", where, 0);
    s.J = get_int(lj, "J", where, 0);
    s.K = get_int(lj, "K", where, 0);
    layer.stride = get_int(lj, "stride", where, 1);
    layer.padding = get_int(lj, "padding", where, 0);
    layer.accumulation_delay = get_int(lj, "accumulation_delay", where, default_delay);

    const std::int64_t default_threshold = layer.kind == LayerKind::AvgPool ? std::int64_t{s.I} * s.J : 1;
    layer.neuron.threshold = get_int_list(lj, "threshold", where, {default_threshold});
    layer.neuron.bias = get_int_list(lj, "bias", where, {0});
    layer.neuron.initial_potential = get_int_list(lj, "initial_potential", where, {0});
    layer.neuron.reset = reset;
    if (lj.contains("inputs")) {
      for (const auto v : get_int_list(lj, "inputs", where, {})) layer.inputs.push_back(static_cast<int>(v));
    }
    graph.layers.push_back(std::move(layer));
  }
  if (graph.layers.empty()) fail("network", "'layers' is empty");

  if (config.contains("skips")) {
    if (!config.at("skips").is_array()) fail("network", "'skips' must be a list");
    int n = 0;
    for (const auto& sj : config.at("skips")) {
      const std::string where = "skips[" + std::to_string(n++) + "]";
      reject_unknown(sj, {"from", "to", "position"}, where);
      if (!sj.contains("from") || !sj.contains("to")) fail(where, "needs 'from' and 'to'");
      std::optional<int> position;
      if (sj.contains("position")) position = get_int(sj, "position", where, 0);
      try {
        graph.add_skip(get_int(sj, "from", where, 0), get_int(sj, "to", where, 0), position);
      } catch (const Error& e) {
        fail(where, e.what());
      }
    }
  }
  if (config.contains("branches")) {
    if (!config.at("branches").is_array()) fail("network", "'branches' must be a list");
    int n = 0;
    for (const auto& bj : config.at("branches")) {
      const std::string where = "branches[" + std::to_string(n++) + "]";
      reject_unknown(bj, {"fanout", "chains", "join"}, where);
      if (!bj.contains("fanout") || !bj.contains("chains") || !bj.contains("join")) {
        fail(where, "needs 'fanout', 'chains' and 'join'");
      }
      std::vector<std::vector<int>> chains;
      if (!bj.at("chains").is_array()) fail(where, "'chains' must be a list of lists");
      for (const auto& cj : bj.at("chains")) {
        if (!cj.is_array()) fail(where, "'chains' must be a list of lists");
        std::vector<int> chain;
        for (const auto& e : cj) {
          if (!e.is_number_integer()) fail(where, "chain entries must be layer indices");
          chain.push_back(e.get<int>());
        }
        chains.push_back(std::move(chain));
      }
      try {
        graph.add_branch(get_int(bj, "fanout", where, 0), chains, get_int(bj, "join", where, 0));
      } catch (const Error& e) {
        fail(where, e.what());
      }
    }
  }

  graph = infer_shapes(std::move(graph));
  for (auto& layer : graph.layers) {
    if (layer.kind == LayerKind::AvgPool) layer.kernels = all_ones_kernels(layer.kind, layer.shape);
  }
  return graph;
}

NetworkGraph load_network_config(const std::filesystem::path& path) {
  return network_from_json(read_json_file(path));
}

json network_to_json(const NetworkGraph& graph) {
  json j;
  j["schema"] = "bwsnn-network/1";
  j["input"] = {{"C", graph.input.C}, {"H", graph.input.H}, {"W", graph.input.W}};
  if (!graph.layers.empty()) j["reset"] = std::string(to_string(graph.layers.front().neuron.reset));
  auto& layers = j["layers"] = json::array();
  for (const auto& layer : graph.layers) {
    const auto& s = layer.shape;
    json lj = {{"kind", std::string(to_string(layer.kind))},
               {"C", s.C}, {"H", s.H}, {"W", s.W}, {"I", s.I}, {"J", s.J}, {"K", s.K},
               {"threshold", layer.neuron.threshold},
               {"bias", layer.neuron.bias},
               {"initial_potential", layer.neuron.initial_potential},
               {"accumulation_delay", layer.accumulation_delay}};
    if (!layer.name.empty()) lj["name"] = layer.name;
    if (!layer.inputs.empty()) lj["inputs"] = layer.inputs;
    layers.push_back(std::move(lj));
  }
  return j;
}

FamilyConfig family_from_json(const json& config) {
  reject_unknown(config, {"schema", "input", "depth", "kernel", "hidden_K", "final_K", "threshold", "budget_um2"},
                 "family");
  if (config.contains("schema") && config.at("schema") != "bwsnn-family/1") {
    fail("family", "unsupported schema " + config.at("schema").dump());
  }
  FamilyConfig out;
  auto& f = out.family;
  if (config.contains("input")) {
    const auto& input = config.at("input");
    reject_unknown(input, {"C", "H", "W"}, "input");
    f.input = {get_int(input, "C", "input", 0), get_int(input, "H", "input", 0), get_int(input, "W", "input", 0)};
  }
  f.depths = get_range(config, "depth", "family", f.depths);
  f.kernel_sizes = get_range(config, "kernel", "family", f.kernel_sizes);
  f.hidden_kernels = get_range(config, "hidden_K", "family", f.hidden_kernels);
  f.final_kernels = get_range(config, "final_K", "family", f.final_kernels);
  f.threshold = get_int(config, "threshold", "family", 1);
  if (config.contains("budget_um2")) {
    const auto& b = config.at("budget_um2");
    if (!b.is_number_integer()) fail("family", "'budget_um2' must be an integer");
    out.budget_um2 = b.get<std::int64_t>();
  }
  return out;
}

FamilyConfig load_family_config(const std::filesystem::path& path) {
  return family_from_json(read_json_file(path));
}

}  // namespace bwsnn
