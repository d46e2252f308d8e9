#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "bwsnn/config.hpp"
#include "bwsnn/errors.hpp"
#include "bwsnn/fileio.hpp"
#include "bwsnn/run.hpp"
#include "random_network.hpp"
#include "table1.hpp"

using namespace bwsnn;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(BWSNN_SOURCE_DIR) / "configs";

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("bwsnn_unit_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ConfigError;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::uint8_t> idx_images(int n, int rows, int cols, std::uint8_t fill) {
  std::vector<std::uint8_t> b{0, 0, 8, 3};
  for (const int v : {n, rows, cols}) {
    b.push_back(static_cast<std::uint8_t>(v >> 24));
    b.push_back(static_cast<std::uint8_t>(v >> 16));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v));
  }
  b.insert(b.end(), static_cast<std::size_t>(n * rows * cols), fill);
  return b;
}

}  // namespace

TEST_CASE("weight file round trip") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto rc = testing::random_case(seed);
    std::vector<BinaryKernelSet> sets;
    for (const auto& l : rc.graph.layers) sets.push_back(l.kernels);
    CHECK(decode_weights(encode_weights(sets)) == sets);
  }
}

TEST_CASE("weight file corruption") {
  const auto g = testing::table1();
  const auto weights = random_weights(g, 3);
  auto bytes = encode_weights(weights);
  SUBCASE("flipped payload bit") {
    bytes[8 + 5 * 20 + 3] ^= 0x10;
    CHECK(code_of([&] { decode_weights(bytes); }) == ErrorCode::ChecksumMismatch);
  }
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK(code_of([&] { decode_weights(bytes); }) == ErrorCode::BadMagic);
  }
  SUBCASE("truncated") {
    bytes.resize(bytes.size() - 5);
    CHECK(code_of([&] { decode_weights(bytes); }) == ErrorCode::FileError);
  }
}

TEST_CASE("attach_weights checks dimensions against the network") {
  auto g = testing::table1();
  auto weights = random_weights(g, 1);
  weights[2] = BinaryKernelSet(LayerKind::Conv, 8, 16, 3, 3);
  try {
    attach_weights(g, weights);
    FAIL("expected DimMismatchWithConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimMismatchWithConfig);
    CHECK(std::string(e.what()).find("conv3") != std::string::npos);
  }
  weights.pop_back();
  CHECK(code_of([&] { attach_weights(g, weights); }) == ErrorCode::DimMismatchWithConfig);
  attach_weights(g, random_weights(g, 1));
  CHECK(g.layers[0].kernels.size() == 16u * 3 * 9);
}

TEST_CASE("random_weights is seeded") {
  const auto g = testing::table1();
  CHECK(random_weights(g, 5) == random_weights(g, 5));
  CHECK_FALSE(random_weights(g, 5) == random_weights(g, 6));
  for (const auto& w : ones_weights(g)) CHECK(w.all_positive());
}

TEST_CASE("input and IDX decoding") {
  std::vector<RealTensor> images{RealTensor(2, 3, 4, 0.25f), RealTensor(2, 3, 4, 1.0f)};
  images[0].at(1, 2, 3) = 0.75f;
  CHECK(decode_inputs(encode_inputs(images)) == images);

  const auto idx = decode_idx_images(idx_images(2, 3, 3, 255));
  REQUIRE(idx.size() == 2);
  CHECK(idx[0].same_dims(1, 3, 3));
  CHECK(idx[1].at(0, 2, 2) == 1.0f);

  const std::vector<std::uint8_t> labels{0, 0, 8, 1, 0, 0, 0, 3, 7, 1, 9};
  CHECK(decode_idx_labels(labels) == std::vector<std::uint8_t>{7, 1, 9});
  CHECK(code_of([&] { decode_idx_labels(idx_images(1, 1, 1, 0)); }) == ErrorCode::BadMagic);
}

TEST_CASE("network config loading") {
  const auto g = load_network_config(kConfigs / "table1.json");
  CHECK(g == infer_shapes(testing::table1_partial()));

  for (const auto* name : {"skip_connect.json", "branch.json"}) {
    const auto h = load_network_config(kConfigs / name);
    CHECK(validate(h).empty());
    CHECK(network_from_json(network_to_json(h)) == h);
  }

  auto j = read_json_file(kConfigs / "table1.json");
  j["layers"][0]["kernal"] = 3;
  CHECK(code_of([&] { network_from_json(j); }) == ErrorCode::ConfigError);
  j = read_json_file(kConfigs / "table1.json");
  j["layers"][1]["kind"] = "pool";
  CHECK(code_of([&] { network_from_json(j); }) == ErrorCode::ConfigError);

  TempDir dir;
  write_text(dir / "broken.json", "{ \"layers\": [");
  CHECK(code_of([&] { load_network_config(dir / "broken.json"); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { load_network_config(dir / "missing.json"); }) == ErrorCode::FileError);
}

TEST_CASE("family config") {
  const auto f = load_family_config(kConfigs / "table1_family.json");
  CHECK(f.family.depths == std::vector<int>{3, 4, 5, 6});
  CHECK(f.family.hidden_kernels == std::vector<int>{8, 16, 24, 32});
  CHECK(f.budget_um2 == 2500000);
}

TEST_CASE("atomic write leaves no temporary behind") {
  TempDir dir;
  write_file_atomic(dir / "out.txt", std::string_view("hello"));
  write_file_atomic(dir / "out.txt", std::string_view("world"));
  CHECK(read_file_bytes(dir / "out.txt") == std::vector<std::uint8_t>{'w', 'o', 'r', 'l', 'd'});
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
  CHECK(files == 1);
}

TEST_CASE("run_simulation") {
  TempDir dir;
  const auto g = load_network_config(kConfigs / "table1.json");
  write_weight_file(dir / "w.bwsn", random_weights(g, 11));

  RunConfig cfg;
  cfg.network = kConfigs / "table1.json";
  cfg.weights = dir / "w.bwsn";
  cfg.time_steps = 4;

  SUBCASE("zero input gives zero counts and the predicted latency") {
    cfg.zero_input = true;
    cfg.zero_input_count = 2;
    cfg.oracle_check = true;
    const auto out = run_simulation(cfg);
    REQUIRE(out.exit_code == kExitOk);
    CHECK(out.results["images"].size() == 2);
    CHECK(out.results["oracle"] == "match");
    CHECK(out.results["cycle_stats"]["total_cycles"] == 4 * 256 + 9);
    CHECK(out.results["predicted_latency"]["cycles"] == 4 * 256 + 9);
  }
  SUBCASE("IDX images with labels, outputs written and reproducible") {
    write_file_atomic(dir / "img.idx", std::span<const std::uint8_t>(idx_images(3, 16, 16, 200)));
    cfg.input = dir / "img.idx";
    // A single-channel IDX file does not fit the 3-channel network.
    CHECK(run_simulation(cfg).exit_code == kExitValidationFailure);

    std::vector<RealTensor> images;
    std::mt19937_64 rng(4);
    for (int n = 0; n < 3; ++n) {
      RealTensor t(3, 16, 16);
      for (auto& v : t.data()) v = std::uniform_real_distribution<float>(0.0f, 1.0f)(rng);
      images.push_back(t);
    }
    write_input_file(dir / "in.bwin", images);
    write_file_atomic(dir / "labels.idx", std::span<const std::uint8_t>(std::vector<std::uint8_t>{0, 0, 8, 1, 0, 0, 0, 3, 1, 2, 3}));
    cfg.input = dir / "in.bwin";
    cfg.labels = dir / "labels.idx";
    cfg.oracle_check = true;
    cfg.results_out = dir / "r1.json";
    cfg.csv_out = dir / "r1.csv";
    cfg.trace_out = dir / "t1.csv";
    const auto a = run_simulation(cfg);
    REQUIRE(a.exit_code == kExitOk);
    CHECK(a.results.contains("accuracy"));
    cfg.results_out = dir / "r2.json";
    cfg.csv_out = dir / "r2.csv";
    cfg.trace_out = dir / "t2.csv";
    REQUIRE(run_simulation(cfg).exit_code == kExitOk);
    CHECK(read_file_bytes(dir / "r1.json") == read_file_bytes(dir / "r2.json"));
    CHECK(read_file_bytes(dir / "r1.csv") == read_file_bytes(dir / "r2.csv"));
    CHECK(read_file_bytes(dir / "t1.csv") == read_file_bytes(dir / "t2.csv"));
    CHECK(!read_file_bytes(dir / "t1.csv").empty());
  }
  SUBCASE("error exit codes") {
    cfg.zero_input = true;
    auto bad = cfg;
    bad.network = dir / "nope.json";
    CHECK(run_simulation(bad).exit_code == kExitFileError);

    write_text(dir / "bad.json", R"({"schema":"bwsnn-network/1","input":{"C":1,"H":2,"W":2},"layers":[{"kind":"conv","I":3,"J":3,"K":1}]})");
    bad = cfg;
    bad.network = dir / "bad.json";
    CHECK(run_simulation(bad).exit_code == kExitValidationFailure);

    write_text(dir / "unknown.json", R"({"schema":"bwsnn-network/1","inputs":{"C":1,"H":2,"W":2},"layers":[]})");
    bad.network = dir / "unknown.json";
    CHECK(run_simulation(bad).exit_code == kExitConfigError);

    auto bytes = read_file_bytes(cfg.weights);
    bytes[bytes.size() / 2] ^= 1;
    write_file_atomic(dir / "corrupt.bwsn", std::span<const std::uint8_t>(bytes));
    bad = cfg;
    bad.weights = dir / "corrupt.bwsn";
    CHECK(run_simulation(bad).exit_code == kExitFileError);

    bad = cfg;
    bad.time_steps = -1;
    CHECK(run_simulation(bad).exit_code == kExitConfigError);
  }
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ErrorCode::ConfigError) == kExitConfigError);
  CHECK(exit_code_for(ErrorCode::ChecksumMismatch) == kExitFileError);
  CHECK(exit_code_for(ErrorCode::BadMagic) == kExitFileError);
  CHECK(exit_code_for(ErrorCode::ShapeUnderflow) == kExitValidationFailure);
  CHECK(exit_code_for(ErrorCode::DimMismatchWithConfig) == kExitValidationFailure);
}
