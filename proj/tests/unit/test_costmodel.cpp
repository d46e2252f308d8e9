#include <doctest.h>

#include "bwsnn/costmodel.hpp"
#include "bwsnn/errors.hpp"
#include "bwsnn/systolic.hpp"
#include "random_network.hpp"
#include "table1.hpp"

using namespace bwsnn;

TEST_CASE("layer_area examples") {
  const auto g = testing::table1();
  const auto a = layer_area(g.layers[0].shape);
  CHECK(a.pe == 90720);
  CHECK(a.chain == 1575);
  CHECK(a.local == 125440);

  const auto unit = layer_area({1, 1, 1, 1, 1, 1, 1, 1});
  CHECK(unit.pe == 210);
  CHECK(unit.chain == 15);
  CHECK(unit.local == 40);

  CHECK(layer_area(g.layers[4].shape).pe == 181440);
}

TEST_CASE("five-layer stack total area") {
  const auto r = network_area(testing::table1());
  CHECK(r.total_um2 == 2080455);
  CHECK(r.bypass.empty());
  CHECK(r.total_mm2() == doctest::Approx(2.080455));
  CHECK(r.layers.size() == 5);
}

TEST_CASE("empty network costs nothing") {
  const auto r = network_area(NetworkGraph{});
  CHECK(r.total_um2 == 0);
  CHECK(r.layers.empty());
}

TEST_CASE("area is monotone and linear in K") {
  auto s = testing::table1().layers[2].shape;
  const auto a1 = layer_area(s);
  s.K *= 2;
  const auto a2 = layer_area(s);
  CHECK(a2.pe == 2 * a1.pe);
  CHECK(a2.local == 2 * a1.local);
  CHECK(a2.chain == a1.chain);
  CHECK(a2.total() > a1.total());
}

TEST_CASE("bypass lines are charged per cell") {
  NetworkGraph g;
  g.input = {2, 4, 4};
  for (int l = 0; l < 3; ++l) {
    Layer layer;
    layer.kind = LayerKind::FullyConnected;
    layer.shape.K = 2;
    g.layers.push_back(layer);
  }
  g.add_skip(0, 2);
  g = infer_shapes(g);
  const auto r = network_area(g);
  REQUIRE(r.bypass.size() == 1);
  CHECK(r.bypass[0].cells == 2);
  CHECK(r.bypass[0].area == 15 * 2 * 2);
  CHECK(r.total_um2 == r.totals.total() + 60);
}

TEST_CASE("node normalization scales quadratically") {
  const auto r = normalize_to_node(network_area(testing::table1()), 56, 28);
  CHECK(*r.node_scale == doctest::Approx(0.25));
  CHECK(*r.normalized_total_um2 == doctest::Approx(2080455 * 0.25));
  CHECK_THROWS_AS(normalize_to_node(r, 0), Error);
}

TEST_CASE("latency model examples at 100 MHz") {
  const auto g = testing::table1();
  const struct {
    int T;
    double target;
  } cases[] = {{37, 9500}, {90, 23100}, {212, 54300}};
  for (const auto& c : cases) {
    const auto p = latency_model(g, c.T, 100e6);
    CHECK(p.stream_cycles == static_cast<std::uint64_t>(c.T) * 256);
    CHECK(p.fill_cycles == 9);
    CHECK(std::abs(static_cast<double>(p.cycles) - c.target) <= 0.1 * c.target);
    CHECK(p.seconds == doctest::Approx(static_cast<double>(p.cycles) / 100e6));
  }
  CHECK(latency_model(g, 0, 100e6).cycles == 9);
  CHECK_THROWS_AS(latency_model(g, -1, 100e6), Error);
  CHECK_THROWS_AS(latency_model(g, 1, 0), Error);
}

TEST_CASE("latency model equals measured cycles") {
  for (std::uint64_t seed = 200; seed < 260; ++seed) {
    const auto rc = testing::random_case(seed);
    if (rc.inputs.empty()) continue;
    const auto r = run_network(rc.graph, rc.inputs);
    CHECK(latency_model(rc.graph, static_cast<std::int64_t>(rc.inputs.size()), 1e8).cycles == r.stats.total_cycles);
  }
}

TEST_CASE("sweep") {
  TopologyFamily f;
  f.depths = {3, 4, 5, 6};
  f.hidden_kernels = {8, 16};

  SUBCASE("ranked by area") {
    const auto entries = sweep(f, std::nullopt, 4);
    CHECK(entries.size() == 8);
    for (std::size_t n = 1; n < entries.size(); ++n) CHECK(entries[n - 1].report.total_um2 <= entries[n].report.total_um2);
  }
  SUBCASE("the five-layer stack is among the candidates") {
    const auto entries = sweep(f, std::nullopt, 2);
    bool found = false;
    for (const auto& e : entries) found |= e.report.total_um2 == 2080455;
    CHECK(found);
  }
  SUBCASE("budget filters") {
    const auto entries = sweep(f, 2080455, 1);
    for (const auto& e : entries) CHECK(e.report.total_um2 <= 2080455);
    CHECK(entries.size() < 8);
  }
  SUBCASE("thread count does not change the ranking") {
    const auto a = sweep(f, std::nullopt, 1);
    const auto b = sweep(f, std::nullopt, 8);
    REQUIRE(a.size() == b.size());
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n].label == b[n].label);
  }
  SUBCASE("infeasible candidates are skipped") {
    f.depths = {8};
    CHECK(sweep(f, std::nullopt).empty());
  }
  SUBCASE("empty family") {
    f.depths.clear();
    try {
      sweep(f, std::nullopt);
      FAIL("expected EmptyFamily");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyFamily);
    }
  }
}

TEST_CASE("report serialization") {
  const auto r = network_area(testing::table1());
  const auto j = to_json(r);
  CHECK(j["schema"] == "bwsnn-area/1");
  CHECK(j["layers"].size() == 5);
  const auto csv = to_csv(r);
  CHECK(csv.find("conv1") != std::string::npos);
  CHECK(csv.find("2080455") != std::string::npos);
}
