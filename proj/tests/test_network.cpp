#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "flatneat/network.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

using namespace flatneat;

namespace {

AttributeSchema rich_schema() {
  AttributeSchema s;
  s.activations = {"tanh", "sigmoid", "identity", "relu", "sin"};
  s.aggregations = {"sum", "product", "max", "mean"};
  return s;
}

// Input key 0, output key 1, hidden key 2; conns passed explicitly.
GenomeTensors chain_genome(const AttributeSchema& s,
                           const std::vector<ConnRecord>& conns,
                           const std::string& act = "identity",
                           double out_bias = 0.0) {
  std::vector<NodeRow> nodes = {
      encode_node(NodeRecord{0, 0.0, 1.0, "sum", "identity"}, s),
      encode_node(NodeRecord{1, out_bias, 1.0, "sum", act}, s),
      encode_node(NodeRecord{2, 0.0, 1.0, "sum", act}, s)};
  std::vector<ConnRow> rows;
  for (const auto& c : conns) rows.push_back(encode_conn(c));
  return pad_genome(nodes, rows, GenomeLimits{6, 8}, {0}, {1});
}

}  // namespace

TEST(Transform, OrderRespectsEdges) {
  const auto s = rich_schema();
  const auto g = chain_genome(s, {{0, 2, true, 1.0}, {2, 1, true, 1.0}});
  const auto t = transform(g, s);
  ASSERT_EQ(t.order_count, 3);
  std::vector<int> keys;
  for (int i = 0; i < t.order_count; ++i)
    keys.push_back(int(g.node_row(t.order[std::size_t(i)])[kNodeKey]));
  EXPECT_EQ(keys, (std::vector<int>{0, 2, 1}));
  EXPECT_EQ(t.order[3], -1);
}

TEST(Transform, ExpandedCellsFollowEnabledFlag) {
  const auto s = rich_schema();
  // Rows: conn row 0 = (0->2, enabled, 0.7); row 1 = (2->1, disabled, 0.5).
  const auto g = chain_genome(s, {{0, 2, true, 0.7}, {2, 1, false, 0.5}});
  const auto t = transform(g, s);
  // Node keys 0,1,2 sit at rows 0,1,2.
  EXPECT_EQ(t.expanded_cell(0, 2), 0.7);
  EXPECT_TRUE(std::isnan(t.expanded_cell(2, 1)));
  EXPECT_TRUE(std::isnan(t.expanded_cell(0, 1)));
}

TEST(Transform, CycleDetectedWithKeys) {
  const auto s = rich_schema();
  const auto g = chain_genome(s, {{0, 2, true, 1.0}, {2, 0, true, 1.0}});
  try {
    transform(g, s);
    FAIL() << "expected cycle_detected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::cycle_detected);
    EXPECT_NE(std::string(e.what()).find("0->2->0"), std::string::npos)
        << e.what();
  }
}

TEST(Forward, IdentityNetwork) {
  const auto s = rich_schema();
  const auto g = chain_genome(s, {{0, 1, true, 1.0}});
  const auto t = transform(g, s);
  for (double x : {-1.5, 0.0, 0.25, 2.0}) {
    const auto out = forward(t, std::vector<double>{x});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], x);
  }
}

TEST(Forward, TanhChainFrozenValue) {
  const auto s = rich_schema();
  // input 1.0, w=0.5, bias 0.1, response 1, tanh, sum.
  const auto g = chain_genome(s, {{0, 1, true, 0.5}}, "tanh", 0.1);
  const auto t = transform(g, s);
  const auto out = forward(t, std::vector<double>{1.0});
  // tanh(0.6), computed independently.
  EXPECT_NEAR(out[0], 0.5370495669980353, 1e-15);
}

TEST(Forward, TwoIncomingConnections) {
  const auto s = rich_schema();
  std::vector<NodeRow> nodes = {
      encode_node(NodeRecord{0, 0.0, 1.0, "sum", "identity"}, s),
      encode_node(NodeRecord{1, 0.0, 1.0, "sum", "identity"}, s),
      encode_node(NodeRecord{2, 0.1, 1.0, "sum", "identity"}, s)};
  std::vector<ConnRow> conns = {encode_conn(ConnRecord{0, 2, true, 0.5}),
                                encode_conn(ConnRecord{1, 2, true, -0.25})};
  const auto g = pad_genome(nodes, conns, GenomeLimits{6, 8}, {0, 1}, {2});
  const auto out = forward(transform(g, s), std::vector<double>{1.0, 2.0});
  EXPECT_NEAR(out[0], 0.1, 1e-15);  // 0.5*1 - 0.25*2 + 0.1
}

TEST(Forward, NonFiniteInputRejected) {
  const auto s = rich_schema();
  const auto t = transform(chain_genome(s, {{0, 1, true, 1.0}}), s);
  EXPECT_THROW(forward(t, std::vector<double>{std::nan("")}), Error);
}

TEST(ApplyFunctions, BuiltinsAndErrors) {
  const auto s = rich_schema();
  EXPECT_EQ(apply_activation(s, s.activation_id("tanh"), 0.0), 0.0);
  EXPECT_EQ(apply_activation(s, s.activation_id("sigmoid"), 0.0), 0.5);
  EXPECT_EQ(apply_aggregation(s, s.aggregation_id("sum"), {}), 0.0);
  EXPECT_EQ(apply_aggregation(s, s.aggregation_id("product"), {}), 1.0);
  const std::vector<double> xs{1.0, -2.0, 3.0};
  EXPECT_EQ(apply_aggregation(s, s.aggregation_id("max"), xs), 3.0);
  EXPECT_EQ(apply_aggregation(s, s.aggregation_id("mean"), xs), 2.0 / 3.0);
  try {
    apply_aggregation(s, s.aggregation_id("max"), {});
    FAIL() << "expected empty_aggregation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_aggregation);
  }
}

TEST(BatchForward, MatchesSequentialLoopBitExact) {
  const auto s = rich_schema();
  RngStream stream(RngKey(1312));
  std::vector<GenomeTensors> genomes;
  std::vector<TransformedNetwork> nets;
  for (int i = 0; i < 64; ++i) {
    genomes.push_back(
        testgen::random_acyclic_genome(stream, s).pad(GenomeLimits{16, 60}));
    nets.push_back(transform(genomes.back(), s));
  }
  const int batch = 16;
  std::vector<double> inputs;
  for (int i = 0; i < batch * 3; ++i) inputs.push_back(stream.uniform(-2, 2));

  ThreadPool pool(4);
  const auto result = batch_forward(nets, inputs, batch, &pool, 4);
  ASSERT_EQ(result.values.size(), std::size_t(64 * batch * 1));
  for (int p = 0; p < 64; ++p) {
    for (int b = 0; b < batch; ++b) {
      const auto one = forward(
          nets[std::size_t(p)],
          std::span(inputs).subspan(std::size_t(b) * 3, 3));
      ASSERT_EQ(std::memcmp(&one[0], &result.values[(std::size_t(p) * batch +
                                                     std::size_t(b))],
                            sizeof(double)),
                0);
    }
  }
}

TEST(BatchForward, DegenerateShapes) {
  const auto s = rich_schema();
  const auto g = chain_genome(s, {{0, 1, true, 1.0}});
  const std::vector<TransformedNetwork> nets{transform(g, s), transform(g, s)};
  const std::vector<double> inputs{0.75};
  const auto r = batch_forward(nets, inputs, 1);
  EXPECT_EQ(r.at(0, 0, 0), r.at(1, 0, 0));
  EXPECT_EQ(r.at(0, 0, 0), 0.75);
}

TEST(NetworkProperties, OrderValidAndOutputsFinite) {
  const auto s = rich_schema();
  RngStream stream(RngKey(71));
  for (int trial = 0; trial < 150; ++trial) {
    const auto g =
        testgen::random_acyclic_genome(stream, s).pad(GenomeLimits{16, 60});
    const auto t = transform(g, s);
    // position of each row in the order
    std::vector<int> pos(std::size_t(g.limits.max_nodes), -1);
    for (int i = 0; i < t.order_count; ++i)
      pos[std::size_t(t.order[std::size_t(i)])] = i;
    for (int src = 0; src < g.limits.max_nodes; ++src)
      for (int dst = 0; dst < g.limits.max_nodes; ++dst)
        if (!std::isnan(t.expanded_cell(src, dst)))
          ASSERT_LT(pos[std::size_t(src)], pos[std::size_t(dst)]);

    const auto inputs = testgen::random_inputs(stream, 3);
    for (double v : forward(t, inputs)) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(NetworkProperties, PaddingInvarianceIsBitExact) {
  const auto s = rich_schema();
  RngStream stream(RngKey(90210));
  for (int trial = 0; trial < 60; ++trial) {
    const auto raw = testgen::random_acyclic_genome(stream, s);
    const auto small = transform(raw.pad(GenomeLimits{50, 100}), s);
    const auto large = transform(raw.pad(GenomeLimits{200, 400}), s);
    const auto inputs = testgen::random_inputs(stream, 3);
    const auto a = forward(small, inputs);
    const auto b = forward(large, inputs);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      ASSERT_EQ(std::memcmp(&a[i], &b[i], sizeof(double)), 0);
  }
}

TEST(NetworkProperties, MatchesOracleEvaluator) {
  const auto s = rich_schema();
  RngStream stream(RngKey(5150));
  double worst = 0.0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto g =
        testgen::random_acyclic_genome(stream, s).pad(GenomeLimits{16, 60});
    const auto t = transform(g, s);
    const auto o = oracle::from_tensors(g, s);
    for (int rep = 0; rep < 4; ++rep) {
      const auto inputs = testgen::random_inputs(stream, 3);
      const auto got = forward(t, inputs);
      const auto want = oracle::oracle_forward(o, inputs);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i)
        worst = std::max(worst, std::abs(got[i] - want[i]));
    }
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(OracleRoundTrip, TensorsToOracleAndBack) {
  const auto s = rich_schema();
  RngStream stream(RngKey(60));
  const auto g =
      testgen::random_acyclic_genome(stream, s).pad(GenomeLimits{16, 60});
  const auto o = oracle::from_tensors(g, s);
  const auto back = oracle::to_tensors(o, g.limits, s);
  const auto da = decode_genome(g, s);
  const auto db = decode_genome(back, s);
  ASSERT_EQ(da.nodes.size(), db.nodes.size());
  ASSERT_EQ(da.conns.size(), db.conns.size());

  oracle::OracleGenome big;
  big.limits = GenomeLimits{2, 2};
  big.input_keys = {0};
  big.output_keys = {1};
  for (int k = 0; k < 5; ++k) big.nodes[k] = oracle::OracleNode{};
  EXPECT_THROW(oracle::to_tensors(big, big.limits, s), Error);
}
