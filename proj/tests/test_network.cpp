#include <gtest/gtest.h>

#include "gasnet/network.hpp"
#include "support.hpp"

using namespace gasnet;

namespace {

nlohmann::json two_node() {
  return nlohmann::json::parse(R"({
    "units": {"length": "km", "diameter": "mm", "pressure": "bar"},
    "nodes": [{"id": 1, "kind": "supply", "p_min": 50, "p_max": 85},
              {"id": 2, "kind": "demand", "p_min": 50, "p_max": 85}],
    "pipes": [{"id": 1, "from": 1, "to": 2, "length": 20, "diameter": 600}]})");
}

} // namespace

TEST(Network, ShippedNetworkLoads) {
  const auto net = test::israel();
  EXPECT_EQ(net.nodes().size(), 11u);
  EXPECT_EQ(net.pipes().size(), 13u);
  int supplies = 0;
  for (const auto& n : net.nodes()) supplies += n.kind == NodeKind::supply;
  EXPECT_EQ(supplies, 2);
  for (std::size_t n = 0; n < net.nodes().size(); ++n) EXPECT_FALSE(net.incident(n).empty());
}

TEST(Network, UnitConversion) {
  const auto net = network_from_json(two_node());
  EXPECT_DOUBLE_EQ(net.pipes()[0].length, 20e3);
  EXPECT_DOUBLE_EQ(net.pipes()[0].diameter, 0.6);
  EXPECT_DOUBLE_EQ(net.pipes()[0].friction, 0.01);
  EXPECT_DOUBLE_EQ(net.nodes()[0].p_min, 50e5);
  EXPECT_EQ(net.node_index(2), 1u);
  EXPECT_THROW(net.node_index(7), ValidationError);
}

TEST(Network, RejectsUnknownEndpoint) {
  auto j = two_node();
  j["pipes"][0]["to"] = 9;
  EXPECT_THROW(network_from_json(j), ValidationError);
}

TEST(Network, RejectsDisconnected) {
  auto j = two_node();
  j["nodes"].push_back({{"id", 3}, {"kind", "demand"}, {"p_min", 50}, {"p_max", 85}});
  EXPECT_THROW(network_from_json(j), ValidationError);
}

TEST(Network, RejectsBadGeometry) {
  for (const char* key : {"length", "diameter"}) {
    auto j = two_node();
    j["pipes"][0][key] = -1.0;
    EXPECT_THROW(network_from_json(j), ValidationError) << key;
  }
  auto j = two_node();
  j["nodes"][1]["id"] = 1;
  EXPECT_THROW(network_from_json(j), ValidationError);
}

TEST(Network, RequiresSupply) {
  auto j = two_node();
  j["nodes"][0]["kind"] = "junction";
  EXPECT_THROW(network_from_json(j), ValidationError);
}

TEST(Network, MissingFileIsValidationError) {
  EXPECT_THROW(load_network("/nonexistent/net.json"), ValidationError);
}
