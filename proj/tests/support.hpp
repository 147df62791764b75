#pragma once

#include <string>

#include "gasnet/network.hpp"
#include "gasnet/scenario.hpp"

#ifndef GASNET_DATA_DIR
#define GASNET_DATA_DIR "data"
#endif

namespace gasnet::test {

inline std::string data(const std::string& rel) { return std::string(GASNET_DATA_DIR) + "/" + rel; }

inline Network israel() { return load_network(data("israel_11node.json")); }

inline Scenario shipped(const std::string& name, const Network& net) {
  return load_scenario(data("scenarios/" + name + ".json"), net);
}

} // namespace gasnet::test
