#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gasnet/eos.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/units.hpp"

namespace gasnet {

enum class NodeKind { supply, demand, junction };

inline std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::supply: return "supply";
    case NodeKind::demand: return "demand";
    case NodeKind::junction: return "junction";
  }
  return "?";
}

struct Node {
  int id = 0;
  std::string name;
  NodeKind kind = NodeKind::junction;
  double p_min = 0.0;     // Pa
  double p_max = 0.0;     // Pa
  double elevation = 0.0; // m, not used by the dynamics
};

struct Pipe {
  int id = 0;
  int from_node = 0;
  int to_node = 0;
  double length = 0.0;   // m
  double diameter = 0.0; // m
  double friction = 0.01;

  double area() const { return units::pi * diameter * diameter / 4.0; }
};

/// Directed multigraph of nodes and pipes. Nodes and pipes are addressed
/// by position internally; `node_index` maps the user-facing ids.
class Network {
public:
  Network() = default;
  Network(std::vector<Node> nodes, std::vector<Pipe> pipes, GasProperties gas = {})
      : nodes_(std::move(nodes)), pipes_(std::move(pipes)), gas_(gas) {
    validate();
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i].id] = i;
    incident_.resize(nodes_.size());
    for (std::size_t k = 0; k < pipes_.size(); ++k) {
      incident_[index_.at(pipes_[k].from_node)].push_back(k);
      if (pipes_[k].to_node != pipes_[k].from_node)
        incident_[index_.at(pipes_[k].to_node)].push_back(k);
    }
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Pipe>& pipes() const { return pipes_; }
  const GasProperties& gas() const { return gas_; }
  void set_gas(const GasProperties& g) { gas_ = g; }

  std::size_t node_index(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown node id " + std::to_string(id));
    return it->second;
  }
  bool has_node(int id) const { return index_.count(id) != 0; }

  std::size_t from_index(std::size_t pipe) const { return index_.at(pipes_[pipe].from_node); }
  std::size_t to_index(std::size_t pipe) const { return index_.at(pipes_[pipe].to_node); }

  // Pipes touching a node, in ascending pipe order.
  const std::vector<std::size_t>& incident(std::size_t node) const { return incident_[node]; }

private:
  void validate() const {
    std::vector<std::string> issues;
    std::map<int, int> seen;
    for (const auto& n : nodes_) {
      if (++seen[n.id] == 2) issues.push_back("duplicate node id " + std::to_string(n.id));
      if (!(n.p_min > 0.0 && n.p_min < n.p_max))
        issues.push_back("node " + std::to_string(n.id) + ": need 0 < p_min < p_max");
    }
    std::map<int, int> pipe_seen;
    for (const auto& p : pipes_) {
      const std::string tag = "pipe " + std::to_string(p.id);
      if (++pipe_seen[p.id] == 2) issues.push_back("duplicate pipe id " + std::to_string(p.id));
      if (!seen.count(p.from_node)) issues.push_back(tag + ": unknown from_node " + std::to_string(p.from_node));
      if (!seen.count(p.to_node)) issues.push_back(tag + ": unknown to_node " + std::to_string(p.to_node));
      if (p.from_node == p.to_node) issues.push_back(tag + ": self loop on node " + std::to_string(p.from_node));
      if (!(p.length > 0.0)) issues.push_back(tag + ": non-positive length");
      if (!(p.diameter > 0.0)) issues.push_back(tag + ": non-positive diameter");
      if (!(p.friction > 0.0)) issues.push_back(tag + ": non-positive friction factor");
    }
    if (nodes_.empty()) issues.push_back("network has no nodes");
    if (std::none_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind == NodeKind::supply; }))
      issues.push_back("network has no supply node");
    if (issues.empty() && !connected()) issues.push_back("network is disconnected");
    if (!issues.empty()) {
      std::ostringstream os;
      os << "invalid network:";
      for (const auto& s : issues) os << "\n  " << s;
      throw ValidationError(os.str());
    }
  }

  bool connected() const {
    std::map<int, int> parent;
    for (const auto& n : nodes_) parent[n.id] = n.id;
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& p : pipes_) parent[find(p.from_node)] = find(p.to_node);
    const int root = find(nodes_.front().id);
    return std::all_of(nodes_.begin(), nodes_.end(), [&](const Node& n) { return find(n.id) == root; });
  }

  std::vector<Node> nodes_;
  std::vector<Pipe> pipes_;
  GasProperties gas_;
  std::map<int, std::size_t> index_;
  std::vector<std::vector<std::size_t>> incident_;
};

namespace detail {

inline double length_scale(const std::string& u) {
  if (u == "m") return 1.0;
  if (u == "km") return 1000.0;
  if (u == "mm") return 1e-3;
  if (u == "cm") return 1e-2;
  if (u == "in") return 0.0254;
  throw ValidationError("unsupported length unit '" + u + "'");
}

inline double pressure_scale(const std::string& u) {
  if (u == "Pa") return 1.0;
  if (u == "kPa") return 1e3;
  if (u == "MPa") return 1e6;
  if (u == "bar") return units::pascal_per_bar;
  if (u == "psi") return units::pascal_per_psi;
  throw ValidationError("unsupported pressure unit '" + u + "'");
}

inline NodeKind parse_kind(const std::string& s) {
  if (s == "supply") return NodeKind::supply;
  if (s == "demand") return NodeKind::demand;
  if (s == "junction") return NodeKind::junction;
  throw ValidationError("unknown node kind '" + s + "'");
}

} // namespace detail

/// Builds a network from its JSON document. Lengths, diameters and pressures
/// are converted to SI using the `units` block (defaults: km, mm, bar, m).
inline Network network_from_json(const nlohmann::json& doc) {
  try {
    const auto u = doc.value("units", nlohmann::json::object());
    const double ls = detail::length_scale(u.value("length", "km"));
    const double ds = detail::length_scale(u.value("diameter", "mm"));
    const double ps = detail::pressure_scale(u.value("pressure", "bar"));
    const double es = detail::length_scale(u.value("elevation", "m"));
    const double default_friction = doc.value("defaults", nlohmann::json::object()).value("friction", 0.01);

    GasProperties gas;
    if (doc.contains("gas")) {
      const auto& g = doc["gas"];
      gas.gravity = g.value("gravity", gas.gravity);
      gas.temperature = g.value("temperature_K", gas.temperature);
      gas.energy_density = g.value("energy_density_MJ_per_kg", gas.energy_density);
    }
    gas.validate();

    std::vector<Node> nodes;
    for (const auto& jn : doc.at("nodes")) {
      Node n;
      n.id = jn.at("id").get<int>();
      n.name = jn.value("name", "node " + std::to_string(n.id));
      n.kind = detail::parse_kind(jn.value("kind", "junction"));
      n.p_min = jn.at("p_min").get<double>() * ps;
      n.p_max = jn.at("p_max").get<double>() * ps;
      n.elevation = jn.value("elevation", 0.0) * es;
      nodes.push_back(std::move(n));
    }
    std::vector<Pipe> pipes;
    for (const auto& jp : doc.at("pipes")) {
      Pipe p;
      p.id = jp.at("id").get<int>();
      p.from_node = jp.at("from").get<int>();
      p.to_node = jp.at("to").get<int>();
      p.length = jp.at("length").get<double>() * ls;
      p.diameter = jp.at("diameter").get<double>() * ds;
      p.friction = jp.value("friction", default_friction);
      pipes.push_back(p);
    }
    return Network(std::move(nodes), std::move(pipes), gas);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("network file: ") + e.what());
  }
}

inline Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open network file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("network file '" + path + "': " + e.what());
  }
  return network_from_json(doc);
}

} // namespace gasnet
