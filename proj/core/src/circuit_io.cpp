#include "json.hpp"
#include <stdexcept>

#include "bosonet/circuit.hpp"

namespace bosonet {

using nlohmann::json;

std::string circuit_to_json(const CircuitPlan& plan) {
  json j;
  j["num_modes"] = plan.num_modes;
  j["depth"] = plan.depth();
  j["block_boundaries"] = plan.block_boundaries;
  j["layer_boundaries"] = plan.layer_boundaries;
  json gates = json::array();
  for (const auto& g : plan.gates) gates.push_back({{"site", g.site}, {"theta", g.theta}, {"phi", g.phi}});
  j["gates"] = std::move(gates);
  // 17 significant digits round-trip doubles exactly.
  return j.dump(1);
}

CircuitPlan circuit_from_json(const std::string& text) {
  CircuitPlan plan;
  try {
    const json j = json::parse(text);
    plan.num_modes = j.at("num_modes").get<int>();
    for (const auto& g : j.at("gates")) {
      plan.gates.push_back({g.at("site").get<int>(), g.at("theta").get<double>(), g.at("phi").get<double>()});
    }
    const std::vector<std::size_t> whole{0, plan.gates.size()};
    plan.block_boundaries = j.contains("block_boundaries")
                                ? j["block_boundaries"].get<std::vector<std::size_t>>()
                                : whole;
    plan.layer_boundaries = j.contains("layer_boundaries")
                                ? j["layer_boundaries"].get<std::vector<std::size_t>>()
                                : std::vector<std::size_t>{};
    if (plan.layer_boundaries.empty()) {
      // One gate per layer is always a valid layering.
      for (std::size_t i = 0; i <= plan.gates.size(); ++i) plan.layer_boundaries.push_back(i);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("circuit json: ") + e.what());
  }
  validate(plan);
  return plan;
}

std::uint64_t circuit_hash(const CircuitPlan& plan) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : circuit_to_json(plan)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace bosonet
