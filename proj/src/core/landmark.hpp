#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/graph.hpp"

namespace sepne {

enum class LandmarkStrategy {
  kDegreeDeterministic,   // k highest total degrees, ties to smaller id
  kDegreeProbabilistic,   // degree-weighted sampling without replacement
  kUniform,               // uniform sampling without replacement
  kGreedyDominatingSet,   // greedy dominating set from a degree max-heap
};

const char* to_string(LandmarkStrategy strategy);
// Accepts the short names dd/dp/uf/gds; throws on anything else.
LandmarkStrategy landmark_strategy_from_string(const std::string& name);

struct LandmarkSet {
  LandmarkStrategy strategy = LandmarkStrategy::kDegreeDeterministic;
  std::uint64_t seed = 0;
  std::vector<NodeId> nodes;

  std::size_t size() const { return nodes.size(); }
};

LandmarkSet select_dd(const GraphStore& g, std::size_t k);
LandmarkSet select_dp(const GraphStore& g, std::size_t k, std::uint64_t seed);
LandmarkSet select_uf(const GraphStore& g, std::size_t k, std::uint64_t seed);
// May return fewer than k nodes: once every node is dominated (equal or
// adjacent to a selected landmark on the undirected view) the heap runs dry
// and the selection is a dominating set of the graph.
LandmarkSet select_gds(const GraphStore& g, std::size_t k);

LandmarkSet select_landmarks(const GraphStore& g, LandmarkStrategy strategy, std::size_t k,
                             std::uint64_t seed);

}  // namespace sepne
