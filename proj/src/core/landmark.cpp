#include "core/landmark.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace sepne {

namespace {

void check_k(std::size_t k, std::size_t limit, const char* what) {
  if (k == 0) throw std::invalid_argument("landmark count must be at least 1");
  if (k > limit) {
    throw std::invalid_argument(std::string("landmark count exceeds ") + what + " (" +
                                std::to_string(k) + " > " + std::to_string(limit) + ")");
  }
}

}  // namespace

const char* to_string(LandmarkStrategy strategy) {
  switch (strategy) {
    case LandmarkStrategy::kDegreeDeterministic:
      return "dd";
    case LandmarkStrategy::kDegreeProbabilistic:
      return "dp";
    case LandmarkStrategy::kUniform:
      return "uf";
    case LandmarkStrategy::kGreedyDominatingSet:
      return "gds";
  }
  return "unknown";
}

LandmarkStrategy landmark_strategy_from_string(const std::string& name) {
  if (name == "dd") return LandmarkStrategy::kDegreeDeterministic;
  if (name == "dp") return LandmarkStrategy::kDegreeProbabilistic;
  if (name == "uf") return LandmarkStrategy::kUniform;
  if (name == "gds") return LandmarkStrategy::kGreedyDominatingSet;
  throw std::invalid_argument("unknown landmark strategy: " + name);
}

LandmarkSet select_dd(const GraphStore& g, std::size_t k) {
  check_k(k, g.node_count(), "node count");
  std::vector<NodeId> order(g.node_count());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return g.total_degree(a) > g.total_degree(b);
  });
  LandmarkSet lm;
  lm.strategy = LandmarkStrategy::kDegreeDeterministic;
  lm.nodes.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  return lm;
}

LandmarkSet select_dp(const GraphStore& g, std::size_t k, std::uint64_t seed) {
  std::vector<double> weight(g.node_count());
  std::size_t positive = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    weight[u] = static_cast<double>(g.total_degree(u));
    if (weight[u] > 0.0) ++positive;
  }
  check_k(k, positive, "number of positive-degree nodes");

  LandmarkSet lm;
  lm.strategy = LandmarkStrategy::kDegreeProbabilistic;
  lm.seed = seed;
  Rng rng(seed);
  std::vector<double> cumulative(g.node_count());
  for (std::size_t pick = 0; pick < k; ++pick) {
    double total = 0.0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      total += weight[u];
      cumulative[u] = total;
    }
    const double x = rng.uniform_real() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    auto u = static_cast<NodeId>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                          g.node_count() - 1));
    // Guard against landing on a zero-weight slot through rounding.
    while (weight[u] == 0.0 && u > 0) --u;
    lm.nodes.push_back(u);
    weight[u] = 0.0;
  }
  return lm;
}

LandmarkSet select_uf(const GraphStore& g, std::size_t k, std::uint64_t seed) {
  check_k(k, g.node_count(), "node count");
  std::vector<NodeId> pool(g.node_count());
  std::iota(pool.begin(), pool.end(), NodeId{0});
  Rng rng(seed);
  LandmarkSet lm;
  lm.strategy = LandmarkStrategy::kUniform;
  lm.seed = seed;
  // Partial Fisher-Yates: draw into the tail, take the tail.
  for (std::size_t pick = 0; pick < k; ++pick) {
    const std::size_t remaining = pool.size() - pick;
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(remaining));
    std::swap(pool[j], pool[remaining - 1]);
    lm.nodes.push_back(pool[remaining - 1]);
  }
  return lm;
}

LandmarkSet select_gds(const GraphStore& g, std::size_t k) {
  check_k(k, g.node_count(), "node count");
  // Max-heap ordered by total degree, ties to the smaller id.
  using Entry = std::pair<std::uint64_t, NodeId>;
  auto lower = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(lower)> heap(lower);
  for (NodeId u = 0; u < g.node_count(); ++u) heap.emplace(g.total_degree(u), u);

  LandmarkSet lm;
  lm.strategy = LandmarkStrategy::kGreedyDominatingSet;
  std::vector<char> dominated(g.node_count(), 0);
  while (!heap.empty() && lm.nodes.size() < k) {
    const NodeId u = heap.top().second;
    heap.pop();
    if (dominated[u]) continue;
    lm.nodes.push_back(u);
    dominated[u] = 1;
    for (const NodeId v : g.undirected_neighbors(u)) dominated[v] = 1;
  }
  return lm;
}

LandmarkSet select_landmarks(const GraphStore& g, LandmarkStrategy strategy, std::size_t k,
                             std::uint64_t seed) {
  LandmarkSet lm;
  switch (strategy) {
    case LandmarkStrategy::kDegreeDeterministic:
      lm = select_dd(g, k);
      break;
    case LandmarkStrategy::kDegreeProbabilistic:
      lm = select_dp(g, k, seed);
      break;
    case LandmarkStrategy::kUniform:
      lm = select_uf(g, k, seed);
      break;
    case LandmarkStrategy::kGreedyDominatingSet:
      lm = select_gds(g, k);
      break;
    default:
      throw std::invalid_argument("unknown landmark strategy");
  }
  lm.seed = seed;
  return lm;
}

}  // namespace sepne
