#include "core/partition.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace sepne {

namespace {

std::vector<char> exclusion_mask(const GraphStore& g, std::span<const NodeId> excluded) {
  std::vector<char> mask(g.node_count(), 0);
  for (NodeId u : excluded) {
    if (u >= g.node_count()) throw std::out_of_range("excluded node id out of range");
    mask[u] = 1;
  }
  return mask;
}

std::vector<NodeId> candidate_nodes(const GraphStore& g, const std::vector<char>& excluded) {
  std::vector<NodeId> nodes;
  nodes.reserve(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (!excluded[u]) nodes.push_back(u);
  }
  return nodes;
}

void chunk_into_sets(const std::vector<NodeId>& nodes, std::size_t max_set_size,
                     std::vector<std::vector<NodeId>>& sets) {
  for (std::size_t begin = 0; begin < nodes.size(); begin += max_set_size) {
    const std::size_t end = std::min(begin + max_set_size, nodes.size());
    sets.emplace_back(nodes.begin() + begin, nodes.begin() + end);
  }
}

// Aggregated weighted graph for one Louvain level. Edges between distinct
// nodes appear in both adjacency lists; self_weight holds internal weight
// counted once. Node strength is the sum of incident edge weights with self
// loops counted twice, so aggregation preserves modularity.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> self_weight;
  std::vector<double> strength;
  double total_edge_weight = 0.0;

  std::size_t size() const { return adj.size(); }
};

// One sweep phase: local moves until no move improves modularity by more
// than 1e-7. Returns whether any move happened; fills node_comm.
bool louvain_one_level(const LevelGraph& lg, Rng& rng, std::vector<std::uint32_t>& node_comm) {
  const std::size_t n = lg.size();
  const double m = lg.total_edge_weight;
  constexpr double kMinGain = 1e-7;

  node_comm.resize(n);
  std::vector<double> comm_tot(n);
  for (std::size_t u = 0; u < n; ++u) {
    node_comm[u] = static_cast<std::uint32_t>(u);
    comm_tot[u] = lg.strength[u];
  }

  std::vector<std::uint32_t> order(n);
  for (std::size_t u = 0; u < n; ++u) order[u] = static_cast<std::uint32_t>(u);
  rng.shuffle(order);

  std::vector<double> weight_to(n, 0.0);
  std::vector<std::uint32_t> touched;
  bool any_move = false;
  std::size_t moves = 0;
  do {
    moves = 0;
    for (const std::uint32_t u : order) {
      const std::uint32_t old_comm = node_comm[u];
      comm_tot[old_comm] -= lg.strength[u];

      touched.clear();
      touched.push_back(old_comm);
      for (const auto& [v, w] : lg.adj[u]) {
        const std::uint32_t c = node_comm[v];
        if (weight_to[c] == 0.0) touched.push_back(c);
        weight_to[c] += w;
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

      auto gain_of = [&](std::uint32_t c) {
        return weight_to[c] / m - comm_tot[c] * lg.strength[u] / (2.0 * m * m);
      };
      const double stay_gain = gain_of(old_comm);
      std::uint32_t best = old_comm;
      double best_gain = stay_gain;
      for (const std::uint32_t c : touched) {
        const double gain = gain_of(c);
        if (gain > best_gain || (gain == best_gain && c < best)) {
          best = c;
          best_gain = gain;
        }
      }
      if (best != old_comm && best_gain - stay_gain > kMinGain) {
        node_comm[u] = best;
        ++moves;
        any_move = true;
      } else {
        node_comm[u] = old_comm;
      }
      comm_tot[node_comm[u]] += lg.strength[u];
      for (const std::uint32_t c : touched) weight_to[c] = 0.0;
    }
  } while (moves > 0);
  return any_move;
}

// Renumbers communities by their smallest member id, then collapses the
// level graph onto them.
LevelGraph aggregate(const LevelGraph& lg, std::vector<std::uint32_t>& node_comm) {
  const std::size_t n = lg.size();
  std::vector<std::uint32_t> renumber(n, std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next_id = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (renumber[node_comm[u]] == std::numeric_limits<std::uint32_t>::max()) {
      renumber[node_comm[u]] = next_id++;
    }
  }
  for (std::size_t u = 0; u < n; ++u) node_comm[u] = renumber[node_comm[u]];

  LevelGraph out;
  out.adj.resize(next_id);
  out.self_weight.assign(next_id, 0.0);
  out.strength.assign(next_id, 0.0);
  out.total_edge_weight = lg.total_edge_weight;

  std::vector<double> row(next_id, 0.0);
  std::vector<std::uint32_t> touched;
  // Group members per community to accumulate meta edges one row at a time.
  std::vector<std::vector<std::uint32_t>> members(next_id);
  for (std::size_t u = 0; u < n; ++u) members[node_comm[u]].push_back(static_cast<std::uint32_t>(u));
  for (std::uint32_t c = 0; c < next_id; ++c) {
    touched.clear();
    double internal = 0.0;
    for (const std::uint32_t u : members[c]) {
      internal += lg.self_weight[u];
      for (const auto& [v, w] : lg.adj[u]) {
        const std::uint32_t vc = node_comm[v];
        if (vc == c) {
          internal += 0.5 * w;
        } else {
          if (row[vc] == 0.0) touched.push_back(vc);
          row[vc] += w;
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    out.self_weight[c] = internal;
    double strength = 2.0 * internal;
    for (const std::uint32_t vc : touched) {
      out.adj[c].emplace_back(vc, row[vc]);
      strength += row[vc];
      row[vc] = 0.0;
    }
    out.strength[c] = strength;
  }
  return out;
}

}  // namespace

const char* to_string(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::kLouvain:
      return "louvain";
    case PartitionMode::kRandom:
      return "random";
    case PartitionMode::kInterestedOnly:
      return "interested_only";
    case PartitionMode::kExternal:
      return "external";
  }
  return "unknown";
}

std::size_t PartitionPlan::total_nodes() const {
  std::size_t total = 0;
  for (const auto& set : sets) total += set.size();
  return total;
}

void PartitionPlan::validate(const GraphStore& g, std::span<const NodeId> excluded) const {
  const auto excl = exclusion_mask(g, excluded);
  std::vector<char> seen(g.node_count(), 0);
  for (const auto& set : sets) {
    if (set.empty()) throw std::invalid_argument("partition contains an empty set");
    for (const NodeId u : set) {
      if (u >= g.node_count()) throw std::out_of_range("partition node id out of range");
      if (excl[u]) throw std::invalid_argument("partition assigns excluded node " + g.label_of(u));
      if (seen[u]) throw std::invalid_argument("node " + g.label_of(u) + " appears in two sets");
      seen[u] = 1;
    }
  }
  if (mode == PartitionMode::kLouvain || mode == PartitionMode::kRandom) {
    for (NodeId u = 0; u < g.node_count(); ++u) {
      if (!excl[u] && !seen[u]) {
        throw std::invalid_argument("partition misses node " + g.label_of(u));
      }
    }
  }
}

PartitionPlan partition_random(const GraphStore& g, std::span<const NodeId> excluded,
                               std::size_t num_sets, std::uint64_t seed) {
  if (num_sets == 0) throw std::invalid_argument("number of sets must be at least 1");
  auto candidates = candidate_nodes(g, exclusion_mask(g, excluded));
  if (candidates.size() < num_sets) {
    throw std::invalid_argument("fewer non-excluded nodes than requested sets");
  }
  Rng rng(seed);
  rng.shuffle(candidates);

  PartitionPlan plan;
  plan.mode = PartitionMode::kRandom;
  plan.seed = seed;
  plan.sets.resize(num_sets);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    plan.sets[i % num_sets].push_back(candidates[i]);
  }
  for (auto& set : plan.sets) std::sort(set.begin(), set.end());
  plan.validate(g, excluded);
  return plan;
}

PartitionPlan partition_interested(const GraphStore& g, std::span<const NodeId> excluded,
                                   std::span<const NodeId> requested, std::size_t max_set_size) {
  if (requested.empty()) throw std::invalid_argument("requested node set is empty");
  if (max_set_size == 0) throw std::invalid_argument("max_set_size must be at least 1");
  const auto excl = exclusion_mask(g, excluded);

  std::vector<NodeId> wanted(requested.begin(), requested.end());
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  PartitionPlan plan;
  plan.mode = PartitionMode::kInterestedOnly;
  std::vector<NodeId> kept;
  kept.reserve(wanted.size());
  for (const NodeId u : wanted) {
    if (u >= g.node_count()) throw std::out_of_range("requested node id out of range");
    if (excl[u]) {
      ++plan.dropped_excluded;
    } else {
      kept.push_back(u);
    }
  }
  if (kept.empty()) {
    throw DataError("all requested nodes are landmarks; nothing to embed beyond them");
  }
  chunk_into_sets(kept, max_set_size, plan.sets);
  plan.validate(g, excluded);
  return plan;
}

PartitionPlan partition_louvain(const GraphStore& g, std::span<const NodeId> excluded,
                                std::uint64_t seed, std::size_t max_set_size) {
  if (max_set_size == 0) throw std::invalid_argument("max_set_size must be at least 1");
  const auto excl = exclusion_mask(g, excluded);
  const auto candidates = candidate_nodes(g, excl);
  if (candidates.empty()) throw std::invalid_argument("no nodes left to partition");

  PartitionPlan plan;
  plan.mode = PartitionMode::kLouvain;
  plan.seed = seed;

  // Candidate-restricted undirected adjacency with unit weights; nodes with
  // no surviving edge are set aside as isolated.
  std::vector<std::uint32_t> local(g.node_count(), std::numeric_limits<std::uint32_t>::max());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    local[candidates[i]] = static_cast<std::uint32_t>(i);
  }
  LevelGraph lg;
  lg.adj.resize(candidates.size());
  lg.self_weight.assign(candidates.size(), 0.0);
  lg.strength.assign(candidates.size(), 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (const NodeId v : g.undirected_neighbors(candidates[i])) {
      const std::uint32_t j = local[v];
      if (j == std::numeric_limits<std::uint32_t>::max()) continue;
      lg.adj[i].emplace_back(j, 1.0);
      lg.strength[i] += 1.0;
      lg.total_edge_weight += 0.5;
    }
  }

  std::vector<NodeId> isolated;
  std::vector<NodeId> connected;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    (lg.adj[i].empty() ? isolated : connected).push_back(candidates[i]);
  }

  if (connected.empty()) {
    std::cerr << "[sepne] warning: no edges among partition candidates; using a single set\n";
    plan.sets.push_back(candidates);
    plan.validate(g, excluded);
    return plan;
  }

  // Compact the level graph onto connected nodes only.
  if (!isolated.empty()) {
    LevelGraph compact;
    compact.adj.resize(connected.size());
    compact.self_weight.assign(connected.size(), 0.0);
    compact.strength.assign(connected.size(), 0.0);
    compact.total_edge_weight = lg.total_edge_weight;
    std::vector<std::uint32_t> remap(candidates.size(), 0);
    for (std::size_t i = 0, j = 0; i < candidates.size(); ++i) {
      if (!lg.adj[i].empty()) remap[i] = static_cast<std::uint32_t>(j++);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (lg.adj[i].empty()) continue;
      const std::uint32_t ci = remap[i];
      compact.strength[ci] = lg.strength[i];
      for (const auto& [v, w] : lg.adj[i]) compact.adj[ci].emplace_back(remap[v], w);
    }
    lg = std::move(compact);
  }

  Rng rng(seed);
  std::vector<std::uint32_t> comm_of(connected.size());
  for (std::size_t i = 0; i < connected.size(); ++i) comm_of[i] = static_cast<std::uint32_t>(i);

  LevelGraph level = std::move(lg);
  for (;;) {
    std::vector<std::uint32_t> node_comm;
    const bool moved = louvain_one_level(level, rng, node_comm);
    if (!moved) break;
    LevelGraph next = aggregate(level, node_comm);
    for (auto& c : comm_of) c = node_comm[c];
    if (next.size() == level.size()) break;
    level = std::move(next);
  }

  const std::uint32_t num_comms =
      comm_of.empty() ? 0 : *std::max_element(comm_of.begin(), comm_of.end()) + 1;
  std::vector<std::vector<NodeId>> communities(num_comms);
  for (std::size_t i = 0; i < connected.size(); ++i) {
    communities[comm_of[i]].push_back(connected[i]);
  }
  for (const auto& community : communities) chunk_into_sets(community, max_set_size, plan.sets);
  if (!isolated.empty()) plan.sets.push_back(isolated);

  plan.validate(g, excluded);
  return plan;
}

PartitionPlan load_partition(const std::string& path, const GraphStore& g,
                             std::span<const NodeId> excluded) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open partition file: " + path);
  const auto excl = exclusion_mask(g, excluded);

  PartitionPlan plan;
  plan.mode = PartitionMode::kExternal;
  std::map<std::size_t, std::vector<NodeId>> by_index;
  std::vector<std::size_t> assigned(g.node_count(), std::numeric_limits<std::size_t>::max());

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string label, index_token, extra;
    if (!(ls >> label)) continue;
    if (label[0] == '#') continue;
    auto fail = [&](const std::string& what) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
    };
    if (!(ls >> index_token)) fail("expected \"node_label set_index\"");
    if (ls >> extra) fail("too many tokens");
    std::size_t set_index = 0;
    std::size_t used = 0;
    try {
      set_index = std::stoul(index_token, &used);
    } catch (const std::exception&) {
      fail("set index is not a non-negative integer: " + index_token);
    }
    if (used != index_token.size()) fail("set index is not a non-negative integer: " + index_token);

    const NodeId u = g.require_node(label);
    if (excl[u]) {
      ++plan.dropped_excluded;
      continue;
    }
    if (assigned[u] != std::numeric_limits<std::size_t>::max()) {
      if (assigned[u] != set_index) {
        fail("node " + label + " appears in two sets");
      }
      continue;
    }
    assigned[u] = set_index;
    by_index[set_index].push_back(u);
  }
  if (by_index.empty()) throw DataError(path + ": partition file assigns no nodes");
  for (auto& [index, nodes] : by_index) {
    std::sort(nodes.begin(), nodes.end());
    plan.sets.push_back(std::move(nodes));
  }
  plan.validate(g, excluded);
  return plan;
}

}  // namespace sepne
