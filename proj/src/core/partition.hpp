#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/graph.hpp"

namespace sepne {

enum class PartitionMode { kLouvain, kRandom, kInterestedOnly, kExternal };

const char* to_string(PartitionMode mode);

// Grouping of the nodes to embed beyond the excluded (landmark) set.
// Sets are pairwise disjoint, non-empty, and never contain excluded nodes.
struct PartitionPlan {
  PartitionMode mode = PartitionMode::kLouvain;
  std::uint64_t seed = 0;
  std::vector<std::vector<NodeId>> sets;
  // Requested or file-assigned nodes dropped because they are excluded; such
  // nodes are already served by the landmark embedding.
  std::size_t dropped_excluded = 0;

  std::size_t total_nodes() const;
  // Checks disjointness, non-emptiness, id range, and exclusion; louvain and
  // random plans must additionally cover all non-excluded nodes.
  void validate(const GraphStore& g, std::span<const NodeId> excluded) const;
};

// Seeded shuffle of the non-excluded nodes dealt round-robin into num_sets
// sets of near-equal size; nodes within a set are sorted by id.
PartitionPlan partition_random(const GraphStore& g, std::span<const NodeId> excluded,
                               std::size_t num_sets, std::uint64_t seed);

// Chunks requested-minus-excluded into sets of at most max_set_size nodes in
// sorted-id order. Unrequested nodes stay outside the plan; they still count
// toward the complement a section couples to.
PartitionPlan partition_interested(const GraphStore& g, std::span<const NodeId> excluded,
                                   std::span<const NodeId> requested, std::size_t max_set_size);

// Two-phase modularity maximization (local moves until no gain above 1e-7,
// then aggregation, repeated until stable) on the undirected deduplicated
// view of the graph restricted to non-excluded nodes. Oversized communities
// are chunked; nodes isolated within that view are gathered into one final
// set. A candidate subgraph without edges degrades to a single set with a
// warning.
PartitionPlan partition_louvain(const GraphStore& g, std::span<const NodeId> excluded,
                                std::uint64_t seed, std::size_t max_set_size);

// Reads lines of "node_label set_index" ('#' comments allowed), drops
// excluded nodes with a count, and validates the resulting plan. A node
// assigned to two different sets is an error.
PartitionPlan load_partition(const std::string& path, const GraphStore& g,
                             std::span<const NodeId> excluded);

}  // namespace sepne
