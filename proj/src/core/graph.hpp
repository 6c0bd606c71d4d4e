#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sepne {

using NodeId = std::uint32_t;

enum class DegreeMode { kOut, kIn, kTotal };

// Immutable graph over contiguous internal ids with CSR adjacency.
// External node labels are remapped in first-seen order. Self loops are
// dropped and repeated edges are stored once; both are counted so loaders
// can report what was cleaned.
class GraphStore {
 public:
  GraphStore() = default;

  // pairs hold internal ids in [0, node_count). Labels default to the
  // decimal form of the id.
  static GraphStore from_id_pairs(NodeId node_count,
                                  const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                  bool directed);
  static GraphStore from_label_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                                     bool directed);

  NodeId node_count() const { return n_; }
  bool directed() const { return directed_; }
  // Stored directional links; an undirected edge contributes two.
  std::size_t link_count() const { return out_idx_.size(); }
  std::size_t edge_count() const { return directed_ ? link_count() : link_count() / 2; }
  std::size_t dropped_self_loops() const { return dropped_self_loops_; }
  std::size_t duplicate_pairs() const { return duplicate_pairs_; }

  std::span<const NodeId> out_neighbors(NodeId u) const;
  std::span<const NodeId> in_neighbors(NodeId u) const;
  // Union of out- and in-neighbors; equals out_neighbors on undirected graphs.
  std::span<const NodeId> undirected_neighbors(NodeId u) const;

  std::uint32_t out_degree(NodeId u) const;
  std::uint32_t in_degree(NodeId u) const;
  // Undirected graphs count each incident edge once; directed graphs sum
  // out- and in-degree.
  std::uint64_t total_degree(NodeId u) const;
  std::uint64_t degree(NodeId u, DegreeMode mode) const;

  const std::string& label_of(NodeId u) const;
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<NodeId> find_node(const std::string& label) const;
  // Throws DataError naming the label when absent.
  NodeId require_node(const std::string& label) const;

 private:
  static GraphStore build(NodeId node_count, const std::vector<std::pair<NodeId, NodeId>>& pairs,
                          bool directed, std::vector<std::string> labels);
  void check_node(NodeId u) const;

  NodeId n_ = 0;
  bool directed_ = false;
  std::size_t dropped_self_loops_ = 0;
  std::size_t duplicate_pairs_ = 0;
  std::vector<std::size_t> out_ptr_, in_ptr_, und_ptr_;
  std::vector<NodeId> out_idx_, in_idx_, und_idx_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> label_to_id_;
};

// Parses a whitespace-separated "src dst" edge list. Lines whose first
// non-space character is '#' and blank lines are skipped. An optional third
// token must equal 1; anything else is rejected as unsupported.
GraphStore load_edge_list(const std::string& path, bool directed);

}  // namespace sepne
