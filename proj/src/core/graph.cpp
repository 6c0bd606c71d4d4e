#include "core/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "core/errors.hpp"

namespace sepne {

namespace {

// CSR over sorted, deduplicated pairs; pairs must be sorted by (src, dst).
void build_csr(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& pairs,
               std::vector<std::size_t>& ptr, std::vector<NodeId>& idx) {
  ptr.assign(n + 1, 0);
  idx.resize(pairs.size());
  for (const auto& p : pairs) ++ptr[p.first + 1];
  for (NodeId u = 0; u < n; ++u) ptr[u + 1] += ptr[u];
  std::size_t pos = 0;
  for (const auto& p : pairs) idx[pos++] = p.second;
}

std::vector<std::pair<NodeId, NodeId>> sorted_unique(std::vector<std::pair<NodeId, NodeId>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

}  // namespace

GraphStore GraphStore::build(NodeId node_count,
                             const std::vector<std::pair<NodeId, NodeId>>& pairs, bool directed,
                             std::vector<std::string> labels) {
  if (pairs.empty()) throw DataError("edge list is empty");
  GraphStore g;
  g.n_ = node_count;
  g.directed_ = directed;
  g.labels_ = std::move(labels);
  g.label_to_id_.reserve(g.labels_.size());
  for (NodeId u = 0; u < g.n_; ++u) g.label_to_id_.emplace(g.labels_[u], u);

  std::vector<std::pair<NodeId, NodeId>> kept;
  kept.reserve(pairs.size());
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(pairs.size() * 2);
  for (auto [u, v] : pairs) {
    if (u >= g.n_ || v >= g.n_) throw std::out_of_range("edge endpoint out of range");
    if (u == v) {
      ++g.dropped_self_loops_;
      continue;
    }
    NodeId a = u, b = v;
    if (!directed && a > b) std::swap(a, b);
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    if (!seen.insert(key).second) {
      ++g.duplicate_pairs_;
      continue;
    }
    kept.emplace_back(u, v);
  }
  if (kept.empty()) throw DataError("edge list has no usable edges after dropping self loops");

  if (directed) {
    build_csr(g.n_, sorted_unique(kept), g.out_ptr_, g.out_idx_);
    std::vector<std::pair<NodeId, NodeId>> rev;
    rev.reserve(kept.size());
    for (auto [u, v] : kept) rev.emplace_back(v, u);
    build_csr(g.n_, sorted_unique(rev), g.in_ptr_, g.in_idx_);
    std::vector<std::pair<NodeId, NodeId>> both = kept;
    both.reserve(kept.size() * 2);
    for (auto [u, v] : kept) both.emplace_back(v, u);
    build_csr(g.n_, sorted_unique(both), g.und_ptr_, g.und_idx_);
  } else {
    std::vector<std::pair<NodeId, NodeId>> both = kept;
    both.reserve(kept.size() * 2);
    for (auto [u, v] : kept) both.emplace_back(v, u);
    build_csr(g.n_, sorted_unique(both), g.out_ptr_, g.out_idx_);
  }
  return g;
}

GraphStore GraphStore::from_id_pairs(NodeId node_count,
                                     const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                     bool directed) {
  std::vector<std::string> labels(node_count);
  for (NodeId u = 0; u < node_count; ++u) labels[u] = std::to_string(u);
  return build(node_count, pairs, directed, std::move(labels));
}

GraphStore GraphStore::from_label_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs, bool directed) {
  std::unordered_map<std::string, NodeId> ids;
  ids.reserve(pairs.size() * 2);
  std::vector<std::string> labels;
  std::vector<std::pair<NodeId, NodeId>> id_pairs;
  id_pairs.reserve(pairs.size());
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = ids.emplace(label, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };
  for (const auto& [src, dst] : pairs) {
    const NodeId u = intern(src);
    const NodeId v = intern(dst);
    id_pairs.emplace_back(u, v);
  }
  const NodeId node_count = static_cast<NodeId>(labels.size());
  return build(node_count, id_pairs, directed, std::move(labels));
}

std::span<const NodeId> GraphStore::out_neighbors(NodeId u) const {
  check_node(u);
  return {out_idx_.data() + out_ptr_[u], out_ptr_[u + 1] - out_ptr_[u]};
}

std::span<const NodeId> GraphStore::in_neighbors(NodeId u) const {
  check_node(u);
  if (!directed_) return out_neighbors(u);
  return {in_idx_.data() + in_ptr_[u], in_ptr_[u + 1] - in_ptr_[u]};
}

std::span<const NodeId> GraphStore::undirected_neighbors(NodeId u) const {
  check_node(u);
  if (!directed_) return out_neighbors(u);
  return {und_idx_.data() + und_ptr_[u], und_ptr_[u + 1] - und_ptr_[u]};
}

std::uint32_t GraphStore::out_degree(NodeId u) const {
  check_node(u);
  return static_cast<std::uint32_t>(out_ptr_[u + 1] - out_ptr_[u]);
}

std::uint32_t GraphStore::in_degree(NodeId u) const {
  check_node(u);
  if (!directed_) return out_degree(u);
  return static_cast<std::uint32_t>(in_ptr_[u + 1] - in_ptr_[u]);
}

std::uint64_t GraphStore::total_degree(NodeId u) const {
  check_node(u);
  if (!directed_) return out_degree(u);
  return static_cast<std::uint64_t>(out_degree(u)) + in_degree(u);
}

std::uint64_t GraphStore::degree(NodeId u, DegreeMode mode) const {
  switch (mode) {
    case DegreeMode::kOut:
      return out_degree(u);
    case DegreeMode::kIn:
      return in_degree(u);
    case DegreeMode::kTotal:
      return total_degree(u);
  }
  throw std::invalid_argument("unknown degree mode");
}

const std::string& GraphStore::label_of(NodeId u) const {
  check_node(u);
  return labels_[u];
}

std::optional<NodeId> GraphStore::find_node(const std::string& label) const {
  auto it = label_to_id_.find(label);
  if (it == label_to_id_.end()) return std::nullopt;
  return it->second;
}

NodeId GraphStore::require_node(const std::string& label) const {
  auto id = find_node(label);
  if (!id) throw DataError("unknown node label: " + label);
  return *id;
}

void GraphStore::check_node(NodeId u) const {
  if (u >= n_) throw std::out_of_range("node id " + std::to_string(u) + " out of range");
}

GraphStore load_edge_list(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string src, dst, extra, trailing;
    if (!(ls >> src)) continue;
    if (src[0] == '#') continue;
    if (!(ls >> dst)) fail("expected two node tokens");
    if (ls >> extra) {
      if (ls >> trailing) fail("too many tokens");
      double w = 0.0;
      std::size_t used = 0;
      try {
        w = std::stod(extra, &used);
      } catch (const std::exception&) {
        fail("third token is not a number: " + extra);
      }
      if (used != extra.size()) fail("third token is not a number: " + extra);
      if (w != 1.0) fail("weighted edges are not supported (weight " + extra + ")");
    }
    pairs.emplace_back(std::move(src), std::move(dst));
  }
  if (pairs.empty()) throw DataError(path + ": edge list is empty");
  return GraphStore::from_label_pairs(pairs, directed);
}

}  // namespace sepne
