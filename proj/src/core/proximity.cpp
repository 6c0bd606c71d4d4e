#include "core/proximity.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace sepne {

namespace {

constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();

// Dense accumulator with a touched list; expands one sparse row or column
// of M at a time and is reusable across calls.
class ProximityExpander {
 public:
  ProximityExpander(const GraphStore& g, ProximityOrder order)
      : g_(g), order_(order), used_(g.node_count(), 0), val_(g.node_count(), 0.0) {
    touched_.reserve(256);
  }

  const std::vector<NodeId>& expand_row(NodeId j) {
    clear();
    if (order_ == ProximityOrder::kFirst) {
      add(j, 1.0);
      add_transition_row(j, 1.0);
    } else {
      add_transition_row(j, 1.0);
      const auto out = g_.out_neighbors(j);
      if (!out.empty()) {
        const double wj = 1.0 / static_cast<double>(out.size());
        for (NodeId l : out) add_transition_row(l, wj);
      }
    }
    return touched_;
  }

  const std::vector<NodeId>& expand_col(NodeId j) {
    clear();
    if (order_ == ProximityOrder::kFirst) {
      add(j, 1.0);
      add_transition_col(j, 1.0);
    } else {
      add_transition_col(j, 1.0);
      for (NodeId l : g_.in_neighbors(j)) {
        const double wl = 1.0 / static_cast<double>(g_.out_degree(l));
        add_transition_col(l, wl);
      }
    }
    return touched_;
  }

  double value_at(NodeId i) const { return val_[i]; }

 private:
  void add(NodeId i, double v) {
    if (!used_[i]) {
      used_[i] = 1;
      touched_.push_back(i);
    }
    val_[i] += v;
  }

  // scale * T[r, :]
  void add_transition_row(NodeId r, double scale) {
    const auto out = g_.out_neighbors(r);
    if (out.empty()) return;
    const double w = scale / static_cast<double>(out.size());
    for (NodeId v : out) add(v, w);
  }

  // scale * T[:, c]
  void add_transition_col(NodeId c, double scale) {
    for (NodeId u : g_.in_neighbors(c)) {
      add(u, scale / static_cast<double>(g_.out_degree(u)));
    }
  }

  void clear() {
    for (NodeId i : touched_) {
      used_[i] = 0;
      val_[i] = 0.0;
    }
    touched_.clear();
  }

  const GraphStore& g_;
  ProximityOrder order_;
  std::vector<char> used_;
  std::vector<double> val_;
  std::vector<NodeId> touched_;
};

// Maps node id -> block-local slot, rejecting duplicates.
std::vector<std::uint32_t> make_slots(const GraphStore& g, std::span<const NodeId> nodes,
                                      const char* what) {
  std::vector<std::uint32_t> slot(g.node_count(), kNoSlot);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeId u = nodes[i];
    if (u >= g.node_count()) throw std::out_of_range(std::string(what) + " node id out of range");
    if (slot[u] != kNoSlot) throw std::invalid_argument(std::string(what) + " list has duplicates");
    slot[u] = static_cast<std::uint32_t>(i);
  }
  return slot;
}

}  // namespace

double SparseBlock::squared_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

Eigen::MatrixXd SparseBlock::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows()),
                                            static_cast<Eigen::Index>(n_cols()));
  for (std::size_t r = 0; r < n_rows(); ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      d(static_cast<Eigen::Index>(r), col_idx[p]) = values[p];
    }
  }
  return d;
}

std::vector<std::pair<NodeId, double>> transition_row(const GraphStore& g, NodeId node) {
  const auto out = g.out_neighbors(node);
  std::vector<std::pair<NodeId, double>> row;
  row.reserve(out.size());
  if (out.empty()) return row;
  const double w = 1.0 / static_cast<double>(out.size());
  for (NodeId v : out) row.emplace_back(v, w);
  return row;
}

SparseBlock proximity_block(const GraphStore& g, const ProximityConfig& cfg,
                            std::span<const NodeId> rows, std::span<const NodeId> cols) {
  const auto col_slot = make_slots(g, cols, "column");
  make_slots(g, rows, "row");

  SparseBlock block;
  block.rows.assign(rows.begin(), rows.end());
  block.cols.assign(cols.begin(), cols.end());
  block.row_ptr.assign(rows.size() + 1, 0);

  ProximityExpander expander(g, cfg.order);
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    entries.clear();
    for (NodeId node : expander.expand_row(rows[r])) {
      const std::uint32_t c = col_slot[node];
      if (c != kNoSlot) entries.emplace_back(c, expander.value_at(node));
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [c, v] : entries) {
      block.col_idx.push_back(c);
      block.values.push_back(v);
    }
    block.row_ptr[r + 1] = block.values.size();
  }
  return block;
}

ComplementProducts complement_products(const GraphStore& g, const ProximityConfig& cfg,
                                       std::span<const NodeId> landmarks,
                                       std::span<const NodeId> section) {
  const NodeId n = g.node_count();
  const auto k = static_cast<Eigen::Index>(landmarks.size());
  const auto ni = static_cast<Eigen::Index>(section.size());

  // role: 0 complement, 1 landmark, 2 section; slot holds the local index.
  std::vector<char> role(n, 0);
  std::vector<std::uint32_t> slot(n, kNoSlot);
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const NodeId u = landmarks[i];
    if (u >= n) throw std::out_of_range("landmark node id out of range");
    if (role[u]) throw std::invalid_argument("landmark list has duplicates");
    role[u] = 1;
    slot[u] = static_cast<std::uint32_t>(i);
  }
  for (std::size_t i = 0; i < section.size(); ++i) {
    const NodeId u = section[i];
    if (u >= n) throw std::out_of_range("section node id out of range");
    if (role[u]) {
      throw std::invalid_argument(role[u] == 1 ? "section node is also a landmark"
                                               : "section list has duplicates");
    }
    role[u] = 2;
    slot[u] = static_cast<std::uint32_t>(i);
  }

  ComplementProducts out;
  out.gram_row = Eigen::MatrixXd::Zero(k, k);
  out.gram_col = Eigen::MatrixXd::Zero(k, k);
  out.cross_row = Eigen::MatrixXd::Zero(k, ni);
  out.cross_col = Eigen::MatrixXd::Zero(k, ni);

  ProximityExpander expander(g, cfg.order);
  std::vector<std::pair<std::uint32_t, double>> lm_part, sec_part;
  auto split = [&](const std::vector<NodeId>& touched) {
    lm_part.clear();
    sec_part.clear();
    for (NodeId node : touched) {
      if (!role[node]) continue;
      const double v = expander.value_at(node);
      if (role[node] == 1) {
        lm_part.emplace_back(slot[node], v);
      } else {
        sec_part.emplace_back(slot[node], v);
      }
    }
  };

  for (NodeId j = 0; j < n; ++j) {
    if (role[j]) continue;

    // Column M[:, j] restricted to landmark and section rows feeds the
    // products over M[L,C] and M[S,C].
    split(expander.expand_col(j));
    for (const auto& [a, va] : lm_part) {
      for (const auto& [b, vb] : lm_part) out.gram_row(a, b) += va * vb;
      for (const auto& [s, vs] : sec_part) out.cross_row(a, s) += va * vs;
    }
    for (const auto& [s, vs] : sec_part) out.row_target_sqnorm += vs * vs;

    // Row M[j, :] restricted to landmark and section columns feeds the
    // products over M[C,L] and M[C,S].
    split(expander.expand_row(j));
    for (const auto& [a, va] : lm_part) {
      for (const auto& [b, vb] : lm_part) out.gram_col(a, b) += va * vb;
      for (const auto& [s, vs] : sec_part) out.cross_col(a, s) += va * vs;
    }
    for (const auto& [s, vs] : sec_part) out.col_target_sqnorm += vs * vs;
  }

  out.gram_row = (0.5 * (out.gram_row + out.gram_row.transpose())).eval();
  out.gram_col = (0.5 * (out.gram_col + out.gram_col.transpose())).eval();
  return out;
}

}  // namespace sepne
