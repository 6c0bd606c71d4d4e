#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "core/graph.hpp"

namespace sepne {

// Proximity matrix built on the random-walk transition matrix T, where
// T[u][v] = 1/outdeg(u) for each edge (u, v) and rows of dangling nodes are
// zero. kFirst is I + T, kSecond is T + T^2.
enum class ProximityOrder { kFirst, kSecond };

struct ProximityConfig {
  ProximityOrder order = ProximityOrder::kSecond;
};

// Sparse block of the proximity matrix, CSR over block-local indices.
// rows/cols record the node behind each local index.
struct SparseBlock {
  std::vector<NodeId> rows, cols;
  std::vector<std::size_t> row_ptr;    // rows.size() + 1 offsets
  std::vector<std::uint32_t> col_idx;  // block-local, sorted within a row
  std::vector<double> values;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return cols.size(); }
  std::size_t nnz() const { return values.size(); }
  double squared_norm() const;
  Eigen::MatrixXd to_dense() const;
};

// Products against the complement blocks, accumulated column by column so
// the complement itself is never materialized. With landmark nodes L,
// section nodes S and complement C:
//   gram_row  = M[L,C] M[L,C]^T    (k x k)
//   cross_row = M[L,C] M[S,C]^T    (k x n_i)
//   gram_col  = M[C,L]^T M[C,L]    (k x k)
//   cross_col = M[C,L]^T M[C,S]    (k x n_i)
// plus the squared norms of M[S,C] and M[C,S] so residuals against those
// blocks can be evaluated exactly.
struct ComplementProducts {
  Eigen::MatrixXd gram_row, gram_col;
  Eigen::MatrixXd cross_row, cross_col;
  double row_target_sqnorm = 0.0;
  double col_target_sqnorm = 0.0;
};

// Sparse transition row T[node, :] as (neighbor, 1/outdeg) pairs sorted by
// neighbor id; empty for dangling nodes.
std::vector<std::pair<NodeId, double>> transition_row(const GraphStore& g, NodeId node);

// Extracts M[rows, cols]. Row and column node lists must be duplicate free.
SparseBlock proximity_block(const GraphStore& g, const ProximityConfig& cfg,
                            std::span<const NodeId> rows, std::span<const NodeId> cols);

// Streams over every node outside landmarks and section, expanding one
// sparse row and one sparse column of M per node. landmarks and section
// must be disjoint.
ComplementProducts complement_products(const GraphStore& g, const ProximityConfig& cfg,
                                       std::span<const NodeId> landmarks,
                                       std::span<const NodeId> section);

}  // namespace sepne
