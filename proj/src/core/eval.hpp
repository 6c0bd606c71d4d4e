#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/graph.hpp"
#include "core/landmark.hpp"
#include "core/proximity.hpp"
#include "core/smf.hpp"

namespace sepne {

struct ReconstructionReport {
  double r_all = 0.0;
  double r_nz = 0.0;
  double frobenius_residual = 0.0;
};

// Scores the reconstruction W^T C against m. w spans m's rows and c spans
// m's columns, one column per node. Both scores normalize by |M|_F^2; r_nz
// charges only residuals at non-zero entries of M. The reconstruction is
// materialized a block of rows at a time, never whole.
ReconstructionReport r_scores(const SparseBlock& m, const Eigen::MatrixXd& w,
                              const Eigen::MatrixXd& c);

// Landmark Nystrom baseline: M ~= C_blk pinv_d(W_core) R_blk with
// C_blk = M[:, L], W_core = M[L, L], R_blk = M[L, :], where pinv_d keeps the
// top d singular triples of the core. Scored through r_scores on the
// factored form.
ReconstructionReport nystrom_baseline(const SparseBlock& m, const LandmarkSet& landmarks,
                                      std::size_t d);

// Best rank-d reconstruction by dense SVD; refuses matrices beyond 20,000
// rows or columns.
ReconstructionReport svd_oracle(const SparseBlock& m, std::size_t d);

// Scores a pipeline's embedding table against a proximity matrix covering
// every embedded node: table rows are matched to m's node ordering by label.
ReconstructionReport reconstruction_of(const SparseBlock& m, const GraphStore& g,
                                       const EmbeddingTable& table);

// Labels resolved against an embedding table. Class ids are densified in
// first-seen file order; a node listed on several lines is multi-label.
struct LabelSet {
  std::vector<std::size_t> rows;               // embedding row per labeled node
  std::vector<std::vector<int>> node_classes;  // class ids per labeled node
  std::vector<std::string> class_names;
  bool multi_label = false;

  std::size_t size() const { return rows.size(); }
  std::size_t num_classes() const { return class_names.size(); }
};

// Parses "node_label class_id" lines ('#' comments, repeat lines for
// multi-label nodes) and resolves every node against the table.
LabelSet load_labels(const std::string& path, const EmbeddingTable& table);

// L2-normalizes embedding rows, trains logistic regression on a stratified
// train_fraction split (softmax for single-label data, one-vs-rest with a
// 0.5 threshold for multi-label), and returns test micro-F1 averaged over
// 10 seeded runs.
double classify(const EmbeddingTable& embeddings, const std::string& labels_path,
                double train_fraction, std::uint64_t seed);
double classify_with_labels(const EmbeddingTable& embeddings, const LabelSet& labels,
                            double train_fraction, std::uint64_t seed);

}  // namespace sepne
