#pragma once

// Shared helpers for building test fixtures: seeded random graphs, dense
// views, and scratch files that clean up after themselves.

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "core/graph.hpp"
#include "core/proximity.hpp"
#include "core/rng.hpp"

namespace testutil {

// Random simple graph: every node gets avg_deg outgoing picks (self loops
// and duplicates collapse inside GraphStore). A spanning chain keeps it
// connected so transition rows are rarely dangling.
inline sepne::GraphStore random_graph(sepne::Rng& rng, std::uint32_t n, std::uint32_t avg_deg,
                                      bool directed, bool chain = true) {
  std::vector<std::pair<sepne::NodeId, sepne::NodeId>> pairs;
  if (chain) {
    for (std::uint32_t u = 0; u + 1 < n; ++u) pairs.emplace_back(u, u + 1);
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t t = 0; t < avg_deg; ++t) {
      auto v = static_cast<sepne::NodeId>(rng.uniform_index(n));
      if (v != u) pairs.emplace_back(u, v);
    }
  }
  return sepne::GraphStore::from_id_pairs(n, pairs, directed);
}

inline std::vector<sepne::NodeId> id_range(sepne::NodeId first, sepne::NodeId count) {
  std::vector<sepne::NodeId> ids(count);
  for (sepne::NodeId i = 0; i < count; ++i) ids[i] = first + i;
  return ids;
}

// Draws `count` distinct node ids from [0, n).
inline std::vector<sepne::NodeId> sample_nodes(sepne::Rng& rng, sepne::NodeId n,
                                               std::size_t count) {
  std::vector<sepne::NodeId> all = id_range(0, n);
  rng.shuffle(all);
  all.resize(count);
  return all;
}

// Wraps a dense matrix as a fully materialized SparseBlock over the given
// node lists; zero entries are kept out of the pattern.
inline sepne::SparseBlock sparse_from_dense(std::vector<sepne::NodeId> rows,
                                            std::vector<sepne::NodeId> cols,
                                            const Eigen::MatrixXd& dense) {
  sepne::SparseBlock block;
  block.rows = std::move(rows);
  block.cols = std::move(cols);
  block.row_ptr.assign(1, 0);
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        block.col_idx.push_back(static_cast<std::uint32_t>(j));
        block.values.push_back(dense(i, j));
      }
    }
    block.row_ptr.push_back(block.col_idx.size());
  }
  return block;
}

inline Eigen::MatrixXd random_matrix(sepne::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = 2.0 * rng.uniform_real() - 1.0;
  }
  return m;
}

// Temporary directory removed when the fixture goes out of scope.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("sepne_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    auto p = path(name);
    std::ofstream out(p);
    out << content;
    return p;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace testutil
