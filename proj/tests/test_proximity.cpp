#include <doctest.h>

#include <vector>

#include <Eigen/Dense>

#include "core/graph.hpp"
#include "core/proximity.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using sepne::GraphStore;
using sepne::NodeId;
using sepne::ProximityConfig;
using sepne::ProximityOrder;

namespace {

ProximityConfig config_of(ProximityOrder order) {
  ProximityConfig cfg;
  cfg.order = order;
  return cfg;
}

}  // namespace

TEST_CASE("first order rows are identity plus the normalized adjacency") {
  auto g = GraphStore::from_id_pairs(3, {{0, 1}, {1, 2}}, false);  // path 0-1-2
  auto all = testutil::id_range(0, 3);
  auto block = sepne::proximity_block(g, config_of(ProximityOrder::kFirst), all, all);
  Eigen::MatrixXd m = block.to_dense();
  CHECK(m(0, 0) == doctest::Approx(1.0));
  CHECK(m(0, 1) == doctest::Approx(1.0));
  CHECK(m(1, 0) == doctest::Approx(0.5));
  CHECK(m(1, 2) == doctest::Approx(0.5));
  CHECK(m(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("second order on a path reaches two hops") {
  auto g = GraphStore::from_id_pairs(3, {{0, 1}, {1, 2}}, false);
  auto all = testutil::id_range(0, 3);
  auto block = sepne::proximity_block(g, config_of(ProximityOrder::kSecond), all, all);
  Eigen::MatrixXd m = block.to_dense();
  // One step 0->1 then half of 1's mass to 2.
  CHECK(m(0, 2) == doctest::Approx(0.5));
  CHECK(m(0, 0) == doctest::Approx(0.5));
  CHECK(m(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("dangling rows stay zero apart from the first-order diagonal") {
  auto g = GraphStore::from_id_pairs(3, {{0, 2}, {1, 2}}, true);  // node 2 is a sink
  auto all = testutil::id_range(0, 3);
  auto first = sepne::proximity_block(g, config_of(ProximityOrder::kFirst), all, all);
  Eigen::MatrixXd mf = first.to_dense();
  CHECK(mf(2, 2) == doctest::Approx(1.0));
  CHECK(mf.row(2).sum() == doctest::Approx(1.0));
  auto second = sepne::proximity_block(g, config_of(ProximityOrder::kSecond), all, all);
  CHECK(second.to_dense().row(2).norm() == doctest::Approx(0.0));
}

TEST_CASE("proximity blocks match the dense construction on random graphs") {
  sepne::Rng rng(99);
  for (const bool directed : {false, true}) {
    for (const auto order : {ProximityOrder::kFirst, ProximityOrder::kSecond}) {
      auto g = testutil::random_graph(rng, 30, 3, directed);
      const Eigen::MatrixXd full = oracle::proximity_dense(g, order);
      auto rows = testutil::sample_nodes(rng, 30, 12);
      auto cols = testutil::sample_nodes(rng, 30, 9);
      auto block = sepne::proximity_block(g, config_of(order), rows, cols);
      const Eigen::MatrixXd expected = oracle::submatrix(full, rows, cols);
      CHECK((block.to_dense() - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
      CHECK(block.squared_norm() == doctest::Approx(expected.squaredNorm()).epsilon(1e-9));
    }
  }
}

TEST_CASE("proximity rejects duplicate and out-of-range selections") {
  auto g = GraphStore::from_id_pairs(3, {{0, 1}, {1, 2}}, false);
  auto cfg = config_of(ProximityOrder::kFirst);
  std::vector<NodeId> dup = {0, 0};
  std::vector<NodeId> ok = {0, 1};
  std::vector<NodeId> big = {0, 9};
  CHECK_THROWS_AS((void)sepne::proximity_block(g, cfg, dup, ok), std::invalid_argument);
  CHECK_THROWS_AS((void)sepne::proximity_block(g, cfg, ok, big), std::out_of_range);
}

TEST_CASE("complement products equal dense products over the leftover nodes") {
  sepne::Rng rng(7);
  for (const auto order : {ProximityOrder::kFirst, ProximityOrder::kSecond}) {
    auto g = testutil::random_graph(rng, 28, 3, true);
    auto shuffled = testutil::sample_nodes(rng, 28, 28);
    std::vector<NodeId> landmarks(shuffled.begin(), shuffled.begin() + 6);
    std::vector<NodeId> section(shuffled.begin() + 6, shuffled.begin() + 14);
    auto products = sepne::complement_products(g, config_of(order), landmarks, section);

    const Eigen::MatrixXd full = oracle::proximity_dense(g, order);
    const auto rest = oracle::complement_of(28, landmarks, section);
    REQUIRE(rest.size() == 14);
    const Eigen::MatrixXd m_0c = oracle::submatrix(full, landmarks, rest);
    const Eigen::MatrixXd m_c0 = oracle::submatrix(full, rest, landmarks);
    const Eigen::MatrixXd m_ic = oracle::submatrix(full, section, rest);
    const Eigen::MatrixXd m_ci = oracle::submatrix(full, rest, section);

    CHECK((products.gram_row - m_0c * m_0c.transpose()).norm() <= 1e-10);
    CHECK((products.gram_col - m_c0.transpose() * m_c0).norm() <= 1e-10);
    CHECK((products.cross_row - m_0c * m_ic.transpose()).norm() <= 1e-10);
    CHECK((products.cross_col - m_c0.transpose() * m_ci).norm() <= 1e-10);
    CHECK(products.row_target_sqnorm == doctest::Approx(m_ic.squaredNorm()).epsilon(1e-10));
    CHECK(products.col_target_sqnorm == doctest::Approx(m_ci.squaredNorm()).epsilon(1e-10));
  }
}

TEST_CASE("complement products reject overlapping landmark and section sets") {
  auto g = GraphStore::from_id_pairs(4, {{0, 1}, {1, 2}, {2, 3}}, false);
  auto cfg = config_of(ProximityOrder::kFirst);
  std::vector<NodeId> landmarks = {0, 1};
  std::vector<NodeId> overlap = {1, 2};
  CHECK_THROWS_AS((void)sepne::complement_products(g, cfg, landmarks, overlap),
                  std::invalid_argument);
}

TEST_CASE("an empty complement yields zero products") {
  auto g = GraphStore::from_id_pairs(4, {{0, 1}, {1, 2}, {2, 3}}, false);
  auto cfg = config_of(ProximityOrder::kSecond);
  std::vector<NodeId> landmarks = {0, 1};
  std::vector<NodeId> section = {2, 3};
  auto products = sepne::complement_products(g, cfg, landmarks, section);
  CHECK(products.gram_row.norm() == 0.0);
  CHECK(products.gram_col.norm() == 0.0);
  CHECK(products.cross_row.norm() == 0.0);
  CHECK(products.cross_col.norm() == 0.0);
  CHECK(products.row_target_sqnorm == 0.0);
  CHECK(products.col_target_sqnorm == 0.0);
}
