#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "core/errors.hpp"
#include "core/graph.hpp"
#include "core/partition.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using sepne::GraphStore;
using sepne::NodeId;
using sepne::PartitionMode;
using sepne::PartitionPlan;

namespace {

std::vector<NodeId> flatten_sorted(const PartitionPlan& plan) {
  std::vector<NodeId> all;
  for (const auto& set : plan.sets) all.insert(all.end(), set.begin(), set.end());
  std::sort(all.begin(), all.end());
  return all;
}

// Canonical form: each set sorted, sets ordered by smallest member.
std::vector<std::vector<NodeId>> canonical(std::vector<std::vector<NodeId>> sets) {
  for (auto& s : sets) std::sort(s.begin(), s.end());
  std::sort(sets.begin(), sets.end());
  return sets;
}

// All ways to assign n nodes to unlabeled groups (restricted growth strings).
void enumerate_partitions(std::uint32_t n, std::vector<int>& assign, int groups,
                          const std::function<void(const std::vector<int>&)>& visit) {
  if (assign.size() == n) {
    visit(assign);
    return;
  }
  for (int c = 0; c <= groups; ++c) {
    assign.push_back(c);
    enumerate_partitions(n, assign, std::max(groups, c + 1), visit);
    assign.pop_back();
  }
}

}  // namespace

TEST_CASE("random partition deals shuffled candidates into near-equal sorted sets") {
  auto g = GraphStore::from_id_pairs(11, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6},
                                          {6, 7}, {7, 8}, {8, 9}, {9, 10}},
                                     false);
  std::vector<NodeId> excl = {5};
  auto plan = sepne::partition_random(g, excl, 3, 42);
  CHECK(plan.mode == PartitionMode::kRandom);
  REQUIRE(plan.sets.size() == 3);
  std::vector<std::size_t> sizes;
  for (const auto& s : plan.sets) {
    sizes.push_back(s.size());
    CHECK(std::is_sorted(s.begin(), s.end()));
  }
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{3, 3, 4});
  CHECK(flatten_sorted(plan) == std::vector<NodeId>{0, 1, 2, 3, 4, 6, 7, 8, 9, 10});
}

TEST_CASE("random partition is deterministic per seed") {
  sepne::Rng rng(12);
  auto g = testutil::random_graph(rng, 30, 3, false);
  std::vector<NodeId> excl = {2, 9};
  auto a = sepne::partition_random(g, excl, 4, 7);
  auto b = sepne::partition_random(g, excl, 4, 7);
  CHECK(a.sets == b.sets);
  auto c = sepne::partition_random(g, excl, 4, 8);
  CHECK(a.sets != c.sets);
}

TEST_CASE("random partition with one set covers every candidate") {
  sepne::Rng rng(5);
  auto g = testutil::random_graph(rng, 12, 2, false);
  std::vector<NodeId> excl = {0};
  auto plan = sepne::partition_random(g, excl, 1, 1);
  REQUIRE(plan.sets.size() == 1);
  CHECK(plan.sets[0].size() == 11);
}

TEST_CASE("random partition rejects zero sets and more sets than candidates") {
  auto g = GraphStore::from_id_pairs(4, {{0, 1}, {1, 2}, {2, 3}}, false);
  std::vector<NodeId> excl = {0};
  CHECK_THROWS_AS((void)sepne::partition_random(g, excl, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)sepne::partition_random(g, excl, 4, 1), std::invalid_argument);
}

TEST_CASE("louvain recovers the best two-triangle split found by enumeration") {
  std::vector<std::pair<NodeId, NodeId>> edges = {{0, 1}, {1, 2}, {0, 2}, {3, 4},
                                                  {4, 5}, {3, 5}, {2, 3}};
  auto g = GraphStore::from_id_pairs(6, edges, false);

  double best_q = -1.0;
  std::vector<int> best_assign;
  std::vector<int> assign;
  enumerate_partitions(6, assign, 0, [&](const std::vector<int>& a) {
    const double q = oracle::modularity(6, edges, a);
    if (q > best_q) {
      best_q = q;
      best_assign = a;
    }
  });
  std::vector<std::vector<NodeId>> best_sets;
  for (NodeId u = 0; u < 6; ++u) {
    const auto c = static_cast<std::size_t>(best_assign[u]);
    if (best_sets.size() <= c) best_sets.resize(c + 1);
    best_sets[c].push_back(u);
  }

  auto plan = sepne::partition_louvain(g, {}, 1, 100);
  CHECK(plan.mode == PartitionMode::kLouvain);
  CHECK(canonical(plan.sets) == canonical(best_sets));

  std::vector<int> louvain_assign(6, 0);
  for (std::size_t s = 0; s < plan.sets.size(); ++s) {
    for (const NodeId u : plan.sets[s]) louvain_assign[u] = static_cast<int>(s);
  }
  CHECK(oracle::modularity(6, edges, louvain_assign) == doctest::Approx(best_q));
}

TEST_CASE("louvain keeps a lone triangle together") {
  auto g = GraphStore::from_id_pairs(3, {{0, 1}, {1, 2}, {2, 0}}, false);
  auto plan = sepne::partition_louvain(g, {}, 1, 100);
  REQUIRE(plan.sets.size() == 1);
  CHECK(plan.sets[0] == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("louvain chunks oversized communities") {
  // A 12-clique is one community; max_set_size forces even chunks.
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < 12; ++u) {
    for (NodeId v = u + 1; v < 12; ++v) edges.emplace_back(u, v);
  }
  auto g = GraphStore::from_id_pairs(12, edges, false);
  auto plan = sepne::partition_louvain(g, {}, 1, 5);
  CHECK(plan.total_nodes() == 12);
  CHECK(plan.sets.size() >= 3);
  for (const auto& s : plan.sets) CHECK(s.size() <= 5);
}

TEST_CASE("nodes isolated among candidates are gathered into one final set") {
  // 4's only edge reaches the excluded node 0, so within the candidate view
  // it is isolated.
  auto g = GraphStore::from_id_pairs(5, {{1, 2}, {2, 3}, {1, 3}, {0, 4}}, false);
  std::vector<NodeId> excl = {0};
  auto plan = sepne::partition_louvain(g, excl, 1, 100);
  REQUIRE(plan.sets.size() == 2);
  CHECK(plan.sets[0] == std::vector<NodeId>{1, 2, 3});
  CHECK(plan.sets[1] == std::vector<NodeId>{4});
}

TEST_CASE("louvain degrades to a single set when candidates share no edges") {
  auto g = GraphStore::from_id_pairs(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, false);
  std::vector<NodeId> excl = {0};
  auto plan = sepne::partition_louvain(g, excl, 1, 100);
  REQUIRE(plan.sets.size() == 1);
  CHECK(plan.sets[0] == std::vector<NodeId>{1, 2, 3, 4});
}

TEST_CASE("louvain covers every candidate exactly once on random graphs") {
  sepne::Rng rng(31);
  for (int round = 0; round < 5; ++round) {
    auto g = testutil::random_graph(rng, 60, 4, false);
    auto excl = testutil::sample_nodes(rng, 60, 8);
    auto plan = sepne::partition_louvain(g, excl, static_cast<std::uint64_t>(round), 15);
    for (const auto& s : plan.sets) {
      CHECK(!s.empty());
      CHECK(s.size() <= 15);
    }
    auto all = flatten_sorted(plan);
    CHECK(all.size() == 52);
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    for (const NodeId u : excl) {
      CHECK(!std::binary_search(all.begin(), all.end(), u));
    }
  }
}

TEST_CASE("interested-only keeps requested nodes, drops landmarks, and chunks") {
  auto g = GraphStore::from_id_pairs(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6},
                                          {6, 7}, {7, 8}, {8, 9}},
                                     false);
  std::vector<NodeId> excl = {3, 4};
  std::vector<NodeId> requested = {9, 3, 1, 7, 5, 4};
  auto plan = sepne::partition_interested(g, excl, requested, 3);
  CHECK(plan.mode == PartitionMode::kInterestedOnly);
  CHECK(plan.dropped_excluded == 2);
  REQUIRE(plan.sets.size() == 2);
  CHECK(plan.sets[0] == std::vector<NodeId>{1, 5, 7});
  CHECK(plan.sets[1] == std::vector<NodeId>{9});
}

TEST_CASE("interested-only rejects a request made of landmarks only") {
  auto g = GraphStore::from_id_pairs(3, {{0, 1}, {1, 2}}, false);
  std::vector<NodeId> excl = {0, 1};
  std::vector<NodeId> requested = {0, 1};
  CHECK_THROWS_AS((void)sepne::partition_interested(g, excl, requested, 5), sepne::DataError);
}

TEST_CASE("partition files load by set index with landmark drops counted") {
  auto g = GraphStore::from_id_pairs(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, false);
  testutil::ScratchDir tmp("partition");
  auto path = tmp.write("plan.txt",
                        "# node set\n"
                        "1 1\n"
                        "2 0\n"
                        "3 1\n"
                        "3 1\n"
                        "0 7\n"
                        "4 0\n");
  std::vector<NodeId> excl = {0};
  auto plan = sepne::load_partition(path, g, excl);
  CHECK(plan.mode == PartitionMode::kExternal);
  CHECK(plan.dropped_excluded == 1);
  REQUIRE(plan.sets.size() == 2);
  CHECK(plan.sets[0] == std::vector<NodeId>{2, 4});
  CHECK(plan.sets[1] == std::vector<NodeId>{1, 3});
}

TEST_CASE("partition files with conflicting assignments are rejected") {
  auto g = GraphStore::from_id_pairs(3, {{0, 1}, {1, 2}}, false);
  testutil::ScratchDir tmp("partition_bad");
  std::vector<NodeId> none;
  CHECK_THROWS_AS((void)sepne::load_partition(tmp.write("conflict", "0 0\n0 1\n"), g, none),
                  sepne::DataError);
  CHECK_THROWS_AS((void)sepne::load_partition(tmp.write("badindex", "0 x\n"), g, none),
                  sepne::DataError);
  CHECK_THROWS_AS((void)sepne::load_partition(tmp.write("unknown", "zz 0\n"), g, none),
                  sepne::DataError);
  CHECK_THROWS_AS((void)sepne::load_partition(tmp.write("empty", "# nothing\n"), g, none),
                  sepne::DataError);
  CHECK_THROWS_AS((void)sepne::load_partition(tmp.path("missing"), g, none), sepne::DataError);
}

TEST_CASE("plan validation catches malformed hand-built plans") {
  auto g = GraphStore::from_id_pairs(4, {{0, 1}, {1, 2}, {2, 3}}, false);
  std::vector<NodeId> excl = {0};

  PartitionPlan twice;
  twice.mode = PartitionMode::kExternal;
  twice.sets = {{1, 2}, {2, 3}};
  CHECK_THROWS_AS(twice.validate(g, excl), std::invalid_argument);

  PartitionPlan has_landmark;
  has_landmark.mode = PartitionMode::kExternal;
  has_landmark.sets = {{0, 1}, {2, 3}};
  CHECK_THROWS_AS(has_landmark.validate(g, excl), std::invalid_argument);

  PartitionPlan empty_set;
  empty_set.mode = PartitionMode::kExternal;
  empty_set.sets = {{1}, {}};
  CHECK_THROWS_AS(empty_set.validate(g, excl), std::invalid_argument);

  PartitionPlan out_of_range;
  out_of_range.mode = PartitionMode::kExternal;
  out_of_range.sets = {{1, 9}};
  CHECK_THROWS_AS(out_of_range.validate(g, excl), std::out_of_range);

  PartitionPlan incomplete;
  incomplete.mode = PartitionMode::kLouvain;
  incomplete.sets = {{1, 2}};
  CHECK_THROWS_AS(incomplete.validate(g, excl), std::invalid_argument);

  PartitionPlan partial_ok;
  partial_ok.mode = PartitionMode::kExternal;
  partial_ok.sets = {{1, 2}};
  CHECK_NOTHROW(partial_ok.validate(g, excl));
}
