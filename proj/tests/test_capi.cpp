#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <sepne/sepne.h>

// Exercises the shared library through its C surface alone; nothing here may
// touch internal headers.

namespace {

namespace fs = std::filesystem;

struct Scratch {
  fs::path dir;

  explicit Scratch(const std::string& tag) {
    dir = fs::temp_directory_path() / ("sepne_capi_" + tag + "_" + std::to_string(getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    const auto p = path(name);
    std::ofstream out(p);
    REQUIRE(out);
    out << content;
    return p;
  }
};

// Ring over 12 nodes plus three chords; chord endpoints have degree 3.
std::string ring_edges() {
  std::string text;
  for (int u = 0; u < 12; ++u) {
    text += std::to_string(u) + " " + std::to_string((u + 1) % 12) + "\n";
  }
  text += "0 6\n2 8\n4 10\n";
  return text;
}

struct GraphGuard {
  sepne_graph* g = nullptr;
  ~GraphGuard() { sepne_graph_free(g); }
};
struct LandmarksGuard {
  sepne_landmarks* l = nullptr;
  ~LandmarksGuard() { sepne_landmarks_free(l); }
};
struct PartitionGuard {
  sepne_partition* p = nullptr;
  ~PartitionGuard() { sepne_partition_free(p); }
};
struct ResultGuard {
  sepne_result* r = nullptr;
  ~ResultGuard() { sepne_result_free(r); }
};

}  // namespace

TEST_CASE("params_init fills the documented defaults") {
  sepne_params p;
  sepne_params_init(&p);
  CHECK(p.d == 128);
  CHECK(p.k == 200);
  CHECK(p.lambda == doctest::Approx(0.4));
  CHECK(p.eta == doctest::Approx(0.1));
  CHECK(p.iters == 100);
  CHECK(p.second_order == 1);
  CHECK(p.early_stop == 0);
  CHECK(p.workers == 1);
  CHECK(p.best_effort == 0);
}

TEST_CASE("null arguments are reported without touching the out pointer") {
  auto* sentinel = reinterpret_cast<sepne_graph*>(0x1);
  sepne_graph* g = sentinel;
  CHECK(sepne_graph_load(nullptr, 0, 0, &g) == SEPNE_ERROR_INVALID_ARGUMENT);
  CHECK(g == sentinel);
  CHECK(std::string(sepne_last_error()) != "");
  CHECK(sepne_graph_load("x", 0, 0, nullptr) == SEPNE_ERROR_INVALID_ARGUMENT);

  CHECK(sepne_landmarks_select(nullptr, "dd", 2, 1, nullptr) == SEPNE_ERROR_INVALID_ARGUMENT);
  CHECK(sepne_embed(nullptr, nullptr, nullptr, nullptr, nullptr) ==
        SEPNE_ERROR_INVALID_ARGUMENT);
  CHECK(sepne_classify(nullptr, 0, nullptr, 0.5, 1, nullptr) == SEPNE_ERROR_INVALID_ARGUMENT);

  sepne_graph_free(nullptr);
  sepne_landmarks_free(nullptr);
  sepne_partition_free(nullptr);
  sepne_result_free(nullptr);
  CHECK(sepne_graph_node_count(nullptr) == 0);
  CHECK(sepne_result_rows(nullptr) == 0);
  CHECK(sepne_result_label(nullptr, 0) == nullptr);
}

TEST_CASE("unreadable input files surface as data errors") {
  sepne_graph* g = nullptr;
  CHECK(sepne_graph_load("/nonexistent/nowhere.edges", 0, 0, &g) == SEPNE_ERROR_DATA);
  CHECK(g == nullptr);
  CHECK(std::string(sepne_last_error()).find("nowhere.edges") != std::string::npos);
}

TEST_CASE("unknown landmark strategies are invalid arguments") {
  Scratch tmp("strategy");
  GraphGuard graph;
  REQUIRE(sepne_graph_load(tmp.write("g.edges", ring_edges()).c_str(), 0, 0, &graph.g) ==
          SEPNE_OK);
  LandmarksGuard lms;
  CHECK(sepne_landmarks_select(graph.g, "bogus", 2, 1, &lms.l) ==
        SEPNE_ERROR_INVALID_ARGUMENT);
  CHECK(lms.l == nullptr);
}

TEST_CASE("the embedding pipeline runs end to end through the C surface") {
  Scratch tmp("e2e");
  const auto edges = tmp.write("ring.edges", ring_edges());

  GraphGuard graph;
  REQUIRE(sepne_graph_load(edges.c_str(), 0, 0, &graph.g) == SEPNE_OK);
  CHECK(sepne_graph_node_count(graph.g) == 12);
  CHECK(sepne_graph_edge_count(graph.g) == 30);

  LandmarksGuard lms;
  REQUIRE(sepne_landmarks_select(graph.g, "dd", 4, 1, &lms.l) == SEPNE_OK);
  CHECK(sepne_landmarks_count(lms.l) == 4);

  PartitionGuard part;
  REQUIRE(sepne_partition_random(graph.g, lms.l, 2, 1, &part.p) == SEPNE_OK);
  CHECK(sepne_partition_set_count(part.p) == 2);
  CHECK(sepne_partition_node_count(part.p) == 8);
  CHECK(sepne_partition_dropped_count(part.p) == 0);

  sepne_params params;
  sepne_params_init(&params);
  params.d = 2;
  params.k = 4;
  params.iters = 15;
  ResultGuard res;
  REQUIRE(sepne_embed(graph.g, part.p, lms.l, &params, &res.r) == SEPNE_OK);
  CHECK(sepne_result_rows(res.r) == 12);
  CHECK(sepne_result_dim(res.r) == 2);
  CHECK(sepne_result_label(res.r, 0) != nullptr);
  CHECK(sepne_result_label(res.r, 12) == nullptr);
  CHECK(sepne_result_preparation_seconds(res.r) >= 0.0);
  CHECK(sepne_result_optimization_seconds(res.r) >= 0.0);

  double row[2] = {-9.0, -9.0};
  REQUIRE(sepne_result_vector(res.r, 0, row) == SEPNE_OK);
  CHECK((row[0] != -9.0 || row[1] != -9.0));
  REQUIRE(sepne_result_context_vector(res.r, 11, row) == SEPNE_OK);
  CHECK(sepne_result_vector(res.r, 12, row) == SEPNE_ERROR_INVALID_ARGUMENT);
  CHECK(sepne_result_vector(res.r, 0, nullptr) == SEPNE_ERROR_INVALID_ARGUMENT);

  const auto text_path = tmp.path("emb.txt");
  const auto bin_path = tmp.path("emb.bin");
  const auto manifest_path = tmp.path("run.json");
  REQUIRE(sepne_result_write_text(res.r, text_path.c_str(), 0) == SEPNE_OK);
  REQUIRE(sepne_result_write_binary(res.r, bin_path.c_str(), 1) == SEPNE_OK);
  REQUIRE(sepne_result_write_manifest(res.r, manifest_path.c_str()) == SEPNE_OK);

  std::ifstream manifest(manifest_path);
  REQUIRE(manifest);
  const auto j = nlohmann::json::parse(manifest);
  CHECK(j.at("command") == "embed");
  CHECK(j.at("input").at("nodes") == 12);
  CHECK(j.at("parameters").at("k") == 4);
  CHECK(j.at("parameters").at("d") == 2);
  CHECK(j.at("landmarks").at("strategy") == "dd");
  CHECK(j.at("partition").at("mode") == "random");
  CHECK(j.at("output").at("rows") == 12);
  CHECK(j.at("sections").size() == 2);

  // Every node carries a class; the split leaves both sides populated.
  std::string labels_text;
  for (int u = 0; u < 12; ++u) {
    labels_text += std::to_string(u) + (u % 2 == 0 ? " even\n" : " odd\n");
  }
  const auto labels = tmp.write("ring.labels", labels_text);
  double f1 = -1.0;
  REQUIRE(sepne_classify(text_path.c_str(), 0, labels.c_str(), 0.5, 3, &f1) == SEPNE_OK);
  CHECK(f1 >= 0.0);
  CHECK(f1 <= 1.0);
  double f1_bin = -1.0;
  // The binary file holds the context half; it still classifies.
  REQUIRE(sepne_classify(bin_path.c_str(), 1, labels.c_str(), 0.5, 3, &f1_bin) == SEPNE_OK);
  CHECK(f1_bin >= 0.0);
  CHECK(f1_bin <= 1.0);
}

TEST_CASE("landmark files round-trip through write and load") {
  Scratch tmp("lmio");
  GraphGuard graph;
  REQUIRE(sepne_graph_load(tmp.write("g.edges", ring_edges()).c_str(), 0, 0, &graph.g) ==
          SEPNE_OK);
  LandmarksGuard picked;
  REQUIRE(sepne_landmarks_select(graph.g, "uf", 5, 9, &picked.l) == SEPNE_OK);
  const auto path = tmp.path("landmarks.txt");
  REQUIRE(sepne_landmarks_write(graph.g, picked.l, path.c_str()) == SEPNE_OK);

  LandmarksGuard loaded;
  REQUIRE(sepne_landmarks_load(graph.g, path.c_str(), &loaded.l) == SEPNE_OK);
  CHECK(sepne_landmarks_count(loaded.l) == 5);
}

TEST_CASE("requested-node and explicit partitions load through the C surface") {
  Scratch tmp("parts");
  GraphGuard graph;
  REQUIRE(sepne_graph_load(tmp.write("g.edges", ring_edges()).c_str(), 0, 0, &graph.g) ==
          SEPNE_OK);
  LandmarksGuard lms;
  REQUIRE(sepne_landmarks_select(graph.g, "dd", 4, 1, &lms.l) == SEPNE_OK);

  // Landmarks under dd are 0,2,4,6 (first four of the degree-3 chord
  // endpoints), so requesting node 2 drops it from the sections.
  const auto requested = tmp.write("want.txt", "1\n3\n2\n");
  PartitionGuard interested;
  REQUIRE(sepne_partition_interested(graph.g, lms.l, requested.c_str(), 10, &interested.p) ==
          SEPNE_OK);
  CHECK(sepne_partition_node_count(interested.p) == 2);
  CHECK(sepne_partition_dropped_count(interested.p) == 1);

  const auto assignment = tmp.write("plan.txt", "1 0\n3 0\n5 1\n7 1\n9 1\n11 0\n");
  PartitionGuard loaded;
  REQUIRE(sepne_partition_load(graph.g, lms.l, assignment.c_str(), &loaded.p) == SEPNE_OK);
  CHECK(sepne_partition_set_count(loaded.p) == 2);
  CHECK(sepne_partition_node_count(loaded.p) == 6);

  PartitionGuard bad;
  CHECK(sepne_partition_load(graph.g, lms.l, tmp.write("bad.txt", "1 0\n1 1\n").c_str(),
                             &bad.p) == SEPNE_ERROR_DATA);
}

TEST_CASE("reconstruction evaluation orders the three methods sensibly") {
  Scratch tmp("eval");
  GraphGuard graph;
  REQUIRE(sepne_graph_load(tmp.write("g.edges", ring_edges()).c_str(), 0, 0, &graph.g) ==
          SEPNE_OK);
  sepne_params params;
  sepne_params_init(&params);
  params.d = 2;
  params.k = 4;
  params.iters = 30;

  double svd_all = 0.0, svd_nz = 0.0;
  REQUIRE(sepne_eval_reconstruction(graph.g, &params, "svd", "dd", 1, &svd_all, &svd_nz) ==
          SEPNE_OK);
  double nys_all = 0.0, nys_nz = 0.0;
  REQUIRE(sepne_eval_reconstruction(graph.g, &params, "nystrom", "dd", 1, &nys_all, &nys_nz) ==
          SEPNE_OK);
  double sep_all = 0.0, sep_nz = 0.0;
  REQUIRE(sepne_eval_reconstruction(graph.g, &params, "sepne", "dd", 1, &sep_all, &sep_nz) ==
          SEPNE_OK);

  // The dense oracle is the best rank-d reconstruction, so it bounds both
  // factored methods from above.
  CHECK(svd_all >= nys_all - 1e-9);
  CHECK(svd_all >= sep_all - 1e-9);
  CHECK(svd_all <= 1.0 + 1e-9);

  double x = 0.0, y = 0.0;
  CHECK(sepne_eval_reconstruction(graph.g, &params, "other", "dd", 1, &x, &y) ==
        SEPNE_ERROR_INVALID_ARGUMENT);
}
