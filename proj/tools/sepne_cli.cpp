// Command-line front end. Everything goes through the public C interface so
// this binary doubles as its reference consumer.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sepne/sepne.h"

namespace {

[[noreturn]] void fail(sepne_status status) {
  std::cerr << "sepne: " << sepne_last_error() << "\n";
  int code = static_cast<int>(status);
  std::exit(code > 3 ? 3 : code);
}

void check(sepne_status status) {
  if (status != SEPNE_OK) fail(status);
}

[[noreturn]] void usage_error(const std::string& message) {
  std::cerr << "sepne: " << message << "\n";
  std::exit(1);
}

struct GraphDeleter {
  void operator()(sepne_graph* g) const { sepne_graph_free(g); }
};
struct LandmarksDeleter {
  void operator()(sepne_landmarks* l) const { sepne_landmarks_free(l); }
};
struct PartitionDeleter {
  void operator()(sepne_partition* p) const { sepne_partition_free(p); }
};
struct ResultDeleter {
  void operator()(sepne_result* r) const { sepne_result_free(r); }
};

using GraphPtr = std::unique_ptr<sepne_graph, GraphDeleter>;
using LandmarksPtr = std::unique_ptr<sepne_landmarks, LandmarksDeleter>;
using PartitionPtr = std::unique_ptr<sepne_partition, PartitionDeleter>;
using ResultPtr = std::unique_ptr<sepne_result, ResultDeleter>;

GraphPtr load_graph(const std::string& path, bool directed, bool symmetrize) {
  sepne_graph* g = nullptr;
  check(sepne_graph_load(path.c_str(), directed ? 1 : 0, symmetrize ? 1 : 0, &g));
  return GraphPtr(g);
}

std::string path_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = name.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Shared graph and factorization flags.
struct CommonOptions {
  std::string input;
  bool directed = false;
  bool symmetrize = false;
  std::string order = "second";
  std::size_t k = 200;
  std::size_t d = 128;
  double lambda = 0.4;
  double eta = 0.1;
  std::size_t iters = 100;
  std::uint64_t seed = 1;
  std::string landmark_strategy = "dd";
};

void add_graph_flags(CLI::App& cmd, CommonOptions& opt) {
  cmd.add_option("--input", opt.input, "edge list file (\"src dst\" per line)")->required();
  cmd.add_flag("--directed", opt.directed, "treat edges as directed");
  cmd.add_flag("--symmetrize", opt.symmetrize,
               "force an undirected view of a directed edge list");
  cmd.add_option("--order", opt.order, "proximity order")
      ->check(CLI::IsMember({"first", "second"}))
      ->capture_default_str();
}

void add_model_flags(CLI::App& cmd, CommonOptions& opt, bool with_k = true) {
  if (with_k) cmd.add_option("--k", opt.k, "landmark count")->capture_default_str();
  cmd.add_option("--d", opt.d, "embedding dimension")->capture_default_str();
  cmd.add_option("--lambda", opt.lambda, "weight of the complement-coupling terms")
      ->capture_default_str();
  cmd.add_option("--eta", opt.eta, "ridge weight")->capture_default_str();
  cmd.add_option("--iters", opt.iters, "alternating iterations per set")->capture_default_str();
  cmd.add_option("--seed", opt.seed, "seed for every random choice")->capture_default_str();
  cmd.add_option("--landmarks", opt.landmark_strategy, "landmark selection strategy")
      ->check(CLI::IsMember({"dd", "dp", "uf", "gds"}))
      ->capture_default_str();
}

sepne_params params_from(const CommonOptions& opt) {
  sepne_params params;
  sepne_params_init(&params);
  params.d = opt.d;
  params.k = opt.k;
  params.lambda = opt.lambda;
  params.eta = opt.eta;
  params.iters = opt.iters;
  params.second_order = opt.order == "second" ? 1 : 0;
  return params;
}

struct EmbedOptions {
  CommonOptions common;
  bool early_stop = false;
  std::string partition_mode = "louvain";
  std::size_t num_sets = 8;
  std::size_t max_set_size = 0;
  std::string landmark_file;
  std::string export_landmarks;
  std::string requested_file;
  std::string partition_file;
  std::size_t workers = 0;
  bool best_effort = false;
  std::string output = "embeddings.txt";
  std::string format = "text";
  std::string context_output;
  std::string manifest;
};

int run_embed(EmbedOptions& opt) {
  if (opt.partition_mode == "io" && opt.requested_file.empty()) {
    usage_error("--partition io requires --requested");
  }
  if (opt.partition_mode == "external" && opt.partition_file.empty()) {
    usage_error("--partition external requires --partition-file");
  }

  auto graph = load_graph(opt.common.input, opt.common.directed, opt.common.symmetrize);
  std::printf("loaded %s: %" PRIu32 " nodes, %" PRIu64 " links\n", opt.common.input.c_str(),
              sepne_graph_node_count(graph.get()), sepne_graph_edge_count(graph.get()));

  sepne_params params = params_from(opt.common);
  params.early_stop = opt.early_stop ? 1 : 0;
  params.workers = opt.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                    : opt.workers;
  params.best_effort = opt.best_effort ? 1 : 0;

  // GDS is meant for the tight-budget regime k = d; its degree-skewed picks
  // can leave the first-order landmark block rank-deficient otherwise.
  std::string strategy = opt.common.landmark_strategy;
  if (strategy == "gds" && opt.common.order == "first" && params.k != params.d) {
    std::cerr << "sepne: warning: gds with first-order proximity and k != d; "
                 "falling back to dd\n";
    strategy = "dd";
  }

  LandmarksPtr landmarks;
  if (!opt.landmark_file.empty()) {
    sepne_landmarks* lm = nullptr;
    check(sepne_landmarks_load(graph.get(), opt.landmark_file.c_str(), &lm));
    landmarks.reset(lm);
    std::printf("landmarks: %zu loaded from %s\n", sepne_landmarks_count(lm),
                opt.landmark_file.c_str());
  } else {
    sepne_landmarks* lm = nullptr;
    check(sepne_landmarks_select(graph.get(), strategy.c_str(), params.k, opt.common.seed, &lm));
    landmarks.reset(lm);
    std::printf("landmarks: %zu selected (%s)\n", sepne_landmarks_count(lm), strategy.c_str());
  }
  if (sepne_landmarks_count(landmarks.get()) != params.k) {
    params.k = sepne_landmarks_count(landmarks.get());
    std::printf("landmark count adjusted to k=%zu\n", params.k);
  }
  if (!opt.export_landmarks.empty()) {
    check(sepne_landmarks_write(graph.get(), landmarks.get(), opt.export_landmarks.c_str()));
  }

  std::size_t max_set_size = opt.max_set_size == 0 ? 10 * params.k : opt.max_set_size;
  PartitionPtr partition;
  {
    sepne_partition* p = nullptr;
    if (opt.partition_mode == "louvain") {
      check(sepne_partition_louvain(graph.get(), landmarks.get(), opt.common.seed, max_set_size,
                                    &p));
    } else if (opt.partition_mode == "random") {
      check(sepne_partition_random(graph.get(), landmarks.get(), opt.num_sets, opt.common.seed,
                                   &p));
    } else if (opt.partition_mode == "io") {
      check(sepne_partition_interested(graph.get(), landmarks.get(), opt.requested_file.c_str(),
                                       max_set_size, &p));
    } else {
      check(sepne_partition_load(graph.get(), landmarks.get(), opt.partition_file.c_str(), &p));
    }
    partition.reset(p);
  }
  std::printf("partition: %s, %zu sets covering %zu nodes\n", opt.partition_mode.c_str(),
              sepne_partition_set_count(partition.get()),
              sepne_partition_node_count(partition.get()));
  if (sepne_partition_dropped_count(partition.get()) > 0) {
    std::printf("dropped %zu landmark nodes from the partition request\n",
                sepne_partition_dropped_count(partition.get()));
  }

  ResultPtr result;
  {
    sepne_result* r = nullptr;
    check(sepne_embed(graph.get(), partition.get(), landmarks.get(), &params, &r));
    result.reset(r);
  }

  bool binary = opt.format == "binary";
  if (binary) {
    check(sepne_result_write_binary(result.get(), opt.output.c_str(), 0));
  } else {
    check(sepne_result_write_text(result.get(), opt.output.c_str(), 0));
  }
  if (!opt.context_output.empty()) {
    if (binary) {
      check(sepne_result_write_binary(result.get(), opt.context_output.c_str(), 1));
    } else {
      check(sepne_result_write_text(result.get(), opt.context_output.c_str(), 1));
    }
  }
  if (!opt.manifest.empty()) {
    check(sepne_result_write_manifest(result.get(), opt.manifest.c_str()));
  }

  std::printf("wrote %zu x %zu embeddings to %s\n", sepne_result_rows(result.get()),
              sepne_result_dim(result.get()), opt.output.c_str());
  std::printf("preparation: %.3fs  optimization: %.3fs\n",
              sepne_result_preparation_seconds(result.get()),
              sepne_result_optimization_seconds(result.get()));
  return 0;
}

struct EvalOptions {
  CommonOptions common;
  std::vector<std::size_t> k_sweep;
  std::string metric = "r_all";
  std::string dataset;
  std::string output;
};

int run_eval(EvalOptions& opt) {
  auto graph = load_graph(opt.common.input, opt.common.directed, opt.common.symmetrize);
  std::string dataset = opt.dataset.empty() ? path_stem(opt.common.input) : opt.dataset;

  std::ostringstream csv;
  csv << "dataset,method,k,d,metric,value\n";
  bool have_svd = false;
  double svd_all = 0.0, svd_nz = 0.0;
  for (std::size_t k : opt.k_sweep) {
    sepne_params params = params_from(opt.common);
    params.k = k;
    for (const char* method : {"sepne", "nystrom", "svd"}) {
      double r_all = 0.0, r_nz = 0.0;
      if (std::string(method) == "svd") {
        // The rank-d oracle ignores k; score it once per graph.
        if (!have_svd) {
          check(sepne_eval_reconstruction(graph.get(), &params, method,
                                          opt.common.landmark_strategy.c_str(), opt.common.seed,
                                          &svd_all, &svd_nz));
          have_svd = true;
        }
        r_all = svd_all;
        r_nz = svd_nz;
      } else {
        check(sepne_eval_reconstruction(graph.get(), &params, method,
                                        opt.common.landmark_strategy.c_str(), opt.common.seed,
                                        &r_all, &r_nz));
      }
      double value = opt.metric == "r_nz" ? r_nz : r_all;
      csv << dataset << ',' << method << ',' << k << ',' << params.d << ',' << opt.metric << ','
          << format_value(value) << '\n';
    }
  }

  if (opt.output.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(opt.output);
    if (!out) usage_error("cannot open " + opt.output + " for writing");
    out << csv.str();
    std::printf("wrote %zu rows to %s\n", opt.k_sweep.size() * 3, opt.output.c_str());
  }
  return 0;
}

struct ClassifyOptions {
  std::string embeddings;
  bool binary = false;
  std::string labels;
  std::vector<double> fractions{0.9};
  std::uint64_t seed = 1;
  std::string dataset;
  std::string method = "sepne";
  std::size_t k = 0;
  std::size_t d = 0;
  std::string output;
};

int run_classify(ClassifyOptions& opt) {
  std::string dataset = opt.dataset.empty() ? path_stem(opt.embeddings) : opt.dataset;

  std::ostringstream csv;
  csv << "dataset,method,k,d,metric,value\n";
  for (double fraction : opt.fractions) {
    double micro_f1 = 0.0;
    check(sepne_classify(opt.embeddings.c_str(), opt.binary ? 1 : 0, opt.labels.c_str(),
                         fraction, opt.seed, &micro_f1));
    char metric[32];
    std::snprintf(metric, sizeof(metric), "micro_f1@%.2f", fraction);
    csv << dataset << ',' << opt.method << ',' << opt.k << ',' << opt.d << ',' << metric << ','
        << format_value(micro_f1) << '\n';
  }

  if (opt.output.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(opt.output);
    if (!out) usage_error("cannot open " + opt.output + " for writing");
    out << csv.str();
    std::printf("wrote %zu rows to %s\n", opt.fractions.size(), opt.output.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"separated factorization network embeddings"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file mirroring the flags");

  EmbedOptions embed;
  CLI::App* cmd_embed = app.add_subcommand("embed", "embed a graph and write the result");
  add_graph_flags(*cmd_embed, embed.common);
  add_model_flags(*cmd_embed, embed.common);
  cmd_embed->add_flag("--early-stop", embed.early_stop,
                      "stop a set when the loss stops improving");
  cmd_embed->add_option("--partition", embed.partition_mode, "how to group non-landmark nodes")
      ->check(CLI::IsMember({"louvain", "random", "io", "external"}))
      ->capture_default_str();
  cmd_embed->add_option("--s", embed.num_sets, "set count for --partition random")
      ->capture_default_str();
  cmd_embed->add_option("--max-set-size", embed.max_set_size,
                        "chunk larger communities (0 means 10*k)");
  cmd_embed->add_option("--landmark-file", embed.landmark_file,
                        "use these nodes as landmarks instead of selecting");
  cmd_embed->add_option("--export-landmarks", embed.export_landmarks,
                        "write the landmark node list here");
  cmd_embed->add_option("--requested", embed.requested_file,
                        "nodes to embed with --partition io, one per line");
  cmd_embed->add_option("--partition-file", embed.partition_file,
                        "node-to-set assignment for --partition external");
  cmd_embed->add_option("--workers", embed.workers, "concurrent sets (0 means all cores)");
  cmd_embed->add_flag("--best-effort", embed.best_effort,
                      "drop failing sets instead of aborting");
  cmd_embed->add_option("--output", embed.output, "embedding file")->capture_default_str();
  cmd_embed->add_option("--format", embed.format, "output format")
      ->check(CLI::IsMember({"text", "binary"}))
      ->capture_default_str();
  cmd_embed->add_option("--context-output", embed.context_output,
                        "also write the context vectors here");
  cmd_embed->add_option("--manifest", embed.manifest, "write a JSON run manifest here");

  EvalOptions eval;
  CLI::App* cmd_eval = app.add_subcommand(
      "eval-reconstruct", "score proximity reconstruction against baselines");
  add_graph_flags(*cmd_eval, eval.common);
  add_model_flags(*cmd_eval, eval.common, false);
  cmd_eval->add_option("--k", eval.k_sweep, "landmark counts to sweep (repeat or comma-list)")
      ->delimiter(',')
      ->required();
  cmd_eval->add_option("--metric", eval.metric, "which score fills the value column")
      ->check(CLI::IsMember({"r_all", "r_nz"}))
      ->capture_default_str();
  cmd_eval->add_option("--dataset", eval.dataset, "dataset column (default: input stem)");
  cmd_eval->add_option("--output", eval.output, "CSV file (default: stdout)");

  ClassifyOptions classify;
  CLI::App* cmd_classify =
      app.add_subcommand("classify", "node classification micro-F1 from an embedding file");
  cmd_classify->add_option("--embeddings", classify.embeddings, "embedding file")->required();
  cmd_classify->add_flag("--binary", classify.binary, "embedding file is binary");
  cmd_classify->add_option("--labels", classify.labels, "\"node class\" lines")->required();
  cmd_classify
      ->add_option("--fraction", classify.fractions, "train fractions (repeat or comma-list)")
      ->delimiter(',')
      ->capture_default_str();
  cmd_classify->add_option("--seed", classify.seed, "seed for splits and training")
      ->capture_default_str();
  cmd_classify->add_option("--dataset", classify.dataset,
                           "dataset column (default: embeddings stem)");
  cmd_classify->add_option("--method", classify.method, "method column")->capture_default_str();
  cmd_classify->add_option("--k", classify.k, "k column");
  cmd_classify->add_option("--d", classify.d, "d column");
  cmd_classify->add_option("--output", classify.output, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (cmd_embed->parsed()) return run_embed(embed);
  if (cmd_eval->parsed()) return run_eval(eval);
  return run_classify(classify);
}
