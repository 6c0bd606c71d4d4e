#include "sepne/sepne.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/eval.hpp"
#include "core/graph.hpp"
#include "core/io.hpp"
#include "core/landmark.hpp"
#include "core/partition.hpp"
#include "core/proximity.hpp"
#include "core/smf.hpp"

// Handles are plain structs around the library types, extended with the
// provenance (paths, flags, timings) the run manifest reports.

struct sepne_graph {
  sepne::GraphStore store;
  std::string path;
  bool directed = false;
  bool symmetrized = false;
};

struct sepne_landmarks {
  sepne::LandmarkSet set;
  std::string source_file;  // non-empty when loaded instead of selected
};

struct sepne_partition {
  sepne::PartitionPlan plan;
  std::size_t random_sets = 0;
  std::size_t max_set_size = 0;
  std::string requested_file;
  std::string partition_file;
};

struct sepne_result {
  sepne::PipelineResult pipeline;
  sepne::RunManifest manifest;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
sepne_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return SEPNE_OK;
  } catch (const sepne::DataError& e) {
    g_last_error = e.what();
    return SEPNE_ERROR_DATA;
  } catch (const sepne::NumericError& e) {
    g_last_error = e.what();
    return SEPNE_ERROR_NUMERIC;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return SEPNE_ERROR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    g_last_error = e.what();
    return SEPNE_ERROR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SEPNE_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SEPNE_ERROR_INTERNAL;
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

sepne::SmfConfig to_config(const sepne_params& p) {
  sepne::SmfConfig cfg;
  cfg.d = p.d;
  cfg.k = p.k;
  cfg.lambda = p.lambda;
  cfg.eta = p.eta;
  cfg.iters = p.iters;
  cfg.proximity.order =
      p.second_order ? sepne::ProximityOrder::kSecond : sepne::ProximityOrder::kFirst;
  cfg.early_stop = p.early_stop != 0;
  cfg.validate();
  return cfg;
}

std::vector<sepne::NodeId> all_nodes(const sepne::GraphStore& g) {
  std::vector<sepne::NodeId> nodes(g.node_count());
  for (sepne::NodeId u = 0; u < g.node_count(); ++u) nodes[u] = u;
  return nodes;
}

sepne_status copy_row(const sepne_result* result, size_t row, double* out, bool context) {
  return guarded([&] {
    require(result != nullptr, "result is null");
    require(out != nullptr, "out is null");
    require(row < result->pipeline.table.rows(), "row out of range");
    const Eigen::MatrixXd& mat =
        context ? result->pipeline.table.c : result->pipeline.table.w;
    for (Eigen::Index j = 0; j < mat.cols(); ++j) out[j] = mat(static_cast<Eigen::Index>(row), j);
  });
}

}  // namespace

extern "C" {

const char* sepne_last_error(void) { return g_last_error.c_str(); }

sepne_status sepne_graph_load(const char* path, int directed, int symmetrize,
                              sepne_graph** out) {
  return guarded([&] {
    require(path != nullptr, "path is null");
    require(out != nullptr, "out is null");
    auto handle = std::make_unique<sepne_graph>();
    bool as_directed = directed != 0 && symmetrize == 0;
    handle->store = sepne::load_edge_list(path, as_directed);
    handle->path = path;
    handle->directed = as_directed;
    handle->symmetrized = directed != 0 && symmetrize != 0;
    *out = handle.release();
  });
}

void sepne_graph_free(sepne_graph* graph) { delete graph; }

uint32_t sepne_graph_node_count(const sepne_graph* graph) {
  return graph ? graph->store.node_count() : 0;
}

uint64_t sepne_graph_edge_count(const sepne_graph* graph) {
  return graph ? graph->store.link_count() : 0;
}

sepne_status sepne_landmarks_select(const sepne_graph* graph, const char* strategy, size_t k,
                                    uint64_t seed, sepne_landmarks** out) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(strategy != nullptr, "strategy is null");
    require(out != nullptr, "out is null");
    auto handle = std::make_unique<sepne_landmarks>();
    handle->set = sepne::select_landmarks(
        graph->store, sepne::landmark_strategy_from_string(strategy), k, seed);
    *out = handle.release();
  });
}

sepne_status sepne_landmarks_load(const sepne_graph* graph, const char* path,
                                  sepne_landmarks** out) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(path != nullptr, "path is null");
    require(out != nullptr, "out is null");
    auto handle = std::make_unique<sepne_landmarks>();
    handle->set.nodes = sepne::read_node_list(path, graph->store);
    handle->source_file = path;
    *out = handle.release();
  });
}

sepne_status sepne_landmarks_write(const sepne_graph* graph, const sepne_landmarks* landmarks,
                                   const char* path) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(landmarks != nullptr, "landmarks is null");
    require(path != nullptr, "path is null");
    sepne::write_node_list(path, graph->store, landmarks->set.nodes);
  });
}

size_t sepne_landmarks_count(const sepne_landmarks* landmarks) {
  return landmarks ? landmarks->set.size() : 0;
}

void sepne_landmarks_free(sepne_landmarks* landmarks) { delete landmarks; }

sepne_status sepne_partition_louvain(const sepne_graph* graph, const sepne_landmarks* landmarks,
                                     uint64_t seed, size_t max_set_size, sepne_partition** out) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(landmarks != nullptr, "landmarks is null");
    require(out != nullptr, "out is null");
    auto handle = std::make_unique<sepne_partition>();
    handle->plan =
        sepne::partition_louvain(graph->store, landmarks->set.nodes, seed, max_set_size);
    handle->max_set_size = max_set_size;
    *out = handle.release();
  });
}

sepne_status sepne_partition_random(const sepne_graph* graph, const sepne_landmarks* landmarks,
                                    size_t num_sets, uint64_t seed, sepne_partition** out) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(landmarks != nullptr, "landmarks is null");
    require(out != nullptr, "out is null");
    auto handle = std::make_unique<sepne_partition>();
    handle->plan = sepne::partition_random(graph->store, landmarks->set.nodes, num_sets, seed);
    handle->random_sets = num_sets;
    *out = handle.release();
  });
}

sepne_status sepne_partition_interested(const sepne_graph* graph,
                                        const sepne_landmarks* landmarks,
                                        const char* requested_path, size_t max_set_size,
                                        sepne_partition** out) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(landmarks != nullptr, "landmarks is null");
    require(requested_path != nullptr, "requested_path is null");
    require(out != nullptr, "out is null");
    auto requested = sepne::read_node_list(requested_path, graph->store);
    auto handle = std::make_unique<sepne_partition>();
    handle->plan = sepne::partition_interested(graph->store, landmarks->set.nodes, requested,
                                               max_set_size);
    handle->max_set_size = max_set_size;
    handle->requested_file = requested_path;
    *out = handle.release();
  });
}

sepne_status sepne_partition_load(const sepne_graph* graph, const sepne_landmarks* landmarks,
                                  const char* path, sepne_partition** out) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(landmarks != nullptr, "landmarks is null");
    require(path != nullptr, "path is null");
    require(out != nullptr, "out is null");
    auto handle = std::make_unique<sepne_partition>();
    handle->plan = sepne::load_partition(path, graph->store, landmarks->set.nodes);
    handle->partition_file = path;
    *out = handle.release();
  });
}

size_t sepne_partition_set_count(const sepne_partition* partition) {
  return partition ? partition->plan.sets.size() : 0;
}

size_t sepne_partition_node_count(const sepne_partition* partition) {
  return partition ? partition->plan.total_nodes() : 0;
}

size_t sepne_partition_dropped_count(const sepne_partition* partition) {
  return partition ? partition->plan.dropped_excluded : 0;
}

void sepne_partition_free(sepne_partition* partition) { delete partition; }

void sepne_params_init(sepne_params* params) {
  if (!params) return;
  sepne::SmfConfig defaults;
  params->d = defaults.d;
  params->k = defaults.k;
  params->lambda = defaults.lambda;
  params->eta = defaults.eta;
  params->iters = defaults.iters;
  params->second_order = 1;
  params->early_stop = 0;
  params->workers = 1;
  params->best_effort = 0;
}

sepne_status sepne_embed(const sepne_graph* graph, const sepne_partition* partition,
                         const sepne_landmarks* landmarks, const sepne_params* params,
                         sepne_result** out) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(partition != nullptr, "partition is null");
    require(landmarks != nullptr, "landmarks is null");
    require(params != nullptr, "params is null");
    require(out != nullptr, "out is null");
    auto cfg = to_config(*params);
    sepne::PipelineOptions opts;
    opts.workers = params->workers == 0 ? 1 : params->workers;
    opts.best_effort = params->best_effort != 0;

    auto handle = std::make_unique<sepne_result>();
    handle->pipeline =
        sepne::run_pipeline(graph->store, partition->plan, landmarks->set, cfg, opts);

    sepne::RunManifest& m = handle->manifest;
    m.command = "embed";
    m.input_path = graph->path;
    m.directed = graph->directed;
    m.symmetrized = graph->symmetrized;
    m.nodes = graph->store.node_count();
    m.edges = graph->store.link_count();
    m.proximity_order =
        cfg.proximity.order == sepne::ProximityOrder::kSecond ? "second" : "first";
    m.k = cfg.k;
    m.d = cfg.d;
    m.lambda = cfg.lambda;
    m.eta = cfg.eta;
    m.iters = cfg.iters;
    m.early_stop = cfg.early_stop;
    m.landmark_strategy =
        landmarks->source_file.empty() ? to_string(landmarks->set.strategy) : "file";
    m.landmark_file = landmarks->source_file;
    m.seed = landmarks->set.seed;
    m.partition_mode = to_string(partition->plan.mode);
    m.random_sets = partition->random_sets;
    m.max_set_size = partition->max_set_size;
    m.requested_file = partition->requested_file;
    m.partition_file = partition->partition_file;
    m.dropped_excluded = partition->plan.dropped_excluded;
    m.workers = opts.workers;
    m.best_effort = opts.best_effort;
    m.preparation_seconds = handle->pipeline.landmark_seconds;
    m.optimization_seconds = handle->pipeline.optimization_seconds;
    m.output_rows = handle->pipeline.table.rows();
    m.zero_singular_values = handle->pipeline.zero_singular_values;
    m.null_landmark_columns = handle->pipeline.null_landmark_columns;
    m.sections = handle->pipeline.sections;
    *out = handle.release();
  });
}

size_t sepne_result_rows(const sepne_result* result) {
  return result ? result->pipeline.table.rows() : 0;
}

size_t sepne_result_dim(const sepne_result* result) {
  return result ? static_cast<size_t>(result->pipeline.table.w.cols()) : 0;
}

const char* sepne_result_label(const sepne_result* result, size_t row) {
  if (!result || row >= result->pipeline.table.rows()) return nullptr;
  return result->pipeline.table.labels[row].c_str();
}

sepne_status sepne_result_vector(const sepne_result* result, size_t row, double* out) {
  return copy_row(result, row, out, false);
}

sepne_status sepne_result_context_vector(const sepne_result* result, size_t row, double* out) {
  return copy_row(result, row, out, true);
}

double sepne_result_preparation_seconds(const sepne_result* result) {
  return result ? result->pipeline.landmark_seconds : 0.0;
}

double sepne_result_optimization_seconds(const sepne_result* result) {
  return result ? result->pipeline.optimization_seconds : 0.0;
}

sepne_status sepne_result_write_text(sepne_result* result, const char* path, int context) {
  return guarded([&] {
    require(result != nullptr, "result is null");
    require(path != nullptr, "path is null");
    sepne::write_embeddings_text(path, result->pipeline.table, context != 0);
    if (context != 0) {
      result->manifest.context_output_path = path;
    } else {
      result->manifest.output_path = path;
    }
    result->manifest.output_format = "text";
  });
}

sepne_status sepne_result_write_binary(sepne_result* result, const char* path, int context) {
  return guarded([&] {
    require(result != nullptr, "result is null");
    require(path != nullptr, "path is null");
    sepne::write_embeddings_binary(path, result->pipeline.table, context != 0);
    if (context != 0) {
      result->manifest.context_output_path = path;
    } else {
      result->manifest.output_path = path;
    }
    result->manifest.output_format = "binary";
  });
}

sepne_status sepne_result_write_manifest(const sepne_result* result, const char* path) {
  return guarded([&] {
    require(result != nullptr, "result is null");
    require(path != nullptr, "path is null");
    sepne::write_manifest(path, result->manifest);
  });
}

void sepne_result_free(sepne_result* result) { delete result; }

sepne_status sepne_eval_reconstruction(const sepne_graph* graph, const sepne_params* params,
                                       const char* method, const char* landmark_strategy,
                                       uint64_t seed, double* r_all, double* r_nz) {
  return guarded([&] {
    require(graph != nullptr, "graph is null");
    require(params != nullptr, "params is null");
    require(method != nullptr, "method is null");
    require(landmark_strategy != nullptr, "landmark_strategy is null");
    require(r_all != nullptr, "r_all is null");
    require(r_nz != nullptr, "r_nz is null");
    auto cfg = to_config(*params);
    const sepne::GraphStore& g = graph->store;
    auto nodes = all_nodes(g);
    auto m = sepne::proximity_block(g, cfg.proximity, nodes, nodes);

    sepne::ReconstructionReport report;
    std::string name = method;
    if (name == "svd") {
      report = sepne::svd_oracle(m, cfg.d);
    } else if (name == "nystrom") {
      auto lms = sepne::select_landmarks(
          g, sepne::landmark_strategy_from_string(landmark_strategy), cfg.k, seed);
      report = sepne::nystrom_baseline(m, lms, cfg.d);
    } else if (name == "sepne") {
      auto lms = sepne::select_landmarks(
          g, sepne::landmark_strategy_from_string(landmark_strategy), cfg.k, seed);
      std::size_t max_set_size = 10 * std::max<std::size_t>(cfg.k, 1);
      auto plan = sepne::partition_louvain(g, lms.nodes, seed, max_set_size);
      auto result = sepne::run_pipeline(g, plan, lms, cfg);
      report = sepne::reconstruction_of(m, g, result.table);
    } else {
      throw std::invalid_argument("unknown reconstruction method: " + name);
    }
    *r_all = report.r_all;
    *r_nz = report.r_nz;
  });
}

sepne_status sepne_classify(const char* embeddings_path, int binary_format,
                            const char* labels_path, double train_fraction, uint64_t seed,
                            double* micro_f1) {
  return guarded([&] {
    require(embeddings_path != nullptr, "embeddings_path is null");
    require(labels_path != nullptr, "labels_path is null");
    require(micro_f1 != nullptr, "micro_f1 is null");
    sepne::EmbeddingTable table = binary_format != 0
                                      ? sepne::read_embeddings_binary(embeddings_path)
                                      : sepne::read_embeddings_text(embeddings_path);
    *micro_f1 = sepne::classify(table, labels_path, train_fraction, seed);
  });
}

}  // extern "C"
