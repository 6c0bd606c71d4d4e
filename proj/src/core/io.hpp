#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/smf.hpp"

namespace sepne {

// word2vec-style text: a "rows dim" header line, then one row per node as
// "label v1 ... vdim" with 6 significant digits. use_context selects the
// context half of the table instead of the embedding half.
void write_embeddings_text(const std::string& path, const EmbeddingTable& table,
                           bool use_context);
EmbeddingTable read_embeddings_text(const std::string& path);

// Binary layout: 16-byte header ("SEPNE\0", uint16 version, uint32 rows,
// uint32 dim, little-endian), float32 row-major matrix, then a label table
// of uint32-length-prefixed strings.
void write_embeddings_binary(const std::string& path, const EmbeddingTable& table,
                             bool use_context);
EmbeddingTable read_embeddings_binary(const std::string& path);

// One node label per line, '#' comments; labels must be distinct and known.
std::vector<NodeId> read_node_list(const std::string& path, const GraphStore& g);
void write_node_list(const std::string& path, const GraphStore& g,
                     std::span<const NodeId> nodes);

// Everything needed to reproduce a run: resolved inputs, parameters, seeds,
// stage timings, and per-section outcomes. Serialized as JSON.
struct RunManifest {
  std::string command;
  std::string input_path;
  bool directed = false;
  bool symmetrized = false;
  std::size_t nodes = 0;
  std::size_t edges = 0;

  std::string proximity_order;  // "first" or "second"
  std::size_t k = 0;
  std::size_t d = 0;
  double lambda = 0.0;
  double eta = 0.0;
  std::size_t iters = 0;
  bool early_stop = false;

  std::string landmark_strategy;
  std::string landmark_file;
  std::uint64_t seed = 0;
  std::string partition_mode;
  std::size_t random_sets = 0;
  std::size_t max_set_size = 0;
  std::string requested_file;
  std::string partition_file;
  std::size_t dropped_excluded = 0;

  std::size_t workers = 0;
  bool best_effort = false;

  double preparation_seconds = 0.0;
  double optimization_seconds = 0.0;
  std::size_t output_rows = 0;
  std::size_t zero_singular_values = 0;
  std::size_t null_landmark_columns = 0;
  std::vector<SectionReport> sections;

  std::string output_path;
  std::string context_output_path;
  std::string output_format;  // "text" or "binary"
};

void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace sepne
