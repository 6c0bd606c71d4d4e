#include "core/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "core/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary embedding format assumes a little-endian host");

namespace sepne {

namespace {

constexpr char kMagic[6] = {'S', 'E', 'P', 'N', 'E', '\0'};
constexpr std::uint16_t kVersion = 1;

const Eigen::MatrixXd& pick_matrix(const EmbeddingTable& table, bool use_context) {
  const Eigen::MatrixXd& m = use_context ? table.c : table.w;
  if (static_cast<std::size_t>(m.rows()) != table.rows()) {
    throw std::invalid_argument(use_context ? "table has no context rows to write"
                                            : "table has no embedding rows to write");
  }
  return m;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_embeddings_text(const std::string& path, const EmbeddingTable& table,
                           bool use_context) {
  const Eigen::MatrixXd& m = pick_matrix(table, use_context);
  std::ofstream out = open_out(path, false);
  out << table.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << table.labels[r];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.6g", m(static_cast<Eigen::Index>(r), j));
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

EmbeddingTable read_embeddings_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty embeddings file");
  std::istringstream header(line);
  std::size_t rows = 0, dim = 0;
  if (!(header >> rows >> dim)) throw DataError(path + ":1: expected \"rows dim\" header");

  EmbeddingTable table;
  table.labels.reserve(rows);
  table.w.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  std::size_t r = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string label;
    if (!(ls >> label)) continue;
    if (r >= rows) throw DataError(path + ": more rows than the header announced");
    table.labels.push_back(label);
    for (std::size_t j = 0; j < dim; ++j) {
      double v = 0.0;
      if (!(ls >> v)) {
        throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values");
      }
      table.w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
    }
    std::string extra;
    if (ls >> extra) {
      throw DataError(path + ":" + std::to_string(line_no) + ": trailing token " + extra);
    }
    ++r;
  }
  if (r != rows) {
    throw DataError(path + ": header announced " + std::to_string(rows) + " rows, found " +
                    std::to_string(r));
  }
  return table;
}

void write_embeddings_binary(const std::string& path, const EmbeddingTable& table,
                             bool use_context) {
  const Eigen::MatrixXd& m = pick_matrix(table, use_context);
  std::ofstream out = open_out(path, true);
  const auto rows = static_cast<std::uint32_t>(table.rows());
  const auto dim = static_cast<std::uint32_t>(m.cols());
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));

  std::vector<float> row(dim);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t j = 0; j < dim; ++j) {
      row[j] = static_cast<float>(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(float) * dim));
  }
  for (std::uint32_t r = 0; r < rows; ++r) {
    const auto len = static_cast<std::uint32_t>(table.labels[r].size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(table.labels[r].data(), len);
  }
  if (!out) throw DataError("write failed: " + path);
}

EmbeddingTable read_embeddings_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings file: " + path);
  char magic[6];
  std::uint16_t version = 0;
  std::uint32_t rows = 0, dim = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path + ": not a binary embeddings file");
  }
  if (version != kVersion) {
    throw DataError(path + ": unsupported format version " + std::to_string(version));
  }

  EmbeddingTable table;
  table.w.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  std::vector<float> row(dim);
  for (std::uint32_t r = 0; r < rows; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(float) * dim));
    if (!in) throw DataError(path + ": truncated matrix data");
    for (std::uint32_t j = 0; j < dim; ++j) {
      table.w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  table.labels.reserve(rows);
  for (std::uint32_t r = 0; r < rows; ++r) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string label(len, '\0');
    in.read(label.data(), len);
    if (!in) throw DataError(path + ": truncated label table");
    table.labels.push_back(std::move(label));
  }
  return table;
}

std::vector<NodeId> read_node_list(const std::string& path, const GraphStore& g) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open node list: " + path);
  std::vector<NodeId> nodes;
  std::unordered_set<NodeId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string label, extra;
    if (!(ls >> label)) continue;
    if (label[0] == '#') continue;
    if (ls >> extra) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected one label per line");
    }
    const NodeId u = g.require_node(label);
    if (!seen.insert(u).second) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate node " + label);
    }
    nodes.push_back(u);
  }
  if (nodes.empty()) throw DataError(path + ": node list is empty");
  return nodes;
}

void write_node_list(const std::string& path, const GraphStore& g,
                     std::span<const NodeId> nodes) {
  std::ofstream out = open_out(path, false);
  for (const NodeId u : nodes) out << g.label_of(u) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["input"] = {{"path", m.input_path},
                {"directed", m.directed},
                {"symmetrized", m.symmetrized},
                {"nodes", m.nodes},
                {"edges", m.edges}};
  j["parameters"] = {{"order", m.proximity_order},
                     {"k", m.k},
                     {"d", m.d},
                     {"lambda", m.lambda},
                     {"eta", m.eta},
                     {"iters", m.iters},
                     {"early_stop", m.early_stop},
                     {"seed", m.seed},
                     {"workers", m.workers},
                     {"best_effort", m.best_effort}};
  j["landmarks"] = {{"strategy", m.landmark_strategy}, {"file", m.landmark_file}};
  j["partition"] = {{"mode", m.partition_mode},
                    {"random_sets", m.random_sets},
                    {"max_set_size", m.max_set_size},
                    {"requested_file", m.requested_file},
                    {"partition_file", m.partition_file},
                    {"dropped_excluded", m.dropped_excluded}};
  j["timings"] = {{"preparation_seconds", m.preparation_seconds},
                  {"optimization_seconds", m.optimization_seconds}};
  j["output"] = {{"rows", m.output_rows},
                 {"path", m.output_path},
                 {"context_path", m.context_output_path},
                 {"format", m.output_format}};
  j["diagnostics"] = {{"zero_singular_values", m.zero_singular_values},
                      {"null_landmark_columns", m.null_landmark_columns}};
  nlohmann::ordered_json sections = nlohmann::ordered_json::array();
  for (const SectionReport& s : m.sections) {
    sections.push_back({{"index", s.set_index},
                        {"size", s.size},
                        {"iterations", s.iterations_run},
                        {"seconds", s.seconds},
                        {"loss_initial", s.initial_loss},
                        {"loss_final", s.final_loss},
                        {"loss_local", s.losses.local},
                        {"loss_landmark", s.losses.landmark},
                        {"loss_global", s.losses.global},
                        {"loss_ridge", s.losses.ridge},
                        {"failed", s.failed},
                        {"error", s.error}});
  }
  j["sections"] = std::move(sections);

  std::ofstream out = open_out(path, false);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace sepne
