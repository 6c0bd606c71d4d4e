#include "core/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/svd.hpp"

namespace sepne {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::size_t kScoreBlockRows = 256;
constexpr std::size_t kDenseGuard = 20000;

std::vector<std::size_t> positions_of(const std::vector<NodeId>& ordering,
                                      const std::vector<NodeId>& wanted, const char* what) {
  std::unordered_map<NodeId, std::size_t> index;
  index.reserve(ordering.size());
  for (std::size_t i = 0; i < ordering.size(); ++i) index.emplace(ordering[i], i);
  std::vector<std::size_t> out;
  out.reserve(wanted.size());
  for (const NodeId u : wanted) {
    const auto it = index.find(u);
    if (it == index.end()) {
      throw std::invalid_argument(std::string(what) + " node missing from the scored matrix");
    }
    out.push_back(it->second);
  }
  return out;
}

// Rank-limited factors (w, c) with recon = w^T c from an SVD, keeping at
// most want singular triples and none at numerical zero.
std::pair<MatrixXd, MatrixXd> svd_factors(const ThinSvd& svd, std::size_t want) {
  const VectorXd& sv = svd.s;
  const double tol = static_cast<double>(std::max(svd.u.rows(), svd.v.rows())) *
                     std::numeric_limits<double>::epsilon() * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  const Eigen::Index keep = std::min<Eigen::Index>(rank, static_cast<Eigen::Index>(want));
  const VectorXd scale = sv.head(keep).array().sqrt();
  MatrixXd w = (svd.u.leftCols(keep) * scale.asDiagonal()).transpose();
  MatrixXd c = (svd.v.leftCols(keep) * scale.asDiagonal()).transpose();
  return {std::move(w), std::move(c)};
}

}  // namespace

ReconstructionReport r_scores(const SparseBlock& m, const MatrixXd& w, const MatrixXd& c) {
  if (w.cols() != static_cast<Eigen::Index>(m.n_rows()) ||
      c.cols() != static_cast<Eigen::Index>(m.n_cols()) || w.rows() != c.rows()) {
    throw std::invalid_argument("factor shapes disagree with the scored matrix");
  }
  const double m_sq = m.squared_norm();
  if (m_sq == 0.0) throw std::invalid_argument("scored matrix has no non-zero entries");

  double all_resid = 0.0;
  double nz_resid = 0.0;
  for (std::size_t r0 = 0; r0 < m.n_rows(); r0 += kScoreBlockRows) {
    const std::size_t nb = std::min(kScoreBlockRows, m.n_rows() - r0);
    const MatrixXd recon =
        w.middleCols(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(nb)).transpose() * c;
    all_resid += recon.squaredNorm();
    for (std::size_t r = 0; r < nb; ++r) {
      const std::size_t row = r0 + r;
      for (std::size_t p = m.row_ptr[row]; p < m.row_ptr[row + 1]; ++p) {
        const double rec = recon(static_cast<Eigen::Index>(r), m.col_idx[p]);
        const double diff = rec - m.values[p];
        all_resid += diff * diff - rec * rec;
        nz_resid += diff * diff;
      }
    }
  }
  ReconstructionReport report;
  report.r_all = 1.0 - all_resid / m_sq;
  report.r_nz = 1.0 - nz_resid / m_sq;
  report.frobenius_residual = std::sqrt(std::max(0.0, all_resid));
  return report;
}

ReconstructionReport nystrom_baseline(const SparseBlock& m, const LandmarkSet& landmarks,
                                      std::size_t d) {
  const std::size_t k = landmarks.size();
  if (k == 0) throw std::invalid_argument("landmark set is empty");
  if (k < d) throw std::invalid_argument("landmark count must be at least d");
  const auto row_pos = positions_of(m.rows, landmarks.nodes, "landmark");
  const auto col_pos = positions_of(m.cols, landmarks.nodes, "landmark");

  // Column slot -> landmark index, for splitting rows as they stream by.
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> col_slot(m.n_cols(), kNone);
  for (std::size_t j = 0; j < k; ++j) col_slot[col_pos[j]] = static_cast<std::uint32_t>(j);

  MatrixXd core = MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  MatrixXd r_blk = MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                  static_cast<Eigen::Index>(m.n_cols()));
  MatrixXd c_blk = MatrixXd::Zero(static_cast<Eigen::Index>(m.n_rows()),
                                  static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t row = row_pos[j];
    for (std::size_t p = m.row_ptr[row]; p < m.row_ptr[row + 1]; ++p) {
      r_blk(static_cast<Eigen::Index>(j), m.col_idx[p]) = m.values[p];
      if (col_slot[m.col_idx[p]] != kNone) {
        core(static_cast<Eigen::Index>(j), col_slot[m.col_idx[p]]) = m.values[p];
      }
    }
  }
  for (std::size_t row = 0; row < m.n_rows(); ++row) {
    for (std::size_t p = m.row_ptr[row]; p < m.row_ptr[row + 1]; ++p) {
      if (col_slot[m.col_idx[p]] != kNone) {
        c_blk(static_cast<Eigen::Index>(row), col_slot[m.col_idx[p]]) = m.values[p];
      }
    }
  }

  const ThinSvd svd = thin_svd(core);
  const VectorXd& sv = svd.s;
  const double tol = static_cast<double>(k) * std::numeric_limits<double>::epsilon() *
                     (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  if (rank == 0) throw NumericError("landmark core block has rank zero");
  const Eigen::Index keep = std::min<Eigen::Index>(rank, static_cast<Eigen::Index>(d));

  // M~ = c_blk V S^-1 U^T r_blk, split symmetrically around S^-1/2.
  const VectorXd inv_sqrt = sv.head(keep).array().sqrt().inverse();
  const MatrixXd w_fac = (c_blk * svd.v.leftCols(keep) * inv_sqrt.asDiagonal()).transpose();
  const MatrixXd c_fac = inv_sqrt.asDiagonal() * svd.u.leftCols(keep).transpose() * r_blk;
  return r_scores(m, w_fac, c_fac);
}

ReconstructionReport svd_oracle(const SparseBlock& m, std::size_t d) {
  if (m.n_rows() > kDenseGuard || m.n_cols() > kDenseGuard) {
    throw std::invalid_argument(
        "matrix too large to densify for the exact rank-d oracle; sample a subgraph instead");
  }
  const auto [w_fac, c_fac] = svd_factors(thin_svd(m.to_dense()), d);
  return r_scores(m, w_fac, c_fac);
}

ReconstructionReport reconstruction_of(const SparseBlock& m, const GraphStore& g,
                                       const EmbeddingTable& table) {
  std::unordered_map<std::string, std::size_t> row_of;
  row_of.reserve(table.labels.size());
  for (std::size_t i = 0; i < table.labels.size(); ++i) row_of.emplace(table.labels[i], i);

  const Eigen::Index d = table.w.cols();
  auto gather = [&](const std::vector<NodeId>& nodes, const MatrixXd& src) {
    MatrixXd out(d, static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto it = row_of.find(g.label_of(nodes[i]));
      if (it == row_of.end()) {
        throw std::invalid_argument("node " + g.label_of(nodes[i]) + " has no embedding row");
      }
      out.col(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(it->second));
    }
    return out;
  };
  const MatrixXd w = gather(m.rows, table.w);
  const MatrixXd c = gather(m.cols, table.c);
  return r_scores(m, w, c);
}

namespace {

// Softmax cross-entropy over one-hot targets with an L2 penalty on the
// non-bias rows; x carries the bias column last.
double softmax_loss(const MatrixXd& x, const std::vector<int>& y, const MatrixXd& weights,
                    double reg, MatrixXd* grad) {
  const Eigen::Index m = x.rows();
  MatrixXd z = x * weights;  // m x C
  double loss = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double zmax = z.row(i).maxCoeff();
    z.row(i).array() -= zmax;
  }
  const MatrixXd expz = z.array().exp();
  const VectorXd sums = expz.rowwise().sum();
  for (Eigen::Index i = 0; i < m; ++i) {
    loss += std::log(sums(i)) - z(i, y[static_cast<std::size_t>(i)]);
  }
  const Eigen::Index feat = weights.rows() - 1;
  loss += 0.5 * reg * weights.topRows(feat).squaredNorm();
  if (grad) {
    MatrixXd p = expz.array().colwise() / sums.array();
    for (Eigen::Index i = 0; i < m; ++i) p(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    grad->noalias() = x.transpose() * p;
    grad->topRows(feat) += reg * weights.topRows(feat);
  }
  return loss;
}

// Full-batch gradient descent with Armijo backtracking; the step seed is
// carried between epochs Barzilai-Borwein style.
MatrixXd train_softmax(const MatrixXd& x, const std::vector<int>& y, std::size_t num_classes,
                       double reg) {
  constexpr std::size_t kMaxEpochs = 2000;
  constexpr double kTol = 1e-9;
  MatrixXd w = MatrixXd::Zero(x.cols(), static_cast<Eigen::Index>(num_classes));
  MatrixXd grad(w.rows(), w.cols());
  double loss = softmax_loss(x, y, w, reg, &grad);
  double step = 1.0;
  for (std::size_t epoch = 0; epoch < kMaxEpochs; ++epoch) {
    const double grad_sq = grad.squaredNorm();
    if (grad_sq == 0.0) break;
    double alpha = step;
    MatrixXd w_next;
    double loss_next = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      w_next = w - alpha * grad;
      loss_next = softmax_loss(x, y, w_next, reg, nullptr);
      if (loss_next <= loss - 1e-4 * alpha * grad_sq) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    MatrixXd grad_next(w.rows(), w.cols());
    const double verify = softmax_loss(x, y, w_next, reg, &grad_next);
    const MatrixXd dg = grad_next - grad;
    const double dg_sq = dg.squaredNorm();
    step = dg_sq > 0.0 ? std::clamp(std::abs(alpha * grad.cwiseProduct(dg).sum()) / dg_sq,
                                    1e-10, 1e10)
                       : alpha * 2.0;
    w = std::move(w_next);
    grad = std::move(grad_next);
    const double drop = loss - verify;
    loss = verify;
    if (drop <= kTol * std::max(1.0, std::abs(loss))) break;
  }
  return w;
}

struct SplitCounts {
  std::size_t tp = 0, fp = 0, fn = 0;

  double micro_f1() const {
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  }
};

struct Split {
  std::vector<std::size_t> train, test;  // indices into the label set
};

Split stratified_split(const LabelSet& labels, double fraction, Rng& rng) {
  constexpr int kMaxAttempts = 20;
  const std::size_t n = labels.size();
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Split split;
    std::vector<char> in_train(n, 0);
    if (!labels.multi_label) {
      std::vector<std::vector<std::size_t>> by_class(labels.num_classes());
      for (std::size_t i = 0; i < n; ++i) {
        by_class[static_cast<std::size_t>(labels.node_classes[i][0])].push_back(i);
      }
      for (auto& members : by_class) {
        rng.shuffle(members);
        const auto take = static_cast<std::size_t>(
            std::lround(fraction * static_cast<double>(members.size())));
        for (std::size_t j = 0; j < members.size(); ++j) in_train[members[j]] = j < take;
      }
    } else {
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      rng.shuffle(order);
      const auto take =
          static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
      for (std::size_t j = 0; j < take && j < n; ++j) in_train[order[j]] = 1;
    }
    std::vector<char> class_seen(labels.num_classes(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& side = in_train[i] ? split.train : split.test;
      side.push_back(i);
      if (in_train[i]) {
        for (const int c : labels.node_classes[i]) class_seen[static_cast<std::size_t>(c)] = 1;
      }
    }
    const bool all_present =
        std::all_of(class_seen.begin(), class_seen.end(), [](char s) { return s != 0; });
    if (all_present && !split.train.empty() && !split.test.empty()) return split;
  }
  throw DataError(
      "could not draw a stratified split with every class in training and a non-empty test "
      "side");
}

double run_once(const MatrixXd& features, const LabelSet& labels, double fraction,
                std::uint64_t seed) {
  Rng rng(seed);
  const Split split = stratified_split(labels, fraction, rng);

  auto gather = [&](const std::vector<std::size_t>& idx) {
    MatrixXd x(static_cast<Eigen::Index>(idx.size()), features.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(idx[i]));
    }
    return x;
  };
  const MatrixXd x_train = gather(split.train);
  const MatrixXd x_test = gather(split.test);
  constexpr double kReg = 1.0;

  SplitCounts counts;
  if (!labels.multi_label) {
    std::vector<int> y_train;
    y_train.reserve(split.train.size());
    for (const std::size_t i : split.train) y_train.push_back(labels.node_classes[i][0]);
    const MatrixXd w = train_softmax(x_train, y_train, labels.num_classes(), kReg);
    const MatrixXd scores = x_test * w;
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      Eigen::Index pred = 0;
      scores.row(static_cast<Eigen::Index>(i)).maxCoeff(&pred);
      if (static_cast<int>(pred) == labels.node_classes[split.test[i]][0]) {
        ++counts.tp;
      } else {
        ++counts.fp;
        ++counts.fn;
      }
    }
  } else {
    // One-vs-rest: a two-class softmax per class, positive iff its score
    // wins (equivalent to sigmoid probability above 0.5).
    for (std::size_t c = 0; c < labels.num_classes(); ++c) {
      std::vector<int> y_train;
      y_train.reserve(split.train.size());
      for (const std::size_t i : split.train) {
        const auto& cls = labels.node_classes[i];
        y_train.push_back(std::find(cls.begin(), cls.end(), static_cast<int>(c)) != cls.end());
      }
      const MatrixXd w = train_softmax(x_train, y_train, 2, kReg);
      const MatrixXd scores = x_test * w;
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        const bool predicted = scores(static_cast<Eigen::Index>(i), 1) >
                               scores(static_cast<Eigen::Index>(i), 0);
        const auto& cls = labels.node_classes[split.test[i]];
        const bool actual =
            std::find(cls.begin(), cls.end(), static_cast<int>(c)) != cls.end();
        counts.tp += predicted && actual;
        counts.fp += predicted && !actual;
        counts.fn += !predicted && actual;
      }
    }
  }
  return counts.micro_f1();
}

}  // namespace

LabelSet load_labels(const std::string& path, const EmbeddingTable& table) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file: " + path);

  std::unordered_map<std::string, std::size_t> row_of;
  row_of.reserve(table.labels.size());
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    if (!row_of.emplace(table.labels[i], i).second) {
      throw DataError("embedding table has duplicate label: " + table.labels[i]);
    }
  }

  LabelSet out;
  std::unordered_map<std::string, int> class_ids;
  std::unordered_map<std::size_t, std::size_t> node_slot;  // embedding row -> out index
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string node, cls, extra;
    if (!(ls >> node)) continue;
    if (node[0] == '#') continue;
    if (!(ls >> cls) || (ls >> extra)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected \"node_label class_id\"");
    }
    const auto row_it = row_of.find(node);
    if (row_it == row_of.end()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": unknown node " + node);
    }
    const auto [cls_it, fresh] = class_ids.emplace(cls, static_cast<int>(out.class_names.size()));
    if (fresh) out.class_names.push_back(cls);

    const auto [slot_it, new_node] = node_slot.emplace(row_it->second, out.rows.size());
    if (new_node) {
      out.rows.push_back(row_it->second);
      out.node_classes.emplace_back();
    }
    auto& classes = out.node_classes[slot_it->second];
    if (std::find(classes.begin(), classes.end(), cls_it->second) == classes.end()) {
      classes.push_back(cls_it->second);
      if (classes.size() > 1) out.multi_label = true;
    }
  }
  if (out.rows.empty()) throw DataError(path + ": labels file assigns no nodes");
  if (out.num_classes() < 2) throw DataError(path + ": need at least two classes");
  return out;
}

double classify_with_labels(const EmbeddingTable& embeddings, const LabelSet& labels,
                            double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
  }
  constexpr int kRuns = 10;

  // L2-normalized labeled rows with a trailing bias column.
  MatrixXd features(static_cast<Eigen::Index>(labels.size()), embeddings.w.cols() + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    features.row(r).head(embeddings.w.cols()) =
        embeddings.w.row(static_cast<Eigen::Index>(labels.rows[i]));
    const double norm = features.row(r).head(embeddings.w.cols()).norm();
    if (norm > 0.0) features.row(r).head(embeddings.w.cols()) /= norm;
    features(r, embeddings.w.cols()) = 1.0;
  }

  Rng master(seed);
  double total = 0.0;
  for (int run = 0; run < kRuns; ++run) total += run_once(features, labels, train_fraction, master.next());
  return total / kRuns;
}

double classify(const EmbeddingTable& embeddings, const std::string& labels_path,
                double train_fraction, std::uint64_t seed) {
  return classify_with_labels(embeddings, load_labels(labels_path, embeddings), train_fraction,
                              seed);
}

}  // namespace sepne
