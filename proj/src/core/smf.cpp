#include "core/smf.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "core/errors.hpp"
#include "core/svd.hpp"

namespace sepne {

namespace {

using Eigen::MatrixXd;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// x * sp, with x (r x sp.n_rows) dense and sp sparse.
MatrixXd times_sparse(const MatrixXd& x, const SparseBlock& sp) {
  MatrixXd out = MatrixXd::Zero(x.rows(), static_cast<Eigen::Index>(sp.n_cols()));
  for (std::size_t r = 0; r < sp.n_rows(); ++r) {
    for (std::size_t p = sp.row_ptr[r]; p < sp.row_ptr[r + 1]; ++p) {
      out.col(sp.col_idx[p]).noalias() += sp.values[p] * x.col(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

// x * sp^T, with x (r x sp.n_cols) dense and sp sparse.
MatrixXd times_sparse_transpose(const MatrixXd& x, const SparseBlock& sp) {
  MatrixXd out = MatrixXd::Zero(x.rows(), static_cast<Eigen::Index>(sp.n_rows()));
  for (std::size_t r = 0; r < sp.n_rows(); ++r) {
    for (std::size_t p = sp.row_ptr[r]; p < sp.row_ptr[r + 1]; ++p) {
      out.col(static_cast<Eigen::Index>(r)).noalias() += sp.values[p] * x.col(sp.col_idx[p]);
    }
  }
  return out;
}

// <sp, x^T y> where the dense product is never formed.
double sparse_dot_factored(const SparseBlock& sp, const MatrixXd& x, const MatrixXd& y) {
  double acc = 0.0;
  for (std::size_t r = 0; r < sp.n_rows(); ++r) {
    for (std::size_t p = sp.row_ptr[r]; p < sp.row_ptr[r + 1]; ++p) {
      acc += sp.values[p] * x.col(static_cast<Eigen::Index>(r)).dot(y.col(sp.col_idx[p]));
    }
  }
  return acc;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_shapes(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                  const SmfConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(cfg.k);
  const auto d = static_cast<Eigen::Index>(cfg.d);
  const auto ni = static_cast<Eigen::Index>(blocks.section_size());
  require(lm.phi.rows() == d && lm.phi.cols() == k, "phi shape disagrees with config");
  require(lm.psi.rows() == d && lm.psi.cols() == k, "psi shape disagrees with config");
  require(lm.p_matrix.rows() == k && lm.p_matrix.cols() == k, "p_matrix shape mismatch");
  require(blocks.m_ii.n_rows() == blocks.m_ii.n_cols(), "section block is not square");
  require(static_cast<Eigen::Index>(blocks.m_0i.n_rows()) == k, "m_0i row count mismatch");
  require(static_cast<Eigen::Index>(blocks.m_0i.n_cols()) == ni, "m_0i column count mismatch");
  require(static_cast<Eigen::Index>(blocks.m_i0.n_rows()) == ni, "m_i0 row count mismatch");
  require(static_cast<Eigen::Index>(blocks.m_i0.n_cols()) == k, "m_i0 column count mismatch");
  if (cfg.lambda != 0.0) {
    const auto& cp = blocks.complement;
    require(cp.gram_row.rows() == k && cp.gram_row.cols() == k, "gram_row shape mismatch");
    require(cp.gram_col.rows() == k && cp.gram_col.cols() == k, "gram_col shape mismatch");
    require(cp.cross_row.rows() == k && cp.cross_row.cols() == ni, "cross_row shape mismatch");
    require(cp.cross_col.rows() == k && cp.cross_col.cols() == ni, "cross_col shape mismatch");
  }
}

void check_coeff(const MatrixXd& m, const SmfConfig& cfg, std::size_t ni, const char* what) {
  if (m.rows() != static_cast<Eigen::Index>(cfg.k) ||
      m.cols() != static_cast<Eigen::Index>(ni)) {
    throw std::invalid_argument(std::string(what) + " must be k x n_i");
  }
}

// Left-hand side and right-hand side of one half-step's normal equations;
// the gradient in that variable is lhs * X - rhs.
struct HalfSystem {
  MatrixXd lhs, rhs;
};

HalfSystem a_half_system(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                         const SmfConfig& cfg, const MatrixXd& b_mat) {
  HalfSystem sys;
  const MatrixXd r = lm.psi * b_mat;                      // d x n_i
  const MatrixXd core = r * r.transpose() + lm.psi_gram;  // d x d
  sys.lhs.noalias() = lm.phi.transpose() * core * lm.phi;
  if (cfg.lambda != 0.0) sys.lhs.noalias() += cfg.lambda * blocks.complement.gram_row;
  sys.lhs.diagonal().array() += cfg.eta;

  const MatrixXd q = lm.phi.transpose() * r;  // k x n_i, equals P B
  sys.rhs = times_sparse_transpose(q, blocks.m_ii);
  sys.rhs.noalias() += times_sparse_transpose(lm.p_matrix, blocks.m_i0);
  if (cfg.lambda != 0.0) sys.rhs.noalias() += cfg.lambda * blocks.complement.cross_row;
  return sys;
}

HalfSystem b_half_system(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                         const SmfConfig& cfg, const MatrixXd& a_mat) {
  HalfSystem sys;
  const MatrixXd s = lm.phi * a_mat;                      // d x n_i
  const MatrixXd core = s * s.transpose() + lm.phi_gram;  // d x d
  sys.lhs.noalias() = lm.psi.transpose() * core * lm.psi;
  if (cfg.lambda != 0.0) sys.lhs.noalias() += cfg.lambda * blocks.complement.gram_col;
  sys.lhs.diagonal().array() += cfg.eta;

  const MatrixXd zt = lm.psi.transpose() * s;  // k x n_i, equals P^T A
  sys.rhs = times_sparse(zt, blocks.m_ii);
  sys.rhs.noalias() += times_sparse(lm.p_matrix.transpose(), blocks.m_0i);
  if (cfg.lambda != 0.0) sys.rhs.noalias() += cfg.lambda * blocks.complement.cross_col;
  return sys;
}

MatrixXd solve_normal_equations(const HalfSystem& sys) {
  const MatrixXd sym = 0.5 * (sys.lhs + sys.lhs.transpose());
  Eigen::LLT<MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) {
    const double smallest =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(sym, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff();
    throw NumericError("normal equations are not positive definite (smallest eigenvalue " +
                       std::to_string(smallest) + ")");
  }
  return llt.solve(sys.rhs);
}

}  // namespace

void SmfConfig::validate() const {
  if (d == 0) throw std::invalid_argument("embedding dimension d must be at least 1");
  if (k < d) throw std::invalid_argument("landmark count k must be at least d");
  if (!(eta > 0.0)) throw std::invalid_argument("ridge weight eta must be positive");
  if (lambda < 0.0) throw std::invalid_argument("coupling weight lambda must be non-negative");
  if (iters == 0) throw std::invalid_argument("iteration count must be at least 1");
}

LandmarkEmbedding embed_landmarks(const SparseBlock& m00, std::size_t d) {
  if (m00.n_rows() != m00.n_cols()) {
    throw std::invalid_argument("landmark block must be square");
  }
  const std::size_t k = m00.n_rows();
  if (d == 0) throw std::invalid_argument("embedding dimension d must be at least 1");
  if (k < d) {
    throw std::invalid_argument("landmark count " + std::to_string(k) +
                                " is smaller than embedding dimension " + std::to_string(d));
  }

  const ThinSvd svd = thin_svd(m00.to_dense());
  const auto dd = static_cast<Eigen::Index>(d);

  LandmarkEmbedding lm;
  lm.sigma = svd.s.head(dd);
  const Eigen::VectorXd scale = lm.sigma.array().max(0.0).sqrt();
  lm.phi = (svd.u.leftCols(dd) * scale.asDiagonal()).transpose();
  lm.psi = (svd.v.leftCols(dd) * scale.asDiagonal()).transpose();
  lm.p_matrix.noalias() = lm.phi.transpose() * lm.psi;
  lm.phi_gram.noalias() = lm.phi * lm.phi.transpose();
  lm.psi_gram.noalias() = lm.psi * lm.psi.transpose();

  const double sigma_tol =
      static_cast<double>(k) * std::numeric_limits<double>::epsilon() * lm.sigma(0);
  for (Eigen::Index i = 0; i < dd; ++i) {
    if (lm.sigma(i) <= sigma_tol) ++lm.zero_singular_values;
  }
  const Eigen::VectorXd col_norms = lm.phi.colwise().norm();
  const double col_tol = 1e-12 * col_norms.maxCoeff();
  for (Eigen::Index j = 0; j < col_norms.size(); ++j) {
    if (col_norms(j) <= col_tol) ++lm.null_landmark_columns;
  }
  if (lm.zero_singular_values > 0) {
    std::cerr << "[sepne] warning: " << lm.zero_singular_values
              << " of the top " << d << " singular values are zero\n";
  }
  if (lm.null_landmark_columns > 0) {
    std::cerr << "[sepne] warning: " << lm.null_landmark_columns
              << " landmark(s) received a null representation\n";
  }
  return lm;
}

ProximityBlockSet build_section_blocks(const GraphStore& g, const ProximityConfig& proximity,
                                       std::span<const NodeId> landmarks,
                                       std::span<const NodeId> section, bool with_complement) {
  ProximityBlockSet blocks;
  blocks.m_ii = proximity_block(g, proximity, section, section);
  blocks.m_0i = proximity_block(g, proximity, landmarks, section);
  blocks.m_i0 = proximity_block(g, proximity, section, landmarks);
  if (with_complement) {
    blocks.complement = complement_products(g, proximity, landmarks, section);
  } else {
    const auto k = static_cast<Eigen::Index>(landmarks.size());
    const auto ni = static_cast<Eigen::Index>(section.size());
    blocks.complement.gram_row = MatrixXd::Zero(k, k);
    blocks.complement.gram_col = MatrixXd::Zero(k, k);
    blocks.complement.cross_row = MatrixXd::Zero(k, ni);
    blocks.complement.cross_col = MatrixXd::Zero(k, ni);
  }
  return blocks;
}

void minimize_a(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                const SmfConfig& cfg, const MatrixXd& b_mat, MatrixXd& a_mat) {
  check_shapes(blocks, lm, cfg);
  check_coeff(b_mat, cfg, blocks.section_size(), "b_mat");
  a_mat = solve_normal_equations(a_half_system(blocks, lm, cfg, b_mat));
}

void minimize_b(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                const SmfConfig& cfg, const MatrixXd& a_mat, MatrixXd& b_mat) {
  check_shapes(blocks, lm, cfg);
  check_coeff(a_mat, cfg, blocks.section_size(), "a_mat");
  b_mat = solve_normal_equations(b_half_system(blocks, lm, cfg, a_mat));
}

ComponentLosses evaluate_loss(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                              const SmfConfig& cfg, const MatrixXd& a_mat,
                              const MatrixXd& b_mat) {
  check_shapes(blocks, lm, cfg);
  check_coeff(a_mat, cfg, blocks.section_size(), "a_mat");
  check_coeff(b_mat, cfg, blocks.section_size(), "b_mat");

  const MatrixXd s = lm.phi * a_mat;  // d x n_i, the section W
  const MatrixXd r = lm.psi * b_mat;  // d x n_i, the section C
  const MatrixXd ss = s * s.transpose();
  const MatrixXd rr = r * r.transpose();

  ComponentLosses out;
  // 1/2 |M_ii - A^T P B|^2, via |X|^2 - 2<M,X> + |M|^2 with X = S^T R.
  out.local = 0.5 * (blocks.m_ii.squared_norm() - 2.0 * sparse_dot_factored(blocks.m_ii, s, r) +
                     ss.cwiseProduct(rr).sum());
  // 1/2 |M_0i - P B|^2 with P B = phi^T R.
  const double lm_col = blocks.m_0i.squared_norm() -
                        2.0 * sparse_dot_factored(blocks.m_0i, lm.phi, r) +
                        lm.phi_gram.cwiseProduct(rr).sum();
  // 1/2 |M_i0 - A^T P|^2 with A^T P = S^T psi.
  const double lm_row = blocks.m_i0.squared_norm() -
                        2.0 * sparse_dot_factored(blocks.m_i0, s, lm.psi) +
                        lm.psi_gram.cwiseProduct(ss).sum();
  out.landmark = 0.5 * (lm_col + lm_row);

  const auto& cp = blocks.complement;
  if (cp.gram_row.size() > 0) {
    const MatrixXd aa = a_mat * a_mat.transpose();
    const MatrixXd bb = b_mat * b_mat.transpose();
    const double row_part = cp.row_target_sqnorm -
                            2.0 * a_mat.cwiseProduct(cp.cross_row).sum() +
                            aa.cwiseProduct(cp.gram_row).sum();
    const double col_part = cp.col_target_sqnorm -
                            2.0 * b_mat.cwiseProduct(cp.cross_col).sum() +
                            bb.cwiseProduct(cp.gram_col).sum();
    out.global = 0.5 * (row_part + col_part);
  }
  out.ridge = 0.5 * (a_mat.squaredNorm() + b_mat.squaredNorm());
  return out;
}

void loss_gradient(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                   const SmfConfig& cfg, const MatrixXd& a_mat, const MatrixXd& b_mat,
                   MatrixXd& grad_a, MatrixXd& grad_b) {
  check_shapes(blocks, lm, cfg);
  check_coeff(a_mat, cfg, blocks.section_size(), "a_mat");
  check_coeff(b_mat, cfg, blocks.section_size(), "b_mat");
  const HalfSystem sys_a = a_half_system(blocks, lm, cfg, b_mat);
  grad_a.noalias() = sys_a.lhs * a_mat;
  grad_a -= sys_a.rhs;
  const HalfSystem sys_b = b_half_system(blocks, lm, cfg, a_mat);
  grad_b.noalias() = sys_b.lhs * b_mat;
  grad_b -= sys_b.rhs;
}

SetSolution solve_set(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                      const SmfConfig& cfg) {
  cfg.validate();
  check_shapes(blocks, lm, cfg);
  const auto k = static_cast<Eigen::Index>(cfg.k);
  const auto ni = static_cast<Eigen::Index>(blocks.section_size());

  SetSolution sol;
  sol.a_mat = MatrixXd::Zero(k, ni);
  sol.b_mat = MatrixXd::Zero(k, ni);
  sol.component_losses = evaluate_loss(blocks, lm, cfg, sol.a_mat, sol.b_mat);
  sol.loss_trace.push_back(sol.component_losses.total(cfg.lambda, cfg.eta));

  for (std::size_t it = 1; it <= cfg.iters; ++it) {
    minimize_a(blocks, lm, cfg, sol.b_mat, sol.a_mat);
    minimize_b(blocks, lm, cfg, sol.a_mat, sol.b_mat);
    sol.component_losses = evaluate_loss(blocks, lm, cfg, sol.a_mat, sol.b_mat);
    sol.loss_trace.push_back(sol.component_losses.total(cfg.lambda, cfg.eta));
    sol.iterations_run = it;
    if (cfg.early_stop && it < cfg.iters) {
      const double prev = sol.loss_trace[sol.loss_trace.size() - 2];
      const double cur = sol.loss_trace.back();
      if (prev - cur <= 1e-7 * std::abs(prev)) break;
    }
  }
  sol.w_mat.noalias() = lm.phi * sol.a_mat;
  sol.c_mat.noalias() = lm.psi * sol.b_mat;
  return sol;
}

PipelineResult run_pipeline(const GraphStore& g, const PartitionPlan& plan,
                            const LandmarkSet& lms, const SmfConfig& cfg,
                            const PipelineOptions& opts) {
  cfg.validate();
  if (lms.size() != cfg.k) {
    throw std::invalid_argument("landmark set size disagrees with config k");
  }
  plan.validate(g, lms.nodes);

  PipelineResult result;
  const auto t_landmark = std::chrono::steady_clock::now();
  const SparseBlock m00 = proximity_block(g, cfg.proximity, lms.nodes, lms.nodes);
  const LandmarkEmbedding lm = embed_landmarks(m00, cfg.d);
  result.landmark_seconds = seconds_since(t_landmark);
  result.zero_singular_values = lm.zero_singular_values;
  result.null_landmark_columns = lm.null_landmark_columns;

  const std::size_t num_sets = plan.sets.size();
  std::vector<SetSolution> solutions(num_sets);
  std::vector<std::exception_ptr> failures(num_sets);
  result.sections.resize(num_sets);

  const auto t_opt = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= num_sets) return;
      SectionReport& report = result.sections[i];
      report.set_index = i;
      report.size = plan.sets[i].size();
      const auto t_section = std::chrono::steady_clock::now();
      try {
        const ProximityBlockSet blocks = build_section_blocks(
            g, cfg.proximity, lms.nodes, plan.sets[i], cfg.lambda != 0.0);
        solutions[i] = solve_set(blocks, lm, cfg);
        report.iterations_run = solutions[i].iterations_run;
        report.losses = solutions[i].component_losses;
        report.initial_loss = solutions[i].loss_trace.front();
        report.final_loss = solutions[i].loss_trace.back();
      } catch (...) {
        failures[i] = std::current_exception();
        report.failed = true;
      }
      report.seconds = seconds_since(t_section);
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(opts.workers, num_sets));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  result.optimization_seconds = seconds_since(t_opt);

  for (std::size_t i = 0; i < num_sets; ++i) {
    if (!failures[i]) continue;
    if (!opts.best_effort) std::rethrow_exception(failures[i]);
    std::string reason = "unknown error";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      reason = e.what();
    } catch (...) {
    }
    result.sections[i].error = reason;
    std::cerr << "[sepne] warning: section " << i << " failed (" << reason
              << "); dropping its " << plan.sets[i].size() << " nodes\n";
  }

  std::size_t rows = lms.size();
  for (std::size_t i = 0; i < num_sets; ++i) {
    if (!failures[i]) rows += plan.sets[i].size();
  }
  const auto d = static_cast<Eigen::Index>(cfg.d);
  EmbeddingTable& table = result.table;
  table.labels.reserve(rows);
  table.w.resize(static_cast<Eigen::Index>(rows), d);
  table.c.resize(static_cast<Eigen::Index>(rows), d);

  Eigen::Index row = 0;
  for (std::size_t j = 0; j < lms.size(); ++j) {
    table.labels.push_back(g.label_of(lms.nodes[j]));
    table.w.row(row) = lm.phi.col(static_cast<Eigen::Index>(j)).transpose();
    table.c.row(row) = lm.psi.col(static_cast<Eigen::Index>(j)).transpose();
    ++row;
  }
  for (std::size_t i = 0; i < num_sets; ++i) {
    if (failures[i]) continue;
    const SetSolution& sol = solutions[i];
    for (std::size_t j = 0; j < plan.sets[i].size(); ++j) {
      table.labels.push_back(g.label_of(plan.sets[i][j]));
      table.w.row(row) = sol.w_mat.col(static_cast<Eigen::Index>(j)).transpose();
      table.c.row(row) = sol.c_mat.col(static_cast<Eigen::Index>(j)).transpose();
      ++row;
    }
  }
  return result;
}

}  // namespace sepne
