#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/graph.hpp"
#include "core/landmark.hpp"
#include "core/partition.hpp"
#include "core/proximity.hpp"

namespace sepne {

struct SmfConfig {
  std::size_t d = 128;   // embedding dimension
  std::size_t k = 200;   // landmark count
  double lambda = 0.4;   // weight of the complement-coupling terms
  double eta = 0.1;      // ridge weight; must stay positive
  std::size_t iters = 100;
  ProximityConfig proximity{};
  // Stop a section early once the relative loss improvement of a full
  // iteration drops below 1e-7.
  bool early_stop = false;

  void validate() const;
};

// Shared factorization of the landmark block: M00 ~= phi^T psi with
// phi = (U_d sqrt(S_d))^T and psi = (V_d sqrt(S_d))^T from the SVD
// M00 = U S V^T truncated to the top d singular triples.
struct LandmarkEmbedding {
  Eigen::MatrixXd phi, psi;            // d x k
  Eigen::VectorXd sigma;               // top d singular values, non-increasing
  Eigen::MatrixXd p_matrix;            // k x k cached phi^T psi
  Eigen::MatrixXd phi_gram, psi_gram;  // d x d cached phi phi^T and psi psi^T
  // Diagnostics: singular values at (numerical) zero among the retained d,
  // and landmark columns of phi that came out identically null.
  std::size_t zero_singular_values = 0;
  std::size_t null_landmark_columns = 0;
};

// Everything a section solve needs: its proximity blocks against itself and
// the landmarks, plus the precomputed complement products.
struct ProximityBlockSet {
  SparseBlock m_ii;  // n_i x n_i
  SparseBlock m_0i;  // k x n_i
  SparseBlock m_i0;  // n_i x k
  ComplementProducts complement;

  std::size_t section_size() const { return m_ii.n_rows(); }
  std::size_t landmark_count() const { return m_0i.n_rows(); }
};

// Unweighted components of the section objective; the total applies the
// lambda and eta weights:
//   total = local + landmark + lambda * global + eta * ridge
// where local    = 1/2 |M_ii - A^T P B|^2
//       landmark = 1/2 (|M_0i - P B|^2 + |M_i0 - A^T P|^2)
//       global   = 1/2 (|M_ic - A^T M_0c|^2 + |M_ci - M_c0 B|^2)
//       ridge    = 1/2 (|A|^2 + |B|^2)
struct ComponentLosses {
  double local = 0.0;
  double landmark = 0.0;
  double global = 0.0;
  double ridge = 0.0;

  double total(double lambda, double eta) const {
    return local + landmark + lambda * global + eta * ridge;
  }
};

struct SetSolution {
  Eigen::MatrixXd a_mat, b_mat;  // k x n_i coefficients
  Eigen::MatrixXd w_mat, c_mat;  // d x n_i embeddings: W = phi A, C = psi B
  // Total loss before the first iteration and after each one.
  std::vector<double> loss_trace;
  ComponentLosses component_losses;
  std::size_t iterations_run = 0;
};

// Densifies the landmark block and factors it through its full SVD. Warns
// about zero singular values and null landmark representations.
LandmarkEmbedding embed_landmarks(const SparseBlock& m00, std::size_t d);

// Extracts M_ii, M_0i, M_i0 and, when with_complement is set, streams the
// complement products; otherwise the products are left as zeros and the
// coupling terms vanish.
ProximityBlockSet build_section_blocks(const GraphStore& g, const ProximityConfig& proximity,
                                       std::span<const NodeId> landmarks,
                                       std::span<const NodeId> section, bool with_complement);

// Alternating exact block minimization from A = B = 0: each half-step
// assembles the k x k normal-equation matrix (positive definite for eta > 0)
// and solves it by Cholesky factorization against a k x n_i right-hand side.
SetSolution solve_set(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                      const SmfConfig& cfg);

// One exact half-step each, exposed so descent can be observed between them.
void minimize_a(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                const SmfConfig& cfg, const Eigen::MatrixXd& b_mat, Eigen::MatrixXd& a_mat);
void minimize_b(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                const SmfConfig& cfg, const Eigen::MatrixXd& a_mat, Eigen::MatrixXd& b_mat);

ComponentLosses evaluate_loss(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                              const SmfConfig& cfg, const Eigen::MatrixXd& a_mat,
                              const Eigen::MatrixXd& b_mat);

// Analytic gradient of the section objective at (A, B).
void loss_gradient(const ProximityBlockSet& blocks, const LandmarkEmbedding& lm,
                   const SmfConfig& cfg, const Eigen::MatrixXd& a_mat,
                   const Eigen::MatrixXd& b_mat, Eigen::MatrixXd& grad_a,
                   Eigen::MatrixXd& grad_b);

struct PipelineOptions {
  std::size_t workers = 1;
  // Keep going when a section fails; its nodes are dropped from the output
  // with a warning instead of aborting the run.
  bool best_effort = false;
};

struct SectionReport {
  std::size_t set_index = 0;
  std::size_t size = 0;
  std::size_t iterations_run = 0;
  ComponentLosses losses;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

// Embedding rows for landmarks first (in selection order), then each set's
// nodes in set order.
struct EmbeddingTable {
  std::vector<std::string> labels;
  Eigen::MatrixXd w;  // rows x d
  Eigen::MatrixXd c;  // rows x d

  std::size_t rows() const { return labels.size(); }
};

struct PipelineResult {
  EmbeddingTable table;
  std::vector<SectionReport> sections;
  double landmark_seconds = 0.0;      // M00 extraction + SVD
  double optimization_seconds = 0.0;  // all section work
  std::size_t zero_singular_values = 0;
  std::size_t null_landmark_columns = 0;
};

// Embeds landmarks once, then solves every partition set independently,
// running up to opts.workers sections concurrently. Output is identical for
// any worker count.
PipelineResult run_pipeline(const GraphStore& g, const PartitionPlan& plan,
                            const LandmarkSet& lms, const SmfConfig& cfg,
                            const PipelineOptions& opts = {});

}  // namespace sepne
