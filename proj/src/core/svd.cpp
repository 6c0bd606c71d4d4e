#include "core/svd.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "core/errors.hpp"

namespace sepne {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Two-sided Jacobi stays affordable up to this many rows and columns.
constexpr Eigen::Index kJacobiLimit = 512;

// Singular triples recovered through the Gram matrix of the shorter side.
// Squaring costs half the precision near the numerical-rank cutoff, which
// every caller discards anyway.
ThinSvd gram_svd(const MatrixXd& a) {
  const bool gram_of_cols = a.cols() <= a.rows();
  MatrixXd gram;
  if (gram_of_cols) {
    gram.noalias() = a.transpose() * a;
  } else {
    gram.noalias() = a * a.transpose();
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed while recovering a broken SVD");
  }
  const Eigen::Index n = gram.rows();
  ThinSvd out;
  out.s.resize(n);
  MatrixXd own_side(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {  // ascending eigenvalues -> descending sigma
    out.s(i) = std::sqrt(std::max(0.0, eig.eigenvalues()(n - 1 - i)));
    own_side.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
  const double cut = static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon() * (n > 0 ? out.s(0) : 0.0);
  MatrixXd other_side = MatrixXd::Zero(gram_of_cols ? a.rows() : a.cols(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.s(i) > cut) {
      if (gram_of_cols) {
        other_side.col(i).noalias() = a * own_side.col(i) / out.s(i);
      } else {
        other_side.col(i).noalias() = a.transpose() * own_side.col(i) / out.s(i);
      }
    }
  }
  if (gram_of_cols) {
    out.v = std::move(own_side);
    out.u = std::move(other_side);
  } else {
    out.u = std::move(own_side);
    out.v = std::move(other_side);
  }
  return out;
}

}  // namespace

ThinSvd thin_svd(const MatrixXd& a) {
  Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().allFinite() && svd.matrixU().allFinite() &&
      svd.matrixV().allFinite()) {
    return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
  }
  std::cerr << "[sepne] warning: divide-and-conquer SVD returned non-finite values; "
               "retrying with an exact fallback\n";
  if (std::min(a.rows(), a.cols()) <= kJacobiLimit) {
    Eigen::JacobiSVD<MatrixXd> jac(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {jac.singularValues(), jac.matrixU(), jac.matrixV()};
  }
  return gram_svd(a);
}

}  // namespace sepne
