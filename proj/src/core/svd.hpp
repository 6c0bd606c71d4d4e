#pragma once

#include <Eigen/Dense>

namespace sepne {

// Thin SVD triples ordered by descending singular value.
struct ThinSvd {
  Eigen::VectorXd s;
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
};

// Thin SVD that survives matrices on which Eigen's divide-and-conquer kernel
// returns non-finite output (dense proximity matrices with many duplicate
// rows trigger an out-of-bounds read in its deflation step). Such inputs are
// retried on slower exact routes, with a warning.
ThinSvd thin_svd(const Eigen::MatrixXd& a);

}  // namespace sepne
