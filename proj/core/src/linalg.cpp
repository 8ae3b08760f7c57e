#include "krbn/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace krbn {

double operator_norm(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  const Mat g = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace krbn
