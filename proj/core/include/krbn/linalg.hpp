#pragma once

#include <Eigen/Core>

namespace krbn {

// Largest state dimension d supported. Vectors and matrices live on the
// stack up to this size, so hot loops never allocate.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline Vec zeros(int d) { return Vec::Zero(d); }
inline Vec scalar_vec(double x) { return Vec::Constant(1, x); }
inline Mat identity(int d) { return Mat::Identity(d, d); }

// Spectral norm; |.| for 1x1.
double operator_norm(const Mat& m);

}  // namespace krbn
