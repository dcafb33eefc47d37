#pragma once

#include <Eigen/Dense>

namespace sparc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using MatF = Eigen::MatrixXf;

inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace sparc
