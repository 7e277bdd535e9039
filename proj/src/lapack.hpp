#pragma once

#include "calderon/types.hpp"

namespace calderon::detail {

struct TruncatedLstsq {
  Eigen::VectorXcd x;
  Eigen::VectorXd singular_values;  // descending, all of them
  int rank = 0;
};

// Minimum-norm least squares with singular values below rcond * sigma_max
// discarded (LAPACK zgelsd).
TruncatedLstsq truncated_lstsq(Eigen::MatrixXcd a, const Eigen::VectorXcd& b, double rcond);

}  // namespace calderon::detail
