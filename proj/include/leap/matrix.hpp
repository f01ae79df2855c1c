#pragma once

#include <Eigen/Dense>

namespace leap {

// Row-major so matrices serialize directly as row-major float runs.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace leap
