#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace geognn {

// Dense row-major storage; rows are samples (nodes, edges or graphs).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = std::int64_t;

} // namespace geognn
