#pragma once

#include <Eigen/Core>

namespace sdcn {

// Row-major matrices so that one batch row is one sample's contiguous
// spectrum; this makes datacube flattening a reinterpretation, not a copy.
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using MatF = Mat<float>;
using MatD = Mat<double>;
using VecF = Vec<float>;
using VecD = Vec<double>;

using Index = Eigen::Index;

}  // namespace sdcn
