#pragma once

#include <vector>

#include <Eigen/Core>

namespace ncdlab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// N x d activations with row-aligned class labels (labels may be empty for
// truly unlabeled data).
struct FeatureMatrix {
  RowMatrix values;
  std::vector<int> labels;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

}  // namespace ncdlab
