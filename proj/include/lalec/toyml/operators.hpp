#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lalec/operator.hpp"

namespace lalec::toyml {

/// Built-in fit/predict procedure for an operator name, or null. Besides the
/// toy operators this covers PCA, J48 (PrunedTree with only R and C) and LR
/// (LogRegGD with solver S and penalty P).
std::shared_ptr<const Implementation> make_implementation(const std::string& name);
std::vector<std::string> implementation_names();

/// Column-wise affine transform x' = (x - shift) / scale.
class AffineModel : public TrainedModel {
 public:
  AffineModel(std::vector<double> shift, std::vector<double> scale)
      : shift_(std::move(shift)), scale_(std::move(scale)) {}
  Matrix apply(std::span<const Matrix> inputs) const override;
  Matrix inverse_transform(const Matrix& x) const;

 private:
  std::vector<double> shift_, scale_;
};

/// Axis-aligned binary tree over weighted Gini splits.
class TreeModel : public TrainedModel {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0;
    int left = -1;
    int right = -1;
    int label = 0;
  };

  explicit TreeModel(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
  Matrix apply(std::span<const Matrix> inputs) const override;
  int predict_row(std::span<const double> x) const;
  /// Reachable nodes.
  std::size_t node_count() const;
  int depth() const;

 private:
  std::vector<Node> nodes_;
};

/// z-score of the one-sided C4.5 confidence `cf`, by linear interpolation
/// of the C4.5 table.
double c45_z(double cf);

}  // namespace lalec::toyml
