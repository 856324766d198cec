#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lalec {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const;
  const std::vector<double>& data() const { return data_; }

  Matrix select_rows(std::span<const std::size_t> idx) const;
  /// Column-wise concatenation; all parts must have equal row counts.
  static Matrix hconcat(std::span<const Matrix> parts);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> column_names;

  std::size_t size() const { return labels.size(); }
  int num_classes() const;
  LabeledDataset subset(std::span<const std::size_t> idx) const;
  /// Throws Error(InvalidArgument) unless n >= 1, d >= 1, labels match rows,
  /// and class ids are contiguous from 0.
  void check() const;
};

}  // namespace lalec
