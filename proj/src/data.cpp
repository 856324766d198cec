#include "lalec/data.hpp"

#include <algorithm>
#include <set>

#include "lalec/error.hpp"

namespace lalec {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch, "matrix data size mismatch");
  }
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto src = row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix Matrix::hconcat(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw Error(ErrorCode::ShapeMismatch,
                  "cannot concatenate inputs with different row counts");
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t c0 = 0;
    for (const auto& p : parts) {
      auto src = p.row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + c0);
      c0 += p.cols();
    }
  }
  return out;
}

int LabeledDataset::num_classes() const {
  int k = 0;
  for (int y : labels) k = std::max(k, y + 1);
  return k;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> idx) const {
  LabeledDataset out;
  out.features = features.select_rows(idx);
  out.labels.reserve(idx.size());
  for (auto i : idx) out.labels.push_back(labels[i]);
  out.column_names = column_names;
  return out;
}

void LabeledDataset::check() const {
  if (features.rows() < 1 || features.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "dataset must be nonempty");
  }
  if (labels.size() != features.rows()) {
    throw Error(ErrorCode::InvalidArgument, "label count does not match rows");
  }
  std::set<int> seen(labels.begin(), labels.end());
  int expect = 0;
  for (int y : seen) {
    if (y != expect++) {
      throw Error(ErrorCode::InvalidArgument,
                  "class ids must be contiguous from 0");
    }
  }
}

}  // namespace lalec
