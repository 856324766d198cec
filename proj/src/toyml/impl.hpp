#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lalec/error.hpp"
#include "lalec/operator.hpp"

namespace lalec::toyml::detail {

inline double num(const Config& c, const char* key, double def) {
  auto it = c.find(key);
  return it != c.end() && it->second.is_number() ? it->second.as_number() : def;
}

inline std::string str(const Config& c, const char* key, std::string def) {
  auto it = c.find(key);
  return it != c.end() && it->second.is_string() ? it->second.as_string() : def;
}

inline bool flag(const Config& c, const char* key, bool def) {
  auto it = c.find(key);
  return it != c.end() && it->second.is_bool() ? it->second.as_bool() : def;
}

inline const Matrix& single_input(std::span<const Matrix> inputs, const char* who) {
  if (inputs.size() != 1) {
    throw Error(ErrorCode::ShapeMismatch, std::string(who) + " expects exactly one input");
  }
  return inputs.front();
}

inline Matrix label_column(const std::vector<int>& labels) {
  Matrix out(labels.size(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) out(i, 0) = labels[i];
  return out;
}

inline void check_width(const Matrix& x, std::size_t cols, const char* who) {
  if (x.cols() != cols) {
    throw Error(ErrorCode::ShapeMismatch, std::string(who) + " was fit on " +
                                              std::to_string(cols) + " columns, got " +
                                              std::to_string(x.cols()));
  }
}

std::shared_ptr<const Implementation> noop();
std::shared_ptr<const Implementation> standard_scaler();
std::shared_ptr<const Implementation> minmax_scaler();
std::shared_ptr<const Implementation> select_k_variance();
std::shared_ptr<const Implementation> concat();
std::shared_ptr<const Implementation> simple_imputer();
std::shared_ptr<const Implementation> pca();
std::shared_ptr<const Implementation> knn();
/// `aliased` selects the LR key spelling (S, P) instead of LogRegGD's.
std::shared_ptr<const Implementation> logreg(bool aliased);
/// `j48` reads only R and C; `stump` fixes depth 1 without pruning.
std::shared_ptr<const Implementation> tree(bool j48, bool stump);
std::shared_ptr<const Implementation> boosted_ensemble();

}  // namespace lalec::toyml::detail
