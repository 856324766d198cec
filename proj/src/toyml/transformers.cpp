#include <algorithm>
#include <cmath>
#include <numeric>

#include "impl.hpp"
#include "lalec/toyml/operators.hpp"

namespace lalec::toyml {

Matrix AffineModel::apply(std::span<const Matrix> inputs) const {
  const Matrix& x = detail::single_input(inputs, "scaler");
  detail::check_width(x, shift_.size(), "scaler");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - shift_[c]) / scale_[c];
  }
  return out;
}

Matrix AffineModel::inverse_transform(const Matrix& x) const {
  detail::check_width(x, shift_.size(), "scaler");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(r, c) * scale_[c] + shift_[c];
  }
  return out;
}

namespace detail {

namespace {

class IdentityModel : public TrainedModel {
 public:
  Matrix apply(std::span<const Matrix> inputs) const override {
    return single_input(inputs, "NoOp");
  }
};

class NoOpImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config&, const FitContext& ctx) const override {
    single_input(ctx.inputs, "NoOp");
    return std::make_shared<IdentityModel>();
  }
};

std::vector<double> column_means(const Matrix& x) {
  std::vector<double> m(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) m[c] += x(r, c);
  }
  for (auto& v : m) v /= static_cast<double>(x.rows());
  return m;
}

class StandardScalerImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config& cfg,
                                          const FitContext& ctx) const override {
    const Matrix& x = single_input(ctx.inputs, "StandardScaler");
    auto mean = column_means(x);
    std::vector<double> scale(x.cols(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        double d = x(r, c) - mean[c];
        scale[c] += d * d;
      }
    }
    for (auto& s : scale) {
      s = std::sqrt(s / static_cast<double>(x.rows()));
      if (!(s > 0)) s = 1.0;
    }
    if (!flag(cfg, "with_mean", true)) std::fill(mean.begin(), mean.end(), 0.0);
    if (!flag(cfg, "with_std", true)) std::fill(scale.begin(), scale.end(), 1.0);
    return std::make_shared<AffineModel>(std::move(mean), std::move(scale));
  }
};

class MinMaxScalerImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config&, const FitContext& ctx) const override {
    const Matrix& x = single_input(ctx.inputs, "MinMaxScaler");
    std::vector<double> lo(x.cols(), INFINITY), hi(x.cols(), -INFINITY);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        lo[c] = std::min(lo[c], x(r, c));
        hi[c] = std::max(hi[c], x(r, c));
      }
    }
    std::vector<double> scale(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
      scale[c] = hi[c] - lo[c];
      if (!(scale[c] > 0)) scale[c] = 1.0;
    }
    return std::make_shared<AffineModel>(std::move(lo), std::move(scale));
  }
};

class ColumnSelectModel : public TrainedModel {
 public:
  ColumnSelectModel(std::vector<std::size_t> cols, std::size_t width)
      : cols_(std::move(cols)), width_(width) {}
  Matrix apply(std::span<const Matrix> inputs) const override {
    const Matrix& x = single_input(inputs, "SelectKVariance");
    check_width(x, width_, "SelectKVariance");
    Matrix out(x.rows(), cols_.size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t j = 0; j < cols_.size(); ++j) out(r, j) = x(r, cols_[j]);
    }
    return out;
  }

 private:
  std::vector<std::size_t> cols_;
  std::size_t width_;
};

class SelectKVarianceImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config& cfg,
                                          const FitContext& ctx) const override {
    const Matrix& x = single_input(ctx.inputs, "SelectKVariance");
    auto mean = column_means(x);
    std::vector<double> var(x.cols(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        double d = x(r, c) - mean[c];
        var[c] += d * d;
      }
    }
    std::vector<std::size_t> order(x.cols());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
    auto k = static_cast<std::size_t>(std::clamp<double>(num(cfg, "k", 2), 1, x.cols()));
    order.resize(k);
    std::sort(order.begin(), order.end());
    return std::make_shared<ColumnSelectModel>(std::move(order), x.cols());
  }
};

class ConcatModel : public TrainedModel {
 public:
  Matrix apply(std::span<const Matrix> inputs) const override {
    return Matrix::hconcat(inputs);
  }
};

class ConcatImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config&, const FitContext& ctx) const override {
    Matrix::hconcat(ctx.inputs);  // checks row counts
    return std::make_shared<ConcatModel>();
  }
  bool merges_inputs() const override { return true; }
};

class ImputeModel : public TrainedModel {
 public:
  explicit ImputeModel(std::vector<double> fill) : fill_(std::move(fill)) {}
  Matrix apply(std::span<const Matrix> inputs) const override {
    Matrix x = single_input(inputs, "SimpleImputer");
    check_width(x, fill_.size(), "SimpleImputer");
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        if (std::isnan(x(r, c))) x(r, c) = fill_[c];
      }
    }
    return x;
  }

 private:
  std::vector<double> fill_;
};

class SimpleImputerImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config& cfg,
                                          const FitContext& ctx) const override {
    const Matrix& x = single_input(ctx.inputs, "SimpleImputer");
    bool median = str(cfg, "strategy", "mean") == "median";
    std::vector<double> fill(x.cols(), 0.0);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      std::vector<double> vals;
      for (std::size_t r = 0; r < x.rows(); ++r) {
        if (!std::isnan(x(r, c))) vals.push_back(x(r, c));
      }
      if (vals.empty()) continue;
      if (median) {
        std::sort(vals.begin(), vals.end());
        std::size_t m = vals.size() / 2;
        fill[c] = vals.size() % 2 ? vals[m] : (vals[m - 1] + vals[m]) / 2;
      } else {
        fill[c] = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
      }
    }
    return std::make_shared<ImputeModel>(std::move(fill));
  }
};

// Cyclic Jacobi rotations on a symmetric matrix; returns eigenvalues and
// column eigenvectors.
void jacobi(std::vector<double> a, std::size_t n, std::vector<double>& values,
            std::vector<double>& vectors) {
  vectors.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vectors[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off < 1e-22) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        double theta = (a[q * n + q] - a[p * n + p]) / (2 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = vectors[k * n + p], vkq = vectors[k * n + q];
          vectors[k * n + p] = c * vkp - s * vkq;
          vectors[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];
}

class ProjectionModel : public TrainedModel {
 public:
  ProjectionModel(std::vector<double> mean, std::vector<std::vector<double>> components)
      : mean_(std::move(mean)), components_(std::move(components)) {}
  Matrix apply(std::span<const Matrix> inputs) const override {
    const Matrix& x = single_input(inputs, "PCA");
    check_width(x, mean_.size(), "PCA");
    Matrix out(x.rows(), components_.size());
    std::vector<double> centered(x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) centered[c] = x(r, c) - mean_[c];
      for (std::size_t j = 0; j < components_.size(); ++j) {
        double s = 0;
        for (std::size_t c = 0; c < x.cols(); ++c) s += centered[c] * components_[j][c];
        out(r, j) = s;
      }
    }
    return out;
  }

 private:
  std::vector<double> mean_;
  std::vector<std::vector<double>> components_;
};

// N in (0, 1) keeps the fewest components explaining that variance share;
// N = "mle" keeps components whose variance is at least the average.
class PcaImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config& cfg,
                                          const FitContext& ctx) const override {
    const Matrix& x = single_input(ctx.inputs, "PCA");
    std::size_t d = x.cols();
    auto mean = column_means(x);
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t i = 0; i < d; ++i) {
        double di = x(r, i) - mean[i];
        for (std::size_t j = i; j < d; ++j) cov[i * d + j] += di * (x(r, j) - mean[j]);
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        cov[i * d + j] /= static_cast<double>(x.rows());
        cov[j * d + i] = cov[i * d + j];
      }
    }
    std::vector<double> values, vectors;
    jacobi(cov, d, values, vectors);
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    double total = 0;
    for (double v : values) total += std::max(v, 0.0);
    std::size_t keep = 1;
    auto it = cfg.find("N");
    if (total > 0) {
      if (it != cfg.end() && it->second.is_string()) {
        double avg = total / static_cast<double>(d);
        keep = 0;
        for (auto i : order) keep += values[i] >= avg ? 1 : 0;
      } else {
        double frac = it != cfg.end() && it->second.is_number() ? it->second.as_number() : 0.5;
        double acc = 0;
        keep = 0;
        for (auto i : order) {
          acc += std::max(values[i], 0.0);
          ++keep;
          if (acc / total >= frac) break;
        }
      }
    }
    keep = std::clamp<std::size_t>(keep, 1, d);
    std::vector<std::vector<double>> comps;
    for (std::size_t j = 0; j < keep; ++j) {
      std::vector<double> v(d);
      for (std::size_t k = 0; k < d; ++k) v[k] = vectors[k * d + order[j]];
      // Fix the sign so the result does not depend on rotation order.
      auto big = std::max_element(v.begin(), v.end(),
                                  [](double a, double b) { return std::abs(a) < std::abs(b); });
      if (*big < 0) {
        for (auto& e : v) e = -e;
      }
      comps.push_back(std::move(v));
    }
    return std::make_shared<ProjectionModel>(std::move(mean), std::move(comps));
  }
};

}  // namespace

std::shared_ptr<const Implementation> noop() { return std::make_shared<NoOpImpl>(); }
std::shared_ptr<const Implementation> standard_scaler() {
  return std::make_shared<StandardScalerImpl>();
}
std::shared_ptr<const Implementation> minmax_scaler() {
  return std::make_shared<MinMaxScalerImpl>();
}
std::shared_ptr<const Implementation> select_k_variance() {
  return std::make_shared<SelectKVarianceImpl>();
}
std::shared_ptr<const Implementation> concat() { return std::make_shared<ConcatImpl>(); }
std::shared_ptr<const Implementation> simple_imputer() {
  return std::make_shared<SimpleImputerImpl>();
}
std::shared_ptr<const Implementation> pca() { return std::make_shared<PcaImpl>(); }

}  // namespace detail
}  // namespace lalec::toyml
