#include <algorithm>
#include <cmath>
#include <numeric>

#include "impl.hpp"
#include "lalec/rng.hpp"
#include "lalec/toyml/kernels.hpp"

namespace lalec::toyml::detail {

namespace {

// KNN -------------------------------------------------------------------------

class KnnModel : public TrainedModel {
 public:
  KnnModel(Matrix x, std::vector<int> y, std::vector<double> w, int classes, std::size_t k,
           bool by_distance)
      : x_(std::move(x)), y_(std::move(y)), w_(std::move(w)), classes_(classes), k_(k),
        by_distance_(by_distance) {}

  Matrix apply(std::span<const Matrix> inputs) const override {
    const Matrix& q = single_input(inputs, "KNN");
    check_width(q, x_.cols(), "KNN");
    Matrix out(q.rows(), 1);
    std::vector<std::pair<double, std::size_t>> dist(x_.rows());
    std::size_t k = std::min(k_, x_.rows());
    for (std::size_t r = 0; r < q.rows(); ++r) {
      for (std::size_t i = 0; i < x_.rows(); ++i) {
        dist[i] = {kernels::squared_l2(q.row(r).data(), x_.row(i).data(), q.cols()), i};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      std::vector<double> votes(static_cast<std::size_t>(classes_), 0.0);
      bool exact = by_distance_ && dist[0].first == 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        auto [d2, i] = dist[j];
        double v = w_[i];
        if (by_distance_) {
          if (exact) {
            if (d2 != 0.0) continue;
          } else {
            v /= std::sqrt(d2);
          }
        }
        votes[static_cast<std::size_t>(y_[i])] += v;
      }
      out(r, 0) = static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
  }

 private:
  Matrix x_;
  std::vector<int> y_;
  std::vector<double> w_;
  int classes_;
  std::size_t k_;
  bool by_distance_;
};

class KnnImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config& cfg,
                                          const FitContext& ctx) const override {
    const Matrix& x = single_input(ctx.inputs, "KNN");
    std::vector<double> w(ctx.weights.begin(), ctx.weights.end());
    // Rescale so an unweighted fit counts each neighbour as one vote.
    for (auto& v : w) v *= static_cast<double>(w.size());
    auto k = static_cast<std::size_t>(std::max(1.0, num(cfg, "k", 5)));
    return std::make_shared<KnnModel>(x, std::vector<int>(ctx.labels.begin(), ctx.labels.end()),
                                      std::move(w), std::max(ctx.num_classes, 1), k,
                                      str(cfg, "weighting", "uniform") == "distance");
  }
};

// Logistic regression ---------------------------------------------------------

class SoftmaxModel : public TrainedModel {
 public:
  SoftmaxModel(std::vector<double> w, std::vector<double> b, std::size_t d)
      : w_(std::move(w)), b_(std::move(b)), d_(d) {}

  Matrix apply(std::span<const Matrix> inputs) const override {
    const Matrix& x = single_input(inputs, "LogRegGD");
    check_width(x, d_, "LogRegGD");
    Matrix out(x.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      std::size_t best = 0;
      double best_s = -INFINITY;
      for (std::size_t c = 0; c < b_.size(); ++c) {
        double s = b_[c] + kernels::dot(w_.data() + c * d_, x.row(r).data(), d_);
        if (s > best_s) {
          best_s = s;
          best = c;
        }
      }
      out(r, 0) = static_cast<double>(best);
    }
    return out;
  }

 private:
  std::vector<double> w_, b_;  // w_ is classes x d, row-major
  std::size_t d_;
};

struct LogRegParams {
  double learning_rate = 0.1;
  int iterations = 100;
  bool l1 = false;
  double alpha = 1e-4;
  bool sgd = false;
};

class LogRegImpl : public Implementation {
 public:
  explicit LogRegImpl(bool aliased) : aliased_(aliased) {}

  std::shared_ptr<const TrainedModel> fit(const Config& cfg,
                                          const FitContext& ctx) const override {
    LogRegParams p;
    if (aliased_) {
      std::string s = str(cfg, "S", "linear");
      p.l1 = str(cfg, "P", "l2") == "l1";
      p.sgd = s == "sag";
      if (p.l1 && s != "linear") {
        throw Error(ErrorCode::ConstraintTrap, "solver " + s + " does not support penalty l1");
      }
    } else {
      p.learning_rate = num(cfg, "learningRate", 0.1);
      p.iterations = static_cast<int>(num(cfg, "iterations", 100));
      p.l1 = str(cfg, "penalty", "l2") == "l1";
      p.alpha = num(cfg, "alpha", 1e-4);
      p.sgd = str(cfg, "solver", "gd") == "sgd";
      if (p.l1 && p.sgd) {
        throw Error(ErrorCode::ConstraintTrap, "solver sgd does not support penalty l1");
      }
    }
    return train(p, ctx);
  }

 private:
  static std::shared_ptr<const TrainedModel> train(const LogRegParams& p, const FitContext& ctx) {
    const Matrix& x = single_input(ctx.inputs, "LogRegGD");
    const std::size_t n = x.rows(), d = x.cols();
    const std::size_t k = static_cast<std::size_t>(std::max(2, ctx.num_classes));
    std::vector<double> w(k * d, 0.0), b(k, 0.0);
    std::vector<double> gw(k * d), gb(k), prob(k);

    auto probabilities = [&](std::size_t r) {
      double mx = -INFINITY;
      for (std::size_t c = 0; c < k; ++c) {
        prob[c] = b[c] + kernels::dot(w.data() + c * d, x.row(r).data(), d);
        mx = std::max(mx, prob[c]);
      }
      double z = 0;
      for (auto& v : prob) z += (v = std::exp(v - mx));
      for (auto& v : prob) v /= z;
    };
    auto regularize = [&]() {
      for (std::size_t i = 0; i < w.size(); ++i) {
        gw[i] += p.l1 ? p.alpha * ((w[i] > 0) - (w[i] < 0)) : p.alpha * w[i];
      }
    };
    auto step = [&]() {
      kernels::axpy(-p.learning_rate, gw.data(), w.data(), w.size());
      kernels::axpy(-p.learning_rate, gb.data(), b.data(), b.size());
    };
    // Accumulates scale * (p - onehot) x for row r.
    auto accumulate = [&](std::size_t r, double scale) {
      probabilities(r);
      for (std::size_t c = 0; c < k; ++c) {
        double g = scale * (prob[c] - (static_cast<std::size_t>(ctx.labels[r]) == c ? 1.0 : 0.0));
        kernels::axpy(g, x.row(r).data(), gw.data() + c * d, d);
        gb[c] += g;
      }
    };

    if (!p.sgd) {
      for (int it = 0; it < p.iterations; ++it) {
        std::fill(gw.begin(), gw.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) accumulate(r, ctx.weights[r]);
        regularize();
        step();
      }
    } else {
      Rng rng(ctx.seed);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      for (int it = 0; it < p.iterations; ++it) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (auto r : order) {
          std::fill(gw.begin(), gw.end(), 0.0);
          std::fill(gb.begin(), gb.end(), 0.0);
          accumulate(r, ctx.weights[r] * static_cast<double>(n));
          regularize();
          step();
        }
      }
    }
    return std::make_shared<SoftmaxModel>(std::move(w), std::move(b), d);
  }

  bool aliased_;
};

}  // namespace

std::shared_ptr<const Implementation> knn() { return std::make_shared<KnnImpl>(); }
std::shared_ptr<const Implementation> logreg(bool aliased) {
  return std::make_shared<LogRegImpl>(aliased);
}

}  // namespace lalec::toyml::detail
