#include <algorithm>
#include <cmath>
#include <numeric>

#include "impl.hpp"
#include "lalec/rng.hpp"
#include "lalec/toyml/operators.hpp"

namespace lalec::toyml {

Matrix TreeModel::apply(std::span<const Matrix> inputs) const {
  const Matrix& x = detail::single_input(inputs, "tree");
  Matrix out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) out(r, 0) = predict_row(x.row(r));
  return out;
}

int TreeModel::predict_row(std::span<const double> x) const {
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(n.feature) >= x.size()) {
      throw Error(ErrorCode::ShapeMismatch, "tree split on column " + std::to_string(n.feature) +
                                                " but input has " + std::to_string(x.size()));
    }
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(i)].label;
}

std::size_t TreeModel::node_count() const {
  std::size_t count = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    ++count;
    if (n.feature >= 0) {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  return count;
}

int TreeModel::depth() const {
  int best = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.feature >= 0) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    } else {
      best = std::max(best, d);
    }
  }
  return best;
}

double c45_z(double cf) {
  static const double kCf[] = {0, 0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.4, 1.0};
  static const double kZ[] = {4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.0};
  cf = std::clamp(cf, 0.0, 1.0);
  std::size_t i = 1;
  while (i < 8 && kCf[i] < cf) ++i;
  double t = (cf - kCf[i - 1]) / (kCf[i] - kCf[i - 1]);
  return kZ[i - 1] + t * (kZ[i] - kZ[i - 1]);
}

namespace detail {

namespace {

struct TreeParams {
  int max_depth = 5;
  bool reduced_error = false;
  double confidence = 0.25;
  bool prune = true;
};

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0) return 0;
  double s = 1;
  for (double c : counts) s -= (c / total) * (c / total);
  return s;
}

int majority(const std::vector<double>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Upper confidence bound on the error count of a leaf with n (weighted)
// cases and e errors.
double pessimistic_errors(double e, double n, double z) {
  if (n <= 0) return 0;
  double f = e / n;
  double z2 = z * z;
  double ub = (f + z2 / (2 * n) + z * std::sqrt(std::max(0.0, f / n - f * f / n + z2 / (4 * n * n)))) /
              (1 + z2 / n);
  return ub * n;
}

class Builder {
 public:
  Builder(const Matrix& x, std::span<const int> y, std::vector<double> w, int classes,
          int max_depth)
      : x_(x), y_(y), w_(std::move(w)), k_(static_cast<std::size_t>(classes)),
        max_depth_(max_depth) {}

  std::vector<TreeModel::Node> nodes;
  std::vector<std::vector<double>> dist;  // weighted class counts per node

  int grow(std::vector<std::size_t> idx, int depth) {
    int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    std::vector<double> counts(k_, 0.0);
    for (auto i : idx) counts[static_cast<std::size_t>(y_[i])] += w_[i];
    dist.push_back(counts);
    nodes[static_cast<std::size_t>(id)].label = majority(counts);
    double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double parent = gini(counts, total) * total;
    if (depth >= max_depth_ || idx.size() < 2 || parent <= 1e-12) return id;

    double best_gain = 1e-12;
    int best_f = -1;
    double best_t = 0;
    std::vector<std::size_t> order = idx;
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
      std::vector<double> left(k_, 0.0);
      double wl = 0;
      for (std::size_t j = 0; j + 1 < order.size(); ++j) {
        auto i = order[j];
        left[static_cast<std::size_t>(y_[i])] += w_[i];
        wl += w_[i];
        double a = x_(i, f), b = x_(order[j + 1], f);
        if (!(a < b)) continue;
        std::vector<double> right(k_);
        for (std::size_t c = 0; c < k_; ++c) right[c] = counts[c] - left[c];
        double wr = total - wl;
        double gain = parent - gini(left, wl) * wl - gini(right, wr) * wr;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_t = a + (b - a) / 2;
        }
      }
    }
    if (best_f < 0) return id;
    std::vector<std::size_t> li, ri;
    for (auto i : idx) (x_(i, static_cast<std::size_t>(best_f)) <= best_t ? li : ri).push_back(i);
    int l = grow(std::move(li), depth + 1);
    int r = grow(std::move(ri), depth + 1);
    auto& n = nodes[static_cast<std::size_t>(id)];
    n.feature = best_f;
    n.threshold = best_t;
    n.left = l;
    n.right = r;
    return id;
  }

 private:
  const Matrix& x_;
  std::span<const int> y_;
  std::vector<double> w_;
  std::size_t k_;
  int max_depth_;
};

// Returns the pessimistic error estimate of the (possibly pruned) subtree.
double prune_c45(std::vector<TreeModel::Node>& nodes, const std::vector<std::vector<double>>& dist,
                 int id, double z) {
  auto& n = nodes[static_cast<std::size_t>(id)];
  const auto& counts = dist[static_cast<std::size_t>(id)];
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double leaf = pessimistic_errors(total - counts[static_cast<std::size_t>(n.label)], total, z);
  if (n.feature < 0) return leaf;
  double sub = prune_c45(nodes, dist, n.left, z) + prune_c45(nodes, dist, n.right, z);
  if (leaf <= sub + 0.1) {
    nodes[static_cast<std::size_t>(id)].feature = -1;
    return leaf;
  }
  return sub;
}

// Weighted holdout errors of the (possibly pruned) subtree.
double prune_reduced_error(std::vector<TreeModel::Node>& nodes, const Matrix& x,
                           std::span<const int> y, std::span<const double> w,
                           const std::vector<std::size_t>& idx, int id) {
  auto& n = nodes[static_cast<std::size_t>(id)];
  double leaf = 0;
  for (auto i : idx) leaf += y[i] != n.label ? w[i] : 0.0;
  if (n.feature < 0) return leaf;
  std::vector<std::size_t> li, ri;
  for (auto i : idx) (x(i, static_cast<std::size_t>(n.feature)) <= n.threshold ? li : ri).push_back(i);
  int l = n.left, r = n.right;
  double sub = prune_reduced_error(nodes, x, y, w, li, l) + prune_reduced_error(nodes, x, y, w, ri, r);
  if (leaf <= sub) {
    nodes[static_cast<std::size_t>(id)].feature = -1;
    return leaf;
  }
  return sub;
}

class TreeImpl : public Implementation {
 public:
  TreeImpl(bool j48, bool stump) : j48_(j48), stump_(stump) {}

  std::shared_ptr<const TrainedModel> fit(const Config& cfg,
                                          const FitContext& ctx) const override {
    TreeParams p;
    if (stump_) {
      p.max_depth = 1;
      p.prune = false;
    } else {
      p.max_depth = j48_ ? 8 : static_cast<int>(num(cfg, "maxDepth", 5));
      p.reduced_error = flag(cfg, "R", false);
      p.confidence = num(cfg, "C", 0.25);
      if (p.reduced_error && p.confidence != 0.25) {
        throw Error(ErrorCode::ConstraintTrap,
                    "reduced-error pruning requires confidence 0.25, got " +
                        Value(p.confidence).to_literal());
      }
    }
    const Matrix& x = single_input(ctx.inputs, "tree");
    const std::size_t n = x.rows();
    const int classes = std::max(ctx.num_classes, 1);
    std::vector<double> w(ctx.weights.begin(), ctx.weights.end());

    std::vector<std::size_t> grow_idx(n), hold_idx;
    std::iota(grow_idx.begin(), grow_idx.end(), 0);
    bool holdout = p.prune && p.reduced_error && n >= 8;
    if (holdout) {
      Rng rng(ctx.seed ^ 0x7265707275ull);
      for (std::size_t i = n; i > 1; --i) std::swap(grow_idx[i - 1], grow_idx[rng.below(i)]);
      std::size_t h = n / 4;
      hold_idx.assign(grow_idx.begin(), grow_idx.begin() + static_cast<std::ptrdiff_t>(h));
      grow_idx.erase(grow_idx.begin(), grow_idx.begin() + static_cast<std::ptrdiff_t>(h));
      std::sort(hold_idx.begin(), hold_idx.end());
      std::sort(grow_idx.begin(), grow_idx.end());
    }

    Builder b(x, ctx.labels, w, classes, p.max_depth);
    b.grow(grow_idx, 0);
    if (p.prune) {
      if (holdout) {
        prune_reduced_error(b.nodes, x, ctx.labels, w, hold_idx, 0);
      } else if (!p.reduced_error) {
        // Counts scaled so an unweighted fit sees one case per row.
        auto dist = b.dist;
        for (auto& d : dist) {
          for (auto& c : d) c *= static_cast<double>(n);
        }
        prune_c45(b.nodes, dist, 0, c45_z(p.confidence));
      }
    }
    return std::make_shared<TreeModel>(std::move(b.nodes));
  }

 private:
  bool j48_, stump_;
};

}  // namespace

std::shared_ptr<const Implementation> tree(bool j48, bool stump) {
  return std::make_shared<TreeImpl>(j48, stump);
}

}  // namespace detail
}  // namespace lalec::toyml
