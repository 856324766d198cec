#include <algorithm>
#include <cmath>

#include "impl.hpp"

namespace lalec::toyml::detail {

namespace {

// Binds defaults on every planned individual so the base can be fit.
Operator with_defaults(const Operator& op) {
  switch (op.kind()) {
    case Operator::Kind::Individual:
      return state_of(op) == LifecycleState::Planned ? configure(op, {}) : op;
    case Operator::Kind::Pipeline: {
      std::vector<OperatorRef> steps;
      for (const auto& s : op.as_pipeline().steps) steps.push_back(share(with_defaults(*s)));
      return Operator::pipeline(std::move(steps), op.as_pipeline().edges);
    }
    case Operator::Kind::Choice: break;
  }
  throw Error(ErrorCode::UnresolvedChoice, "boosting base must not contain a choice");
}

Operator default_stump() {
  static const auto schema =
      parse_schema(R"({"type":"object","additionalProperties":false,"properties":{}})");
  return configure(Operator::individual("DecisionStump", schema, tree(false, true)), {});
}

class EnsembleModel : public TrainedModel {
 public:
  EnsembleModel(std::vector<Operator> models, std::vector<double> alphas, int classes)
      : models_(std::move(models)), alphas_(std::move(alphas)), classes_(classes) {}

  Matrix apply(std::span<const Matrix> inputs) const override {
    const Matrix& x = single_input(inputs, "BoostedEnsemble");
    Matrix votes(x.rows(), static_cast<std::size_t>(classes_));
    for (std::size_t m = 0; m < models_.size(); ++m) {
      auto pred = predict_labels(models_[m], x);
      for (std::size_t r = 0; r < x.rows(); ++r) {
        if (pred[r] >= 0 && pred[r] < classes_) votes(r, static_cast<std::size_t>(pred[r])) += alphas_[m];
      }
    }
    Matrix out(x.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto row = votes.row(r);
      out(r, 0) = static_cast<double>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
  }

 private:
  std::vector<Operator> models_;
  std::vector<double> alphas_;
  int classes_;
};

// SAMME: multi-class AdaBoost with the log(K - 1) correction.
class BoostedEnsembleImpl : public Implementation {
 public:
  std::shared_ptr<const TrainedModel> fit(const Config& cfg,
                                          const FitContext& ctx) const override {
    Operator base = default_stump();
    if (auto it = cfg.find("base"); it != cfg.end() && it->second.is_operator()) {
      base = with_defaults(*it->second.as_operator());
    }
    const int rounds = static_cast<int>(num(cfg, "n_estimators", 10));
    const double rate = num(cfg, "learningRate", 1.0);
    const int k = std::max(ctx.num_classes, 2);

    LabeledDataset ds;
    ds.features = single_input(ctx.inputs, "BoostedEnsemble");
    ds.labels.assign(ctx.labels.begin(), ctx.labels.end());
    std::vector<double> w(ctx.weights.begin(), ctx.weights.end());
    const std::size_t n = ds.size();

    std::vector<Operator> models;
    std::vector<double> alphas;
    for (int m = 0; m < rounds; ++m) {
      Operator trained = fit_weighted(base, ds, w, k, {ctx.seed + static_cast<std::uint64_t>(m)});
      auto pred = predict_labels(trained, ds.features);
      double err = 0;
      for (std::size_t i = 0; i < n; ++i) err += pred[i] != ds.labels[i] ? w[i] : 0.0;
      if (err >= 1.0 - 1.0 / k) {
        if (models.empty()) {
          models.push_back(std::move(trained));
          alphas.push_back(1.0);
        }
        break;
      }
      double e = std::max(err, 1e-10);
      double alpha = rate * (std::log((1 - e) / e) + std::log(k - 1.0));
      models.push_back(std::move(trained));
      alphas.push_back(alpha);
      if (err <= 1e-10) break;
      double total = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (pred[i] != ds.labels[i]) w[i] *= std::exp(alpha);
        total += w[i];
      }
      for (auto& v : w) v /= total;
    }
    return std::make_shared<EnsembleModel>(std::move(models), std::move(alphas), k);
  }
};

}  // namespace

std::shared_ptr<const Implementation> boosted_ensemble() {
  return std::make_shared<BoostedEnsembleImpl>();
}

}  // namespace lalec::toyml::detail
