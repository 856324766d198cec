#include "lalec/toyml/operators.hpp"

#include <functional>
#include <map>

#include "impl.hpp"

namespace lalec::toyml {

namespace {

using Factory = std::function<std::shared_ptr<const Implementation>()>;

const std::map<std::string, Factory>& table() {
  using namespace detail;
  static const std::map<std::string, Factory> t = {
      {"NoOp", noop},
      {"StandardScaler", standard_scaler},
      {"Scaler", standard_scaler},
      {"MinMaxScaler", minmax_scaler},
      {"SelectKVariance", select_k_variance},
      {"Concat", concat},
      {"ConcatFeatures", concat},
      {"SimpleImputer", simple_imputer},
      {"PCA", pca},
      {"KNN", knn},
      {"LogRegGD", [] { return logreg(false); }},
      {"LR", [] { return logreg(true); }},
      {"PrunedTree", [] { return tree(false, false); }},
      {"J48", [] { return tree(true, false); }},
      {"DecisionStump", [] { return tree(false, true); }},
      {"BoostedEnsemble", boosted_ensemble},
  };
  return t;
}

}  // namespace

std::shared_ptr<const Implementation> make_implementation(const std::string& name) {
  auto it = table().find(name);
  return it == table().end() ? nullptr : it->second();
}

std::vector<std::string> implementation_names() {
  std::vector<std::string> out;
  for (const auto& [name, f] : table()) out.push_back(name);
  return out;
}

}  // namespace lalec::toyml
