#include "lalec/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

#include "lalec/error.hpp"

namespace lalec {

const char* state_name(LifecycleState s) {
  switch (s) {
    case LifecycleState::Planned: return "planned";
    case LifecycleState::Trainable: return "trainable";
    case LifecycleState::Trained: return "trained";
  }
  return "?";
}

OperatorRef share(Operator op) {
  return std::make_shared<const Operator>(std::move(op));
}

Operator::Operator() : node_(Individual{}) {}

Operator Operator::individual(std::string name, SchemaPtr schema,
                              std::shared_ptr<const Implementation> impl) {
  if (!schema) {
    throw Error(ErrorCode::InvalidArgument, "operator '" + name + "' has no schema");
  }
  Operator op;
  op.node_ = Individual{std::move(name), std::move(schema), {}, std::move(impl),
                        false, nullptr};
  return op;
}

namespace {

void check_acyclic(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& e : edges) {
    if (e.from >= n || e.to >= n) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    }
    succ[e.from].push_back(e.to);
    ++indeg[e.to];
  }
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) stack.push_back(i);
  }
  std::size_t seen = 0;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    ++seen;
    for (auto w : succ[v]) {
      if (--indeg[w] == 0) stack.push_back(w);
    }
  }
  if (seen != n) throw Error(ErrorCode::InvalidArgument, "pipeline has a cycle");
}

}  // namespace

Operator Operator::pipeline(std::vector<OperatorRef> steps,
                            std::vector<Edge> edges) {
  if (steps.empty()) {
    throw Error(ErrorCode::InvalidArgument, "pipeline needs at least one step");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  check_acyclic(steps.size(), edges);
  Operator op;
  op.node_ = Pipeline{std::move(steps), std::move(edges)};
  return op;
}

std::string Operator::name() const {
  switch (kind()) {
    case Kind::Individual: return as_individual().name;
    case Kind::Pipeline: return "Pipeline";
    case Kind::Choice: return "Choice";
  }
  return "";
}

bool operator==(const Operator& a, const Operator& b) {
  if (a.kind() != b.kind() || a.frozen_trainable_ != b.frozen_trainable_ ||
      a.frozen_trained_ != b.frozen_trained_) {
    return false;
  }
  auto same_list = [](const std::vector<OperatorRef>& x,
                      const std::vector<OperatorRef>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != y[i] && !(*x[i] == *y[i])) return false;
    }
    return true;
  };
  switch (a.kind()) {
    case Operator::Kind::Individual: {
      const auto& x = a.as_individual();
      const auto& y = b.as_individual();
      return x.name == y.name &&
             (x.schema == y.schema || *x.schema == *y.schema) &&
             x.bound == y.bound && x.impl == y.impl &&
             x.captured == y.captured && x.trained == y.trained;
    }
    case Operator::Kind::Pipeline:
      return a.as_pipeline().edges == b.as_pipeline().edges &&
             same_list(a.as_pipeline().steps, b.as_pipeline().steps);
    case Operator::Kind::Choice:
      return same_list(a.as_choice().alternatives, b.as_choice().alternatives);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Combinators

namespace {

struct Graph {
  std::vector<OperatorRef> steps;
  std::vector<Edge> edges;
};

Graph as_graph(const Operator& op) {
  if (op.is_pipeline()) {
    return {op.as_pipeline().steps, op.as_pipeline().edges};
  }
  return {{share(op)}, {}};
}

std::vector<std::size_t> graph_sources(const Graph& g) {
  std::vector<bool> has_pred(g.steps.size(), false);
  for (const auto& e : g.edges) has_pred[e.to] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.steps.size(); ++i) {
    if (!has_pred[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> graph_sinks(const Graph& g) {
  std::vector<bool> has_succ(g.steps.size(), false);
  for (const auto& e : g.edges) has_succ[e.from] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.steps.size(); ++i) {
    if (!has_succ[i]) out.push_back(i);
  }
  return out;
}

Graph merge(const Graph& x, const Graph& y) {
  Graph g = x;
  std::size_t off = x.steps.size();
  g.steps.insert(g.steps.end(), y.steps.begin(), y.steps.end());
  for (const auto& e : y.edges) g.edges.push_back({e.from + off, e.to + off});
  return g;
}

}  // namespace

std::vector<std::size_t> sources(const Operator& op) {
  return graph_sources(as_graph(op));
}

std::vector<std::size_t> sinks(const Operator& op) {
  return graph_sinks(as_graph(op));
}

Operator pipe(const Operator& x, const Operator& y) {
  Graph gx = as_graph(x);
  Graph gy = as_graph(y);
  Graph g = merge(gx, gy);
  std::size_t off = gx.steps.size();
  for (auto s : graph_sinks(gx)) {
    for (auto t : graph_sources(gy)) g.edges.push_back({s, t + off});
  }
  return Operator::pipeline(std::move(g.steps), std::move(g.edges));
}

Operator both(const Operator& x, const Operator& y) {
  Graph g = merge(as_graph(x), as_graph(y));
  return Operator::pipeline(std::move(g.steps), std::move(g.edges));
}

Operator choose(std::vector<Operator> alternatives) {
  std::vector<OperatorRef> flat;
  for (auto& alt : alternatives) {
    if (alt.is_choice()) {
      for (const auto& a : alt.as_choice().alternatives) flat.push_back(a);
    } else {
      flat.push_back(share(std::move(alt)));
    }
  }
  if (flat.size() < 2) {
    throw Error(ErrorCode::TooFewAlternatives,
                "a choice needs at least two alternatives");
  }
  Operator op;
  op.node_ = Operator::Choice{std::move(flat)};
  return op;
}

std::vector<std::size_t> topological_order(const Operator::Pipeline& p) {
  std::size_t n = p.steps.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& e : p.edges) {
    succ[e.from].push_back(e.to);
    ++indeg[e.to];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    order.push_back(v);
    for (auto w : succ[v]) {
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  return order;
}

// ---------------------------------------------------------------------------
// Lifecycle

LifecycleState state_of(const Operator& op) {
  switch (op.kind()) {
    case Operator::Kind::Individual: {
      const auto& ind = op.as_individual();
      if (ind.trained) return LifecycleState::Trained;
      return ind.captured ? LifecycleState::Trainable : LifecycleState::Planned;
    }
    case Operator::Kind::Pipeline: {
      auto s = LifecycleState::Trained;
      for (const auto& st : op.as_pipeline().steps) s = std::min(s, state_of(*st));
      return s;
    }
    case Operator::Kind::Choice: {
      auto s = LifecycleState::Trained;
      for (const auto& a : op.as_choice().alternatives) s = std::min(s, state_of(*a));
      return s;
    }
  }
  return LifecycleState::Planned;
}

Config effective_config(const Operator::Individual& ind) {
  Config c;
  for (const auto& [name, prop] : declared_domains(*ind.schema)) {
    if (prop->default_value()) c.emplace(name, *prop->default_value());
  }
  for (const auto& [k, v] : ind.bound) c.insert_or_assign(k, v);
  return c;
}

Operator configure(const Operator& op, const Config& partial) {
  if (!op.is_individual()) {
    throw Error(ErrorCode::InvalidArgument,
                "configure applies to individual operators, not " + op.name());
  }
  const auto& ind = op.as_individual();
  if (ind.trained) {
    if (partial.empty()) return op;
    throw Error(ErrorCode::InvalidArgument,
                "cannot rebind hyperparameters of trained operator " + ind.name);
  }
  Config merged = ind.bound;
  for (const auto& [k, v] : partial) merged.insert_or_assign(k, v);

  auto report = validate(merged, *ind.schema);
  if (report.ok) {
    Config completed = effective_config(ind);
    for (const auto& [k, v] : merged) completed.insert_or_assign(k, v);
    report = validate(completed, *ind.schema);
  }
  if (!report.ok) {
    throw Error(ErrorCode::ValidationFailed,
                "invalid hyperparameters for " + ind.name + ": " +
                    report.to_string());
  }
  Operator out = op;
  auto& o = std::get<Operator::Individual>(out.node_);
  o.bound = std::move(merged);
  o.captured = true;
  return out;
}

Operator freeze_trainable(const Operator& op) {
  Operator out = op;
  switch (op.kind()) {
    case Operator::Kind::Individual: {
      if (state_of(op) < LifecycleState::Trainable) {
        throw Error(ErrorCode::NotTrainable,
                    "freeze_trainable needs a trainable operator: " + op.name());
      }
      auto& o = std::get<Operator::Individual>(out.node_);
      o.bound = effective_config(o);
      break;
    }
    case Operator::Kind::Pipeline: {
      auto& p = std::get<Operator::Pipeline>(out.node_);
      for (auto& s : p.steps) s = share(freeze_trainable(*s));
      break;
    }
    case Operator::Kind::Choice: {
      auto& c = std::get<Operator::Choice>(out.node_);
      for (auto& a : c.alternatives) a = share(freeze_trainable(*a));
      break;
    }
  }
  out.frozen_trainable_ = true;
  return out;
}

Operator freeze_trained(const Operator& op) {
  if (state_of(op) != LifecycleState::Trained) {
    throw Error(ErrorCode::NotTrained, "freeze_trained needs a trained operator");
  }
  Operator out = op;
  if (op.is_pipeline()) {
    auto& p = std::get<Operator::Pipeline>(out.node_);
    for (auto& s : p.steps) s = share(freeze_trained(*s));
  }
  out.frozen_trained_ = true;
  return out;
}

Operator customize_schema(const Operator& op, const PropertyList& overrides,
                          std::optional<std::string> new_name) {
  if (!op.is_individual()) {
    throw Error(ErrorCode::InvalidArgument,
                "customize_schema applies to individual operators");
  }
  Operator out = op;
  auto& o = std::get<Operator::Individual>(out.node_);
  if (!overrides.empty()) o.schema = replace_properties(*o.schema, overrides);
  if (new_name) o.name = *new_name;
  return out;
}

// ---------------------------------------------------------------------------
// Fit / predict

namespace {

bool contains_choice(const Operator& op) {
  if (op.is_choice()) return true;
  if (op.is_pipeline()) {
    for (const auto& s : op.as_pipeline().steps) {
      if (contains_choice(*s)) return true;
    }
  }
  return false;
}

std::vector<std::vector<std::size_t>> predecessors(const Operator::Pipeline& p) {
  std::vector<std::vector<std::size_t>> preds(p.steps.size());
  for (const auto& e : p.edges) preds[e.to].push_back(e.from);
  for (auto& v : preds) std::sort(v.begin(), v.end());
  return preds;
}

Matrix apply_op(const Operator& op, std::span<const Matrix> inputs);

std::vector<Matrix> gather(const std::vector<std::size_t>& preds,
                           const std::vector<Matrix>& outputs,
                           std::span<const Matrix> inputs) {
  if (preds.empty()) return {inputs.begin(), inputs.end()};
  std::vector<Matrix> in;
  in.reserve(preds.size());
  for (auto p : preds) in.push_back(outputs[p]);
  return in;
}

Matrix sink_output(const Operator::Pipeline& p, std::vector<Matrix>& outputs) {
  std::vector<bool> has_succ(p.steps.size(), false);
  for (const auto& e : p.edges) has_succ[e.from] = true;
  std::vector<Matrix> parts;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    if (!has_succ[i]) parts.push_back(std::move(outputs[i]));
  }
  if (parts.size() == 1) return std::move(parts.front());
  return Matrix::hconcat(parts);
}

Matrix apply_op(const Operator& op, std::span<const Matrix> inputs) {
  switch (op.kind()) {
    case Operator::Kind::Individual: {
      const auto& ind = op.as_individual();
      if (!ind.trained) {
        throw Error(ErrorCode::NotTrained, ind.name + " is not trained");
      }
      return ind.trained->apply(inputs);
    }
    case Operator::Kind::Pipeline: {
      const auto& p = op.as_pipeline();
      auto preds = predecessors(p);
      std::vector<Matrix> outputs(p.steps.size());
      for (auto i : topological_order(p)) {
        auto in = gather(preds[i], outputs, inputs);
        outputs[i] = apply_op(*p.steps[i], in);
      }
      return sink_output(p, outputs);
    }
    case Operator::Kind::Choice:
      throw Error(ErrorCode::UnresolvedChoice, "cannot apply an operator choice");
  }
  return {};
}

}  // namespace

class OperatorFitter {
 public:
  OperatorFitter(std::span<const int> labels, std::span<const double> weights,
                 int num_classes, std::uint64_t seed)
      : labels_(labels), weights_(weights), k_(num_classes), seed_(seed) {}

  /// Returns the trained operator and its output on the training inputs.
  std::pair<Operator, Matrix> fit(const Operator& op,
                                  std::span<const Matrix> inputs) const {
    if (op.frozen_trained() && state_of(op) == LifecycleState::Trained) {
      return {op, apply_op(op, inputs)};
    }
    switch (op.kind()) {
      case Operator::Kind::Individual: return fit_individual(op, inputs);
      case Operator::Kind::Pipeline: return fit_pipeline(op, inputs);
      case Operator::Kind::Choice:
        throw Error(ErrorCode::UnresolvedChoice,
                    "cannot fit an unresolved operator choice");
    }
    return {op, {}};
  }

 private:
  std::pair<Operator, Matrix> fit_individual(const Operator& op,
                                             std::span<const Matrix> inputs) const {
    const auto& ind = op.as_individual();
    if (!ind.captured) {
      throw Error(ErrorCode::NotTrainable,
                  ind.name + " is planned; configure it before fitting");
    }
    if (!ind.impl) {
      throw Error(ErrorCode::ImplementationError,
                  ind.name + " has no implementation");
    }
    if (inputs.size() != 1 && !ind.impl->merges_inputs()) {
      throw Error(ErrorCode::ShapeMismatch,
                  ind.name + " received " + std::to_string(inputs.size()) +
                      " inputs; use Concat to merge predecessor outputs");
    }
    FitContext ctx{inputs, labels_, weights_, k_, seed_};
    auto trained = ind.impl->fit(effective_config(ind), ctx);
    Operator out = op;
    auto& o = std::get<Operator::Individual>(out.node_);
    o.trained = std::move(trained);
    Matrix result = o.trained->apply(inputs);
    return {std::move(out), std::move(result)};
  }

  std::pair<Operator, Matrix> fit_pipeline(const Operator& op,
                                           std::span<const Matrix> inputs) const {
    const auto& p = op.as_pipeline();
    auto preds = predecessors(p);
    std::vector<Matrix> outputs(p.steps.size());
    std::vector<OperatorRef> trained(p.steps.size());
    for (auto i : topological_order(p)) {
      auto in = gather(preds[i], outputs, inputs);
      auto [t, out] = fit(*p.steps[i], in);
      trained[i] = share(std::move(t));
      outputs[i] = std::move(out);
    }
    Operator result = op;
    std::get<Operator::Pipeline>(result.node_).steps = std::move(trained);
    return {std::move(result), sink_output(p, outputs)};
  }

  std::span<const int> labels_;
  std::span<const double> weights_;
  int k_;
  std::uint64_t seed_;
};

Operator fit_weighted(const Operator& op, const LabeledDataset& data,
                      std::span<const double> weights, int num_classes,
                      FitOptions options) {
  if (data.features.rows() < 1 || data.features.cols() < 1 ||
      data.labels.size() != data.features.rows() || weights.size() != data.labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "dataset, labels and weights must agree in size");
  }
  for (int y : data.labels) {
    if (y < 0 || y >= num_classes) {
      throw Error(ErrorCode::InvalidArgument, "label outside [0, num_classes)");
    }
  }
  if (contains_choice(op)) {
    throw Error(ErrorCode::UnresolvedChoice,
                "cannot fit an operator with unresolved choices");
  }
  if (op.frozen_trained() && state_of(op) == LifecycleState::Trained) return op;
  if (state_of(op) < LifecycleState::Trainable) {
    throw Error(ErrorCode::NotTrainable,
                "operator is planned; auto_configure or configure it first");
  }
  OperatorFitter fitter(data.labels, weights, num_classes, options.seed);
  std::vector<Matrix> inputs{data.features};
  return fitter.fit(op, inputs).first;
}

Operator fit(const Operator& op, const LabeledDataset& data, FitOptions options) {
  data.check();
  std::vector<double> w(data.size(), 1.0 / static_cast<double>(data.size()));
  return fit_weighted(op, data, w, data.num_classes(), options);
}

Matrix predict(const Operator& op, const Matrix& features) {
  if (state_of(op) != LifecycleState::Trained) {
    throw Error(ErrorCode::NotTrained, "predict needs a trained operator");
  }
  std::vector<Matrix> inputs{features};
  return apply_op(op, inputs);
}

std::vector<int> predict_labels(const Operator& op, const Matrix& features) {
  Matrix out = predict(op, features);
  if (out.cols() != 1) {
    throw Error(ErrorCode::ShapeMismatch,
                "operator output has " + std::to_string(out.cols()) +
                    " columns; expected one label column");
  }
  std::vector<int> labels(out.rows());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    labels[i] = static_cast<int>(std::lround(out(i, 0)));
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Serialization and registry

Json operator_to_json(const Operator& op) {
  switch (op.kind()) {
    case Operator::Kind::Individual: {
      const auto& ind = op.as_individual();
      Json j = Json::object();
      j["operator"] = ind.name;
      // Planned operators carry no config, so they read back as planned.
      if (ind.captured) j["config"] = config_to_json(effective_config(ind));
      return j;
    }
    case Operator::Kind::Pipeline: {
      const auto& p = op.as_pipeline();
      Json steps = Json::array();
      for (const auto& s : p.steps) steps.push_back(operator_to_json(*s));
      Json edges = Json::array();
      for (const auto& e : p.edges) edges.push_back({e.from, e.to});
      return Json{{"steps", steps}, {"edges", edges}};
    }
    case Operator::Kind::Choice: {
      Json alts = Json::array();
      for (const auto& a : op.as_choice().alternatives) {
        alts.push_back(operator_to_json(*a));
      }
      return Json{{"choice", alts}};
    }
  }
  return nullptr;
}

Config config_from_json(const Json& j, const Registry& registry) {
  if (!j.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  }
  Config c;
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      c.emplace(k, Value(share(operator_from_json(v, registry))));
    } else {
      c.emplace(k, value_from_json(v));
    }
  }
  return c;
}

Operator operator_from_json(const Json& j, const Registry& registry) {
  if (j.contains("operator")) {
    const auto& base = registry.at(j["operator"].get<std::string>());
    if (!j.contains("config")) return base;
    return configure(base, config_from_json(j["config"], registry));
  }
  if (j.contains("steps")) {
    std::vector<OperatorRef> steps;
    for (const auto& s : j["steps"]) steps.push_back(share(operator_from_json(s, registry)));
    std::vector<Edge> edges;
    for (const auto& e : j.value("edges", Json::array())) {
      edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()});
    }
    if (steps.size() == 1 && edges.empty()) return *steps.front();
    return Operator::pipeline(std::move(steps), std::move(edges));
  }
  if (j.contains("choice")) {
    std::vector<Operator> alts;
    for (const auto& a : j["choice"]) alts.push_back(operator_from_json(a, registry));
    return choose(std::move(alts));
  }
  throw Error(ErrorCode::InvalidArgument, "not an operator document: " + j.dump());
}

void Registry::add(Operator op) {
  auto name = op.name();
  ops_.insert_or_assign(name, std::move(op));
}

const Operator* Registry::find(const std::string& name) const {
  auto it = ops_.find(name);
  return it == ops_.end() ? nullptr : &it->second;
}

const Operator& Registry::at(const std::string& name) const {
  if (const auto* op = find(name)) return *op;
  throw Error(ErrorCode::UnknownOperator, "unknown operator '" + name + "'");
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : ops_) out.push_back(k);
  return out;
}

}  // namespace lalec
