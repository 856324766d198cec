#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lalec/data.hpp"
#include "lalec/schema.hpp"
#include "lalec/value.hpp"

namespace lalec {

/// Ordered Planned < Trainable < Trained; each state unlocks one more
/// operation (auto_configure, fit, predict).
enum class LifecycleState { Planned = 0, Trainable = 1, Trained = 2 };

const char* state_name(LifecycleState s);

/// Learned coefficients of one fitted individual operator.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;
  /// Transforms (or, for estimators, predicts one label column for) the
  /// inputs. Only merging operators accept more than one input.
  virtual Matrix apply(std::span<const Matrix> inputs) const = 0;
};

struct FitContext {
  std::span<const Matrix> inputs;
  std::span<const int> labels;
  /// Per-row sample weights summing to 1.
  std::span<const double> weights;
  int num_classes = 0;
  std::uint64_t seed = 0;
};

/// fit procedure of an individual operator; `config` is total (defaults
/// filled in) and has already been validated.
class Implementation {
 public:
  virtual ~Implementation() = default;
  virtual std::shared_ptr<const TrainedModel> fit(const Config& config,
                                                  const FitContext& ctx) const = 0;
  /// Whether several predecessor outputs may flow into this operator.
  virtual bool merges_inputs() const { return false; }
};

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// An individual operator, a pipeline DAG of operators, or an exclusive
/// choice between operators. Values are immutable; every transformation
/// returns a new operator and shares unchanged sub-operators.
class Operator {
 public:
  struct Individual {
    std::string name;
    SchemaPtr schema;
    Config bound;
    std::shared_ptr<const Implementation> impl;
    bool captured = false;
    std::shared_ptr<const TrainedModel> trained;
  };
  struct Pipeline {
    std::vector<OperatorRef> steps;
    std::vector<Edge> edges;  // sorted, unique
  };
  struct Choice {
    std::vector<OperatorRef> alternatives;
  };
  enum class Kind { Individual, Pipeline, Choice };

  /// A planned individual operator.
  static Operator individual(std::string name, SchemaPtr schema,
                             std::shared_ptr<const Implementation> impl = {});
  /// Validates acyclicity and edge endpoints.
  static Operator pipeline(std::vector<OperatorRef> steps,
                           std::vector<Edge> edges);

  Kind kind() const { return static_cast<Kind>(node_.index()); }
  bool is_individual() const { return kind() == Kind::Individual; }
  bool is_pipeline() const { return kind() == Kind::Pipeline; }
  bool is_choice() const { return kind() == Kind::Choice; }

  const Individual& as_individual() const { return std::get<Individual>(node_); }
  const Pipeline& as_pipeline() const { return std::get<Pipeline>(node_); }
  const Choice& as_choice() const { return std::get<Choice>(node_); }

  /// Operator name for individuals; "Pipeline" / "Choice" otherwise.
  std::string name() const;

  bool frozen_trainable() const { return frozen_trainable_; }
  bool frozen_trained() const { return frozen_trained_; }

  friend bool operator==(const Operator& a, const Operator& b);

 private:
  Operator();

  friend Operator configure(const Operator&, const Config&);
  friend Operator choose(std::vector<Operator>);
  friend Operator freeze_trainable(const Operator&);
  friend Operator freeze_trained(const Operator&);
  friend Operator customize_schema(const Operator&, const PropertyList&,
                                   std::optional<std::string>);
  friend class OperatorFitter;

  std::variant<Individual, Pipeline, Choice> node_;
  bool frozen_trainable_ = false;
  bool frozen_trained_ = false;
};

OperatorRef share(Operator op);

// Combinators ---------------------------------------------------------------

/// `x >> y`: steps of x then y; edges from every sink of x to every source
/// of y.
Operator pipe(const Operator& x, const Operator& y);
/// `x & y`: disjoint union of the two graphs.
Operator both(const Operator& x, const Operator& y);
/// `x | y | ...`: nested choices are flattened. Throws TooFewAlternatives.
Operator choose(std::vector<Operator> alternatives);

std::vector<std::size_t> sources(const Operator& op);
std::vector<std::size_t> sinks(const Operator& op);
/// Kahn order, ties broken by step index.
std::vector<std::size_t> topological_order(const Operator::Pipeline& p);

// Lifecycle -----------------------------------------------------------------

LifecycleState state_of(const Operator& op);

/// Binds hyperparameters of an individual operator. Every provided value is
/// checked on its own, and the merged binding completed with defaults must
/// satisfy the side constraints. Throws Error(ValidationFailed).
Operator configure(const Operator& op, const Config& partial);
/// Full hyperparameters: declared defaults overlaid with bound values.
Config effective_config(const Operator::Individual& ind);

/// Fills latents with defaults and marks the result as excluded from search.
Operator freeze_trainable(const Operator& op);
/// Marks a trained operator so that fit returns it unchanged. Throws
/// Error(NotTrained).
Operator freeze_trained(const Operator& op);

/// Replaces base property schemas; side constraints are kept. Throws
/// Error(UnknownProperty).
Operator customize_schema(const Operator& op, const PropertyList& overrides,
                          std::optional<std::string> new_name = std::nullopt);

// Fit / predict ---------------------------------------------------------------

struct FitOptions {
  std::uint64_t seed = 0;
};

Operator fit(const Operator& op, const LabeledDataset& data,
             FitOptions options = {});
/// Weighted variant used by boosting; `weights` must sum to 1.
Operator fit_weighted(const Operator& op, const LabeledDataset& data,
                      std::span<const double> weights, int num_classes,
                      FitOptions options = {});
Matrix predict(const Operator& op, const Matrix& features);
/// predict() followed by conversion of the single output column to labels.
std::vector<int> predict_labels(const Operator& op, const Matrix& features);

// Serialization ---------------------------------------------------------------

/// {"operator": name, "config": {...}} for individuals;
/// {"steps": [...], "edges": [[i, j], ...]} for pipelines;
/// {"choice": [...]} for choices.
Json operator_to_json(const Operator& op);

class Registry;
Operator operator_from_json(const Json& j, const Registry& registry);
/// Like config_from_json, but nested {"operator": ...} values resolve
/// through the registry.
Config config_from_json(const Json& j, const Registry& registry);

/// Name → planned individual operator.
class Registry {
 public:
  void add(Operator op);
  const Operator* find(const std::string& name) const;
  const Operator& at(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Operator> ops_;
};

}  // namespace lalec
