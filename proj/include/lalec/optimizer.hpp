#pragma once

#include <cfloat>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lalec/space.hpp"

namespace lalec {

enum class TrialStatus { Valid, InvalidConfig, RuntimeError };
const char* trial_status_name(TrialStatus s);

struct Evaluation {
  double loss = 0;
  TrialStatus status = TrialStatus::Valid;
  std::string message;
};

/// Lower loss is better. Exceptions escaping the objective are recorded as
/// runtime errors.
using Objective = std::function<Evaluation(const Point&)>;

struct Trial {
  std::size_t index = 0;
  Point point;
  double loss = 0;
  TrialStatus status = TrialStatus::Valid;
  std::string message;
  double elapsed = 0;  // seconds
  /// Top-level choice branch (discriminant value) when the space has one.
  std::string branch;
};

struct History {
  std::vector<Trial> trials;
  std::optional<std::size_t> best;
  std::uint64_t seed = 0;
  std::string digest;
  std::string strategy;

  std::size_t failed_count() const;
  std::size_t count(TrialStatus s) const;
  /// Best valid loss after each trial (penalty until the first valid one).
  std::vector<double> best_so_far(double penalty = DBL_MAX) const;
};

enum class Strategy { Random, Grid, Bandit };
const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& s);

struct OptimizerSpec {
  Strategy strategy = Strategy::Random;
  std::size_t max_trials = 100;
  std::uint64_t seed = 0;
  double bandit_epsilon = 0.1;
  /// Loss recorded for failed trials.
  double penalty = DBL_MAX;
  /// Concurrent objective evaluations; the bandit requires 1.
  std::size_t jobs = 1;
};

/// max_trials seeded draws from the space (one default point if the space
/// has no dimensions).
History random_search(const SearchIR& ir, const Objective& objective, const OptimizerSpec& spec);
/// Every cell in order. Throws Error(GridTooLarge) if cells > max_trials.
History grid_search(const Grid& grid, const Objective& objective, const OptimizerSpec& spec,
                    const std::string& digest = {}, const std::string& discriminant = {});
/// Epsilon-greedy over the top-level choice: untried branches first, then
/// with probability epsilon a uniform branch, else the best running mean.
/// Falls back to random search when the root has no choice.
History bandit_search(const SearchIR& ir, const Objective& objective, const OptimizerSpec& spec);

/// Dispatches on spec.strategy; grid search discretizes with
/// `cont_samples` draws seeded by spec.seed.
History run_search(const SearchIR& ir, const Objective& objective, const OptimizerSpec& spec,
                   std::size_t cont_samples = 1);

/// Trials carry "elapsed" only when `timing` is set, so the default output
/// is byte-identical across runs.
Json history_to_json(const History& h, bool timing = false);
/// "trial,best" rows of the best-so-far curve; failed prefixes are empty.
std::string curve_csv(const History& h);

/// 1 - k-fold CV accuracy of the decoded operator. Points the space
/// rejects score as InvalidConfig, exceptions during fit as RuntimeError.
Objective make_cv_objective(IRPtr ir, LabeledDataset data, std::size_t folds,
                            std::uint64_t seed = 0);

}  // namespace lalec
