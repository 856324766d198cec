#include "lalec/optimizer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "lalec/error.hpp"
#include "lalec/toyml/datasets.hpp"

namespace lalec {

const char* trial_status_name(TrialStatus s) {
  switch (s) {
    case TrialStatus::Valid: return "valid";
    case TrialStatus::InvalidConfig: return "invalidConfig";
    case TrialStatus::RuntimeError: return "runtimeError";
  }
  return "?";
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Grid: return "grid";
    case Strategy::Bandit: return "bandit";
  }
  return "?";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "random") return Strategy::Random;
  if (s == "grid") return Strategy::Grid;
  if (s == "bandit") return Strategy::Bandit;
  throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + s + "'");
}

std::size_t History::count(TrialStatus s) const {
  std::size_t n = 0;
  for (const auto& t : trials) n += t.status == s;
  return n;
}

std::size_t History::failed_count() const { return trials.size() - count(TrialStatus::Valid); }

std::vector<double> History::best_so_far(double penalty) const {
  std::vector<double> out;
  double best = penalty;
  bool any = false;
  for (const auto& t : trials) {
    if (t.status == TrialStatus::Valid && (!any || t.loss < best)) {
      best = t.loss;
      any = true;
    }
    out.push_back(best);
  }
  return out;
}

namespace {

void check_spec(const OptimizerSpec& spec) {
  if (spec.max_trials < 1) throw Error(ErrorCode::InvalidArgument, "max_trials must be positive");
  if (!(spec.bandit_epsilon >= 0 && spec.bandit_epsilon <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "bandit epsilon must lie in [0, 1]");
  }
  if (spec.jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be positive");
}

void evaluate(Trial& t, const Objective& objective, double penalty) {
  auto start = std::chrono::steady_clock::now();
  try {
    Evaluation e = objective(t.point);
    t.status = e.status;
    t.loss = e.loss;
    t.message = std::move(e.message);
    if (t.status == TrialStatus::Valid && !std::isfinite(t.loss)) {
      t.status = TrialStatus::RuntimeError;
      t.message = "objective returned a non-finite loss";
    }
  } catch (const std::exception& ex) {
    t.status = TrialStatus::RuntimeError;
    t.message = ex.what();
  }
  if (t.status != TrialStatus::Valid) t.loss = penalty;
  t.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Indices are fixed before evaluation, so the result does not depend on
// completion order.
void evaluate_all(std::vector<Trial>& trials, const Objective& objective, const OptimizerSpec& spec) {
  if (spec.jobs <= 1 || trials.size() <= 1) {
    for (auto& t : trials) evaluate(t, objective, spec.penalty);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < std::min(spec.jobs, trials.size()); ++j) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < trials.size();) evaluate(trials[i], objective, spec.penalty);
    });
  }
  for (auto& th : pool) th.join();
}

void finish(History& h) {
  for (const auto& t : h.trials) {
    if (t.status != TrialStatus::Valid) continue;
    if (!h.best || t.loss < h.trials[*h.best].loss) h.best = t.index;
  }
}

std::string branch_of(const Point& p, const std::string& discriminant) {
  if (discriminant.empty()) return {};
  auto it = p.find(discriminant);
  return it != p.end() && it->second.is_string() ? it->second.as_string() : std::string();
}

}  // namespace

History random_search(const SearchIR& ir, const Objective& objective, const OptimizerSpec& spec) {
  check_spec(spec);
  History h;
  h.seed = spec.seed;
  h.digest = space_digest(ir);
  h.strategy = strategy_name(Strategy::Random);
  const auto* choice = top_level_choice(ir);
  std::string disc = choice ? choice->discriminant : std::string();
  if (dimension_count(ir) == 0) {
    h.trials.push_back({0, default_point(ir), 0, TrialStatus::Valid, {}, 0, {}});
  } else {
    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.max_trials; ++i) {
      Trial t;
      t.index = i;
      t.point = sample_point(ir, rng);
      t.branch = branch_of(t.point, disc);
      h.trials.push_back(std::move(t));
    }
  }
  evaluate_all(h.trials, objective, spec);
  finish(h);
  return h;
}

History grid_search(const Grid& grid, const Objective& objective, const OptimizerSpec& spec,
                    const std::string& digest, const std::string& discriminant) {
  check_spec(spec);
  if (grid.cells() > spec.max_trials) {
    throw Error(ErrorCode::GridTooLarge, "grid has " + std::to_string(grid.cells()) +
                                             " cells, more than the trial budget " +
                                             std::to_string(spec.max_trials));
  }
  History h;
  h.seed = spec.seed;
  h.digest = digest;
  h.strategy = strategy_name(Strategy::Grid);
  std::size_t i = 0;
  for (auto& p : grid.points()) {
    Trial t;
    t.index = i++;
    t.branch = branch_of(p, discriminant);
    t.point = std::move(p);
    h.trials.push_back(std::move(t));
  }
  evaluate_all(h.trials, objective, spec);
  finish(h);
  return h;
}

History bandit_search(const SearchIR& ir, const Objective& objective, const OptimizerSpec& spec) {
  check_spec(spec);
  if (spec.jobs != 1) {
    throw Error(ErrorCode::InvalidArgument,
                "the bandit strategy depends on earlier results and runs sequentially");
  }
  const auto* choice = top_level_choice(ir);
  if (!choice) {
    History h = random_search(ir, objective, spec);
    h.strategy = strategy_name(Strategy::Bandit);
    return h;
  }
  History h;
  h.seed = spec.seed;
  h.digest = space_digest(ir);
  h.strategy = strategy_name(Strategy::Bandit);
  const std::size_t arms = choice->branches.size();
  std::vector<double> mean(arms, 0.0);
  std::vector<std::size_t> pulls(arms, 0);
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < spec.max_trials; ++i) {
    std::size_t arm = arms;
    for (std::size_t a = 0; a < arms && arm == arms; ++a) {
      if (pulls[a] == 0) arm = a;
    }
    if (arm == arms) {
      if (rng.uniform() < spec.bandit_epsilon) {
        arm = rng.below(arms);
      } else {
        arm = 0;
        for (std::size_t a = 1; a < arms; ++a) {
          if (mean[a] < mean[arm]) arm = a;
        }
      }
    }
    Trial t;
    t.index = i;
    t.point = sample_point_in_branch(ir, arm, rng);
    t.branch = choice->branches[arm].value;
    evaluate(t, objective, spec.penalty);
    ++pulls[arm];
    // Incremental mean stays finite even with the maximal penalty.
    mean[arm] += (t.loss - mean[arm]) / static_cast<double>(pulls[arm]);
    h.trials.push_back(std::move(t));
  }
  finish(h);
  return h;
}

History run_search(const SearchIR& ir, const Objective& objective, const OptimizerSpec& spec,
                   std::size_t cont_samples) {
  switch (spec.strategy) {
    case Strategy::Random: return random_search(ir, objective, spec);
    case Strategy::Bandit: return bandit_search(ir, objective, spec);
    case Strategy::Grid: {
      const auto* choice = top_level_choice(ir);
      return grid_search(emit_grid(ir, cont_samples, spec.seed), objective, spec,
                         space_digest(ir), choice ? choice->discriminant : std::string());
    }
  }
  return {};
}

Json history_to_json(const History& h, bool timing) {
  Json trials = Json::array();
  for (const auto& t : h.trials) {
    Json j;
    j["index"] = t.index;
    j["point"] = config_to_json(t.point);
    j["loss"] = t.loss;
    j["status"] = trial_status_name(t.status);
    if (!t.branch.empty()) j["branch"] = t.branch;
    if (!t.message.empty()) j["message"] = t.message;
    if (timing) j["elapsed"] = t.elapsed;
    trials.push_back(std::move(j));
  }
  Json out;
  out["strategy"] = h.strategy;
  out["seed"] = h.seed;
  out["spaceDigest"] = h.digest;
  out["best"] = h.best ? Json(*h.best) : Json(nullptr);
  out["trials"] = std::move(trials);
  return out;
}

std::string curve_csv(const History& h) {
  std::ostringstream out;
  out << "trial,best\n";
  bool any = false;
  double best = 0;
  for (const auto& t : h.trials) {
    if (t.status == TrialStatus::Valid && (!any || t.loss < best)) {
      best = t.loss;
      any = true;
    }
    out << t.index << ',';
    if (any) out << format_number(best);
    out << '\n';
  }
  return out.str();
}

Objective make_cv_objective(IRPtr ir, LabeledDataset data, std::size_t folds, std::uint64_t seed) {
  data.check();
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "cross validation needs k >= 2");
  auto shared = std::make_shared<const LabeledDataset>(std::move(data));
  return [ir = std::move(ir), shared, folds, seed](const Point& p) -> Evaluation {
    std::optional<Operator> op;
    try {
      op = decode(*ir, p);
    } catch (const Error& e) {
      return {0, TrialStatus::InvalidConfig, e.what()};
    }
    try {
      return {1.0 - toyml::cross_val_score(*op, *shared, folds, seed), TrialStatus::Valid, {}};
    } catch (const Error& e) {
      return {0, TrialStatus::RuntimeError,
              std::string(error_code_name(e.code())) + ": " + e.what()};
    }
  };
}

}  // namespace lalec
