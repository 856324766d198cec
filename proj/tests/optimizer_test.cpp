#include <gtest/gtest.h>

#include <map>

#include "common.hpp"
#include "lalec/auto_configure.hpp"
#include "lalec/optimizer.hpp"
#include "lalec/toyml/datasets.hpp"

namespace lalec {
namespace {

using test::code_of;
using test::op;

IRPtr running() { return combine(op("PCA >> (J48 | LR)")); }

// Loss depends only on the point; InvalidConfig whenever decode fails.
Objective validity_objective(IRPtr ir) {
  return [ir](const Point& p) -> Evaluation {
    try {
      decode(*ir, p);
    } catch (const Error& e) {
      return {0, TrialStatus::InvalidConfig, e.what()};
    }
    double x = 0;
    for (const auto& [k, v] : p) {
      if (v.is_number()) x += v.as_number();
    }
    return {std::fmod(x, 1.0), TrialStatus::Valid, {}};
  };
}

TEST(Random, ConstrainedSpaceHasNoInvalidTrials) {
  auto ir = running();
  OptimizerSpec spec;
  spec.max_trials = 100;
  auto h = random_search(*ir, validity_objective(ir), spec);
  EXPECT_EQ(h.trials.size(), 100u);
  EXPECT_EQ(h.count(TrialStatus::InvalidConfig), 0u);
  ASSERT_TRUE(h.best);
  EXPECT_EQ(h.trials[*h.best].status, TrialStatus::Valid);
}

TEST(Random, UnconstrainedSpaceProducesInvalidTrials) {
  CompileOptions opts;
  opts.keep_constraints = false;
  auto ir = combine(op("PCA >> (J48 | LR)"), opts);
  OptimizerSpec spec;
  spec.max_trials = 200;
  auto h = random_search(*ir, validity_objective(running()), spec);
  EXPECT_GT(h.count(TrialStatus::InvalidConfig), 0u);
  for (const auto& t : h.trials) {
    if (t.status != TrialStatus::Valid) EXPECT_EQ(t.loss, spec.penalty);
  }
}

TEST(Random, EmptySpaceOneDefaultTrial) {
  auto ir = combine(freeze_trainable(op("KNN()")));
  OptimizerSpec spec;
  spec.max_trials = 10;
  auto h = random_search(*ir, [](const Point&) { return Evaluation{0.5}; }, spec);
  ASSERT_EQ(h.trials.size(), 1u);
  EXPECT_TRUE(h.trials[0].point.empty());
}

TEST(Random, ExceptionsBecomeRuntimeErrors) {
  auto ir = running();
  OptimizerSpec spec;
  spec.max_trials = 5;
  auto h = random_search(*ir, [](const Point&) -> Evaluation { throw std::runtime_error("boom"); },
                         spec);
  EXPECT_EQ(h.count(TrialStatus::RuntimeError), 5u);
  EXPECT_FALSE(h.best);
  EXPECT_EQ(h.trials[0].message, "boom");
  auto nan = random_search(*ir, [](const Point&) { return Evaluation{std::nan("")}; }, spec);
  EXPECT_EQ(nan.count(TrialStatus::RuntimeError), 5u);
}

TEST(Random, Deterministic) {
  auto ir = running();
  OptimizerSpec spec;
  spec.max_trials = 50;
  spec.seed = 9;
  auto a = history_to_json(random_search(*ir, validity_objective(ir), spec)).dump();
  auto b = history_to_json(random_search(*ir, validity_objective(ir), spec)).dump();
  EXPECT_EQ(a, b);
  spec.jobs = 4;
  EXPECT_EQ(history_to_json(random_search(*ir, validity_objective(ir), spec)).dump(), a);
  spec.seed = 10;
  EXPECT_NE(history_to_json(random_search(*ir, validity_objective(ir), spec)).dump(), a);
}

TEST(History, BestIsMinimalLowestIndex) {
  auto ir = running();
  OptimizerSpec spec;
  spec.max_trials = 30;
  int calls = 0;
  auto h = random_search(*ir, [&](const Point&) { return Evaluation{(calls++ % 3) * 0.25}; }, spec);
  ASSERT_TRUE(h.best);
  EXPECT_EQ(*h.best, 0u);
  auto curve = h.best_so_far();
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i], curve[i - 1]);
  EXPECT_EQ(curve_csv(h).substr(0, 18), "trial,best\n0,0.0\n1");
}

TEST(Grid, CountsAndArgmin) {
  auto ir = running();
  auto grid = emit_grid(*ir, 1, 0);
  OptimizerSpec spec;
  spec.strategy = Strategy::Grid;
  spec.max_trials = 1000;
  auto obj = [](const Point& p) {
    return Evaluation{p.at("choice__D") == Value("LR") ? 0.0 : 1.0};
  };
  auto h = run_search(*ir, obj, spec);
  EXPECT_EQ(h.trials.size(), grid.cells());
  EXPECT_LE(h.trials.size(), 8u * 4u);
  ASSERT_TRUE(h.best);
  EXPECT_EQ(h.trials[*h.best].point.at("choice__D"), Value("LR"));
  EXPECT_EQ(h.trials[*h.best].branch, "LR");
  spec.max_trials = grid.cells() - 1;
  EXPECT_EQ(code_of([&] { run_search(*ir, obj, spec); }), ErrorCode::GridTooLarge);
}

TEST(Grid, SingleCell) {
  Grid g{{GridDisjunct{{{"a", {Value(1)}}}}}};
  auto h = grid_search(g, [](const Point&) { return Evaluation{0}; }, OptimizerSpec{});
  EXPECT_EQ(h.trials.size(), 1u);
}

TEST(Bandit, UntriedArmsFirstThenGreedy) {
  auto ir = combine(op("Scaler >> (PrunedTree | LogRegGD | KNN)"));
  OptimizerSpec spec;
  spec.strategy = Strategy::Bandit;
  spec.max_trials = 60;
  spec.bandit_epsilon = 0;
  auto obj = [](const Point& p) {
    return Evaluation{p.at("choice__D") == Value("LogRegGD") ? 0.1 : 0.5};
  };
  auto h = run_search(*ir, obj, spec);
  EXPECT_EQ(h.trials[0].branch, "PrunedTree");
  EXPECT_EQ(h.trials[1].branch, "LogRegGD");
  EXPECT_EQ(h.trials[2].branch, "KNN");
  for (std::size_t i = 3; i < h.trials.size(); ++i) EXPECT_EQ(h.trials[i].branch, "LogRegGD");
}

TEST(Bandit, EpsilonOneIsUniform) {
  auto ir = combine(op("Scaler >> (PrunedTree | LogRegGD | KNN)"));
  OptimizerSpec spec;
  spec.strategy = Strategy::Bandit;
  spec.max_trials = 3000;
  spec.bandit_epsilon = 1;
  auto h = run_search(*ir, [](const Point&) { return Evaluation{0}; }, spec);
  std::map<std::string, int> counts;
  for (const auto& t : h.trials) counts[t.branch]++;
  for (const auto& [b, n] : counts) {
    EXPECT_GT(n, 900) << b;
    EXPECT_LT(n, 1100) << b;
  }
}

TEST(Bandit, PenaltyDrivesAwayFromFailingArm) {
  auto ir = combine(op("Scaler >> (PrunedTree | LogRegGD | KNN)"));
  OptimizerSpec spec;
  spec.strategy = Strategy::Bandit;
  spec.max_trials = 100;
  auto obj = [](const Point& p) {
    if (p.at("choice__D") == Value("PrunedTree")) return Evaluation{0, TrialStatus::InvalidConfig, "x"};
    return Evaluation{0.3};
  };
  auto h = run_search(*ir, obj, spec);
  std::size_t tree = 0;
  for (const auto& t : h.trials) tree += t.branch == "PrunedTree";
  EXPECT_LT(tree, 20u);
}

TEST(Bandit, RejectsParallelismAndFallsBack) {
  auto ir = running();
  OptimizerSpec spec;
  spec.strategy = Strategy::Bandit;
  spec.jobs = 2;
  EXPECT_EQ(code_of([&] { run_search(*ir, validity_objective(ir), spec); }),
            ErrorCode::InvalidArgument);
  spec.jobs = 1;
  spec.max_trials = 5;
  auto no_choice = combine(op("KNN"));
  EXPECT_EQ(run_search(*no_choice, validity_objective(no_choice), spec).trials.size(), 5u);
}

TEST(Spec, Validation) {
  OptimizerSpec spec;
  spec.bandit_epsilon = 1.5;
  EXPECT_EQ(code_of([&] { random_search(*running(), validity_objective(running()), spec); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_strategy("bandit"), Strategy::Bandit);
  EXPECT_EQ(code_of([] { parse_strategy("tpe"); }), ErrorCode::InvalidArgument);
}

TEST(HistoryJson, Shape) {
  auto ir = running();
  OptimizerSpec spec;
  spec.max_trials = 3;
  auto j = history_to_json(random_search(*ir, validity_objective(ir), spec));
  EXPECT_EQ(j["strategy"], "random");
  EXPECT_EQ(j["spaceDigest"], space_digest(*ir));
  EXPECT_EQ(j["trials"].size(), 3u);
  EXPECT_FALSE(j["trials"][0].contains("elapsed"));
  EXPECT_TRUE(j["trials"][0].contains("branch"));
}

TEST(CvObjective, StatusesAndLoss) {
  auto ds = toyml::synth_dataset("blobs", 60, 0);
  CompileOptions opts;
  opts.keep_constraints = false;
  auto ir = combine(op("Scaler >> (PrunedTree | LogRegGD | KNN)"), opts);
  auto obj = make_cv_objective(ir, ds, 3, 0);
  auto ok = obj(default_point(*ir));
  EXPECT_EQ(ok.status, TrialStatus::Valid);
  EXPECT_LT(ok.loss, 0.1);
  Rng rng(0);
  Point bad = sample_point_in_branch(*ir, 1, rng);
  bad["choice__logreggd__solver"] = "sgd";
  bad["choice__logreggd__penalty"] = "l1";
  EXPECT_NE(obj(bad).status, TrialStatus::Valid);
  EXPECT_EQ(obj({{"nonsense", 1}}).status, TrialStatus::InvalidConfig);
}

TEST(AutoConfigure, ReturnsTrainedBest) {
  auto ds = toyml::synth_dataset("blobs", 60, 0);
  AutoConfigureOptions o;
  o.search.max_trials = 10;
  o.folds = 3;
  auto r = auto_configure(op("Scaler >> (KNN | LogRegGD)"), ds, o);
  EXPECT_EQ(state_of(r.trained), LifecycleState::Trained);
  EXPECT_EQ(r.history.trials.size(), 10u);
  EXPECT_GE(toyml::accuracy(predict_labels(r.trained, ds.features), ds.labels), 0.95);
}

}  // namespace
}  // namespace lalec
