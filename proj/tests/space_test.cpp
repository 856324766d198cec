#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "lalec/space.hpp"

namespace lalec {
namespace {

using test::code_of;
using test::op;

IRPtr running() { return combine(op("PCA >> (J48 | LR)")); }

const LeafIR& leaf(const IRPtr& ir) { return std::get<LeafIR>(ir->node); }

std::vector<std::string> row_signature(const FlatDisjunct& d) {
  std::vector<std::string> out;
  for (const auto& p : d) out.push_back(p.name + "=" + domain_to_string(p.domain));
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Combine, RunningExampleShape) {
  auto ir = running();
  const auto& sm = std::get<StepMapIR>(ir->node);
  ASSERT_EQ(sm.steps.size(), 2u);
  EXPECT_EQ(sm.steps[0].token, "pca");
  EXPECT_EQ(leaf(sm.steps[0].body).nf.disjuncts.size(), 2u);
  const auto& ch = std::get<ChoiceIR>(sm.steps[1].body->node);
  EXPECT_EQ(ch.discriminant, "choice__D");
  ASSERT_EQ(ch.branches.size(), 2u);
  EXPECT_EQ(ch.branches[0].value, "J48");
  EXPECT_EQ(ch.branches[1].value, "LR");
  EXPECT_EQ(leaf(ch.branches[0].body).nf.disjuncts.size(), 2u);
  EXPECT_EQ(leaf(ch.branches[1].body).nf.disjuncts.size(), 2u);
}

TEST(Combine, SingleOperatorIsWrapped) {
  auto ir = combine(op("KNN"));
  const auto& sm = std::get<StepMapIR>(ir->node);
  EXPECT_TRUE(sm.wrapped);
  ASSERT_EQ(sm.steps.size(), 1u);
  EXPECT_EQ(leaf(sm.steps[0].body).nf.disjuncts.size(), 1u);
}

TEST(Combine, RepeatedTokensNumbered) {
  auto ir = combine(op("PCA >> PCA >> KNN"));
  const auto& sm = std::get<StepMapIR>(ir->node);
  EXPECT_EQ(sm.steps[0].token, "pca_1");
  EXPECT_EQ(sm.steps[1].token, "pca_2");
  EXPECT_EQ(sm.steps[2].token, "knn");
}

TEST(Combine, BoundValuesRemoved) {
  auto ir = combine(op("KNN(k=3)"));
  const auto& nf = leaf(std::get<StepMapIR>(ir->node).steps[0].body).nf;
  EXPECT_EQ(nf.names(), std::vector<std::string>{"weighting"});
}

TEST(Combine, FrozenLeafHasNoDimensions) {
  auto f = freeze_trainable(op("KNN()"));
  EXPECT_EQ(dimension_count(*combine(pipe(f, freeze_trainable(op("PCA()"))))), 0u);
  EXPECT_EQ(dimension_count(*combine(f)), 0u);
}

TEST(Combine, HigherOrderSlot) {
  auto ir = combine(op("BoostedEnsemble(base=PrunedTree)"));
  const auto& nf = leaf(std::get<StepMapIR>(ir->node).steps[0].body).nf;
  bool found = false;
  for (const auto& p : nf.disjuncts.at(0)) {
    if (const auto* s = std::get_if<OpSlotDomain>(&p.domain)) {
      found = true;
      EXPECT_EQ(s->marker, "boostedensemble__base");
      ASSERT_NE(s->nested, nullptr);
      EXPECT_GT(dimension_count(*s->nested), 0u);
    }
  }
  EXPECT_TRUE(found);
  auto flat = emit_flat(*ir);
  ASSERT_EQ(flat.size(), 2u);
  auto names = row_signature(flat[0]);
  EXPECT_TRUE(std::any_of(names.begin(), names.end(), [](const std::string& s) {
    return s.rfind("boostedensemble__base__maxDepth=", 0) == 0;
  }));
}

TEST(Flat, RunningExampleEightRows) {
  auto flat = emit_flat(*running());
  ASSERT_EQ(flat.size(), 8u);
  std::vector<std::vector<std::string>> got;
  for (const auto& d : flat) got.push_back(row_signature(d));
  std::vector<std::vector<std::string>> want;
  for (const char* n : {"pca__N=(0..1)", "pca__N=[mle]"}) {
    for (auto tail : std::vector<std::vector<std::string>>{
             {"choice__D=[J48]", "choice__j48__R=[false]", "choice__j48__C=(0..0.5)"},
             {"choice__D=[J48]", "choice__j48__R=[true,false]", "choice__j48__C=[0.25]"},
             {"choice__D=[LR]", "choice__lr__S=[linear]", "choice__lr__P=[l1,l2]"},
             {"choice__D=[LR]", "choice__lr__S=[linear,sag,lbfgs]", "choice__lr__P=[l2]"}}) {
      tail.push_back(n);
      std::sort(tail.begin(), tail.end());
      want.push_back(tail);
    }
  }
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
}

TEST(Flat, CountLaw) {
  EXPECT_EQ(emit_flat(*combine(op("NoOp >> (StandardScaler | MinMaxScaler) >> (KNN | NoOp)")))
                .size(),
            4u);
  EXPECT_EQ(emit_flat(*combine(op("KNN"))).size(), 1u);
  // Random small pipelines: |flat| = prod over steps of (sum over branches).
  const char* pool[] = {"PCA", "J48", "LR", "KNN", "NoOp", "LogRegGD"};
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t steps = 1 + rng.below(4);
    std::string text;
    std::size_t expect = 1;
    for (std::size_t s = 0; s < steps; ++s) {
      std::size_t branches = 1 + rng.below(3);
      std::string part;
      std::size_t sum = 0;
      std::vector<std::string> used;
      for (std::size_t b = 0; b < branches; ++b) {
        std::string name = pool[rng.below(6)];
        if (std::find(used.begin(), used.end(), name) != used.end()) continue;
        used.push_back(name);
        part += (part.empty() ? "" : " | ") + name;
        sum += normalize(*test::schema_of(name)).disjuncts.size();
      }
      text += (text.empty() ? "(" : " >> (") + part + ")";
      expect *= sum;
    }
    EXPECT_EQ(emit_flat(*combine(op(text))).size(), expect) << text;
  }
}

TEST(Flat, BlowupCap) {
  EXPECT_EQ(code_of([] { emit_flat(*running(), 5); }), ErrorCode::BlowupExceeded);
}

// Probe configurations of the running example in flat (mangled) form.
std::vector<Point> running_probes() {
  std::vector<Point> out;
  auto pca = test::probe_configs(*test::schema_of("PCA"));
  for (const char* branch : {"J48", "LR"}) {
    std::string prefix = std::string("choice__") + (branch[0] == 'J' ? "j48" : "lr");
    for (const auto& c : test::probe_configs(*test::schema_of(branch))) {
      for (const auto& p : pca) {
        Point pt{{"choice__D", branch}, {"pca__N", p.at("N")}};
        for (const auto& [k, v] : c) pt[prefix + "__" + k] = v;
        out.push_back(std::move(pt));
      }
    }
  }
  return out;
}

bool valid_point(const Point& p) {
  const char* branch = p.at("choice__D").as_string() == "J48" ? "J48" : "LR";
  std::string prefix = std::string("choice__") + (branch[0] == 'J' ? "j48" : "lr") + "__";
  Config c;
  for (const auto& [k, v] : p) {
    if (k.rfind(prefix, 0) == 0) c[k.substr(prefix.size())] = v;
  }
  return validate({{"N", p.at("pca__N")}}, *test::schema_of("PCA")).ok &&
         validate(c, *test::schema_of(branch)).ok;
}

TEST(Backends, CompletenessAndAgreement) {
  auto ir = running();
  auto flat = emit_flat(*ir);
  auto doc = emit_hierarchical(*ir);
  std::size_t valid = 0;
  for (const auto& p : running_probes()) {
    bool ok = valid_point(p);
    valid += ok;
    ASSERT_EQ(flat_member(flat, p), ok) << config_to_json(p).dump();
    ASSERT_EQ(hierarchical_member(doc, p), ok) << config_to_json(p).dump();
  }
  EXPECT_GT(valid, 100u);
}

TEST(Hierarchical, Shape) {
  auto doc = emit_hierarchical(*running());
  auto text = doc.dump();
  EXPECT_NE(text.find("\"choice__D\""), std::string::npos);
  EXPECT_NE(text.find("\"J48\""), std::string::npos);
  auto frozen = emit_hierarchical(*combine(freeze_trainable(op("KNN()"))));
  EXPECT_TRUE(hierarchical_member(frozen, {}));
}

TEST(Decode, RunningExamplePoint) {
  auto ir = running();
  Point p{{"pca__N", "mle"}, {"choice__D", "LR"}, {"choice__lr__S", "linear"},
          {"choice__lr__P", "l1"}};
  auto o = decode(*ir, p);
  EXPECT_TRUE(test::isomorphic(o, op("PCA(N='mle') >> LR(S='linear', P='l1')")));
  EXPECT_EQ(state_of(o), LifecycleState::Trainable);
}

TEST(Decode, Errors) {
  auto ir = running();
  Point extra = default_point(*ir);
  extra["bogus"] = 1;
  EXPECT_EQ(code_of([&] { decode(*ir, extra); }), ErrorCode::UnknownMarker);
  Point wrong = default_point(*ir);
  wrong["choice__D"] = "KNN";
  EXPECT_EQ(code_of([&] { decode(*ir, wrong); }), ErrorCode::UnknownMarker);
  Point bad{{"pca__N", 0.5}, {"choice__D", "LR"}, {"choice__lr__S", "sag"}, {"choice__lr__P", "l1"}};
  EXPECT_EQ(code_of([&] { decode(*ir, bad); }), ErrorCode::ValidationFailed);
}

TEST(Decode, DefaultPoint) {
  auto ir = running();
  auto o = decode(*ir, default_point(*ir));
  EXPECT_TRUE(test::isomorphic(o, op("PCA(N=0.5) >> J48(R=false, C=0.25)")));
}

TEST(Decode, NestedOperator) {
  auto ir = combine(op("BoostedEnsemble(base=PrunedTree)"));
  Point p = default_point(*ir);
  p["boostedensemble__base__maxDepth"] = 3;
  auto o = decode(*ir, p);
  const auto& base = o.as_individual().bound.at("base");
  ASSERT_TRUE(base.is_operator());
  EXPECT_EQ(base.as_operator()->as_individual().name, "PrunedTree");
  EXPECT_EQ(base.as_operator()->as_individual().bound.at("maxDepth"), Value(3));
}

// Soundness: every sampled point decodes to steps that all validate.
bool all_steps_valid(const Operator& o) {
  switch (o.kind()) {
    case Operator::Kind::Individual: {
      const auto& ind = o.as_individual();
      for (const auto& [k, v] : ind.bound) {
        if (v.is_operator() && !all_steps_valid(*v.as_operator())) return false;
      }
      return validate(effective_config(ind), *ind.schema).ok;
    }
    case Operator::Kind::Pipeline:
      for (const auto& s : o.as_pipeline().steps) {
        if (!all_steps_valid(*s)) return false;
      }
      return true;
    case Operator::Kind::Choice: return false;
  }
  return false;
}

TEST(Sampling, ThousandPointsValid) {
  for (const char* text : {"PCA >> (J48 | LR)", "Scaler >> (PrunedTree | LogRegGD | KNN)",
                           "(MinMaxScaler | StandardScaler) >> BoostedEnsemble(base=PrunedTree)"}) {
    auto ir = combine(op(text));
    auto flat = emit_flat(*ir);
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
      auto p = sample_point(*ir, rng);
      ASSERT_TRUE(flat_member(flat, p)) << config_to_json(p).dump();
      ASSERT_TRUE(all_steps_valid(decode(*ir, p))) << config_to_json(p).dump();
    }
  }
}

TEST(Sampling, BranchForcing) {
  auto ir = running();
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(sample_point_in_branch(*ir, 1, rng).at("choice__D"), Value("LR"));
  }
  EXPECT_EQ(top_level_choice(*ir)->discriminant, "choice__D");
  EXPECT_EQ(top_level_choice(*combine(op("KNN"))), nullptr);
}

TEST(Sampling, LogUniformMedian) {
  ContDomain d{1, 1000, false, false, false, {PriorKind::LogUniform, {}}, 10};
  Rng rng(0);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(sample_domain(d, rng).as_number());
  std::nth_element(xs.begin(), xs.begin() + 5000, xs.end());
  EXPECT_GE(xs[5000], 20);
  EXPECT_LE(xs[5000], 50);
}

TEST(Sampling, IntegerAndOpenBounds) {
  ContDomain i{1, 15, false, false, true, {}, 5};
  ContDomain o{0, 0.5, true, true, false, {}, 0.25};
  Rng rng(1);
  for (int k = 0; k < 2000; ++k) {
    auto v = sample_domain(i, rng);
    ASSERT_TRUE(v.is_int());
    ASSERT_GE(v.as_int(), 1);
    ASSERT_LE(v.as_int(), 15);
    double x = sample_domain(o, rng).as_number();
    ASSERT_GT(x, 0);
    ASSERT_LT(x, 0.5);
  }
}

TEST(Grid, RunningExampleStructure) {
  auto ir = running();
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    auto grid = emit_grid(*ir, 1, seed);
    ASSERT_EQ(grid.disjuncts.size(), 8u);
    auto flat = emit_flat(*ir);
    std::size_t cells = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      std::size_t prod = 1;
      for (const auto& [name, values] : grid.disjuncts[k].params) {
        const Param* src = nullptr;
        for (const auto& p : flat[k]) {
          if (p.name == name) src = &p;
        }
        ASSERT_NE(src, nullptr) << name;
        if (const auto* c = std::get_if<ContDomain>(&src->domain)) {
          EXPECT_EQ(values.size(), 2u) << name;
          EXPECT_EQ(values[0], Value(c->default_value)) << name;
        } else {
          EXPECT_EQ(values, std::get<CatDomain>(src->domain).values);
        }
        prod *= values.size();
      }
      EXPECT_EQ(grid.disjuncts[k].cells(), prod);
      cells += prod;
    }
    EXPECT_EQ(grid.cells(), cells);
    EXPECT_EQ(grid.points().size(), cells);
    for (const auto& p : grid.points()) EXPECT_TRUE(flat_member(flat, p));
  }
}

TEST(Grid, Deterministic) {
  auto ir = running();
  EXPECT_EQ(grid_to_json(emit_grid(*ir, 2, 5)).dump(), grid_to_json(emit_grid(*ir, 2, 5)).dump());
  auto cat = emit_grid(*combine(op("LR")), 3, 0);
  ASSERT_EQ(cat.disjuncts.size(), 2u);
  EXPECT_EQ(cat.cells(), 2u + 3u);
}

TEST(Digest, StableAndSensitive) {
  EXPECT_EQ(space_digest(*running()), space_digest(*running()));
  EXPECT_NE(space_digest(*running()), space_digest(*combine(op("PCA >> (LR | J48)"))));
}

}  // namespace
}  // namespace lalec
