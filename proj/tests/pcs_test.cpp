#include <gtest/gtest.h>

#include "common.hpp"
#include "lalec/pcs.hpp"

namespace lalec {
namespace {

using test::code_of;
using test::op;

TEST(Pcs, RunningExampleText) {
  auto text = emit_pcs(*combine(op("PCA >> (J48 | LR)")));
  EXPECT_NE(text.find("choice__D {J48, LR} [J48]"), std::string::npos) << text;
  EXPECT_NE(text.find("| choice__D == J48"), std::string::npos) << text;
  EXPECT_NE(text.find("| choice__D == LR"), std::string::npos) << text;
  EXPECT_NE(text.find("pca__@disjunct"), std::string::npos) << text;
  EXPECT_EQ(text, emit_pcs(*combine(op("PCA >> (J48 | LR)"))));
}

TEST(Pcs, SingleCategorical) {
  auto space = parse_pcs(emit_pcs(*combine(op("NoOp >> MinMaxScaler >> SimpleImputer"))));
  ASSERT_EQ(space.params.size(), 1u);
  EXPECT_EQ(space.params[0].kind, PcsParam::Kind::Categorical);
  EXPECT_TRUE(space.conditions.empty());
}

TEST(Pcs, ParseDialect) {
  auto s = parse_pcs(
      "# comment\n"
      "a {x, y} [x]\n"
      "b [0.001, 1] [0.1]l\n"
      "c [1, 15] [5]i\n"
      "\n"
      "b | a == y\n"
      "c | a in {x, y}\n");
  ASSERT_EQ(s.params.size(), 3u);
  EXPECT_EQ(s.find("a")->values, (std::vector<std::string>{"x", "y"}));
  EXPECT_TRUE(s.find("b")->log);
  EXPECT_EQ(s.find("b")->kind, PcsParam::Kind::Real);
  EXPECT_EQ(s.find("c")->kind, PcsParam::Kind::Integer);
  EXPECT_EQ(s.find("c")->default_value, "5");
  ASSERT_EQ(s.conditions.size(), 2u);
  EXPECT_EQ(s.conditions[1].values, (std::vector<std::string>{"x", "y"}));
}

TEST(Pcs, SyntaxErrors) {
  for (const char* bad : {"a {x, y\n", "a [1, 2]\n", "a [1, 2] [3]q\n", "b | a = x\n", "a {} [x]\n"}) {
    EXPECT_EQ(code_of([&] { parse_pcs(bad); }), ErrorCode::SyntaxError) << bad;
  }
}

// Conditions referring to unknown parameters are rejected as well.
TEST(Pcs, UnknownParent) {
  EXPECT_EQ(code_of([] { parse_pcs("a {x} [x]\na | zz == x\n"); }), ErrorCode::SyntaxError);
}

bool valid_decoded(const Operator& o) {
  if (o.is_individual()) {
    const auto& ind = o.as_individual();
    for (const auto& [k, v] : ind.bound) {
      if (v.is_operator() && !valid_decoded(*v.as_operator())) return false;
    }
    return validate(effective_config(ind), *ind.schema).ok;
  }
  if (o.is_pipeline()) {
    for (const auto& s : o.as_pipeline().steps) {
      if (!valid_decoded(*s)) return false;
    }
    return true;
  }
  return false;
}

class PcsRoundTrip : public ::testing::TestWithParam<const char*> {};

TEST_P(PcsRoundTrip, SamplesDecodeToValidConfigs) {
  auto ir = combine(op(GetParam()));
  auto space = parse_pcs(emit_pcs(*ir));
  auto flat = emit_flat(*ir);
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    auto sample = sample_pcs(space, rng);
    auto point = pcs_to_point(space, sample);
    ASSERT_TRUE(flat_member(flat, point)) << config_to_json(point).dump();
    ASSERT_TRUE(valid_decoded(decode(*ir, point))) << config_to_json(point).dump();
  }
}

INSTANTIATE_TEST_SUITE_P(Pipelines, PcsRoundTrip,
                         ::testing::Values("PCA >> (J48 | LR)",
                                           "Scaler >> (PrunedTree | LogRegGD | KNN)",
                                           "(MinMaxScaler | StandardScaler) >> "
                                           "BoostedEnsemble(base=PrunedTree)"));

TEST(Pcs, J48ParamsActiveOnlyUnderJ48) {
  auto ir = combine(op("PCA >> (J48 | LR)"));
  auto space = parse_pcs(emit_pcs(*ir));
  Rng rng(5);
  std::size_t j48 = 0, lr = 0;
  for (int i = 0; i < 1000; ++i) {
    auto sample = sample_pcs(space, rng);
    std::string d;
    bool has_j48 = false, has_lr = false;
    for (const auto& [k, v] : sample) {
      if (k == "choice__D") d = v;
      has_j48 |= k.rfind("choice__j48__", 0) == 0;
      has_lr |= k.rfind("choice__lr__", 0) == 0;
    }
    ASSERT_EQ(has_j48, d == "J48");
    ASSERT_EQ(has_lr, d == "LR");
    (d == "J48" ? j48 : lr)++;
  }
  EXPECT_GT(j48, 400u);
  EXPECT_GT(lr, 400u);
}

TEST(Pcs, SpansFlatDisjuncts) {
  // Every flat disjunct of the running example is hit by some PCS sample.
  auto ir = combine(op("PCA >> (J48 | LR)"));
  auto flat = emit_flat(*ir);
  auto space = parse_pcs(emit_pcs(*ir));
  std::vector<bool> hit(flat.size(), false);
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    auto p = pcs_to_point(space, sample_pcs(space, rng));
    for (std::size_t k = 0; k < flat.size(); ++k) {
      if (flat_member({flat[k]}, p)) hit[k] = true;
    }
  }
  for (std::size_t k = 0; k < flat.size(); ++k) EXPECT_TRUE(hit[k]) << "row " << k;
}

}  // namespace
}  // namespace lalec
