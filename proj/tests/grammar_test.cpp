#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "common.hpp"
#include "lalec/grammar.hpp"

namespace lalec {
namespace {

using test::code_of;
using test::sequences;
using Seq = std::vector<std::string>;

GrammarFile load(const std::string& file) {
  std::ifstream in(test::source_path("grammars/" + file));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grammar(ss.str(), test::registry());
}

GrammarFile g(const char* text) { return parse_grammar(text, test::registry()); }

bool no_nonterminals(const Operator& o) {
  switch (o.kind()) {
    case Operator::Kind::Individual: return test::registry().contains(o.as_individual().name);
    case Operator::Kind::Choice:
      for (const auto& a : o.as_choice().alternatives) {
        if (!no_nonterminals(*a)) return false;
      }
      return true;
    case Operator::Kind::Pipeline:
      for (const auto& s : o.as_pipeline().steps) {
        if (!no_nonterminals(*s)) return false;
      }
      return true;
  }
  return false;
}

bool has_choice(const Operator& o) {
  if (o.is_choice()) return true;
  if (o.is_pipeline()) {
    for (const auto& s : o.as_pipeline().steps) {
      if (has_choice(*s)) return true;
    }
  }
  return false;
}

const std::vector<std::string> kCleaners{"SimpleImputer", "NoOp"};
const std::vector<std::string> kTransformers{"PCA", "StandardScaler", "MinMaxScaler",
                                             "SelectKVariance"};
const std::vector<std::string> kEstimators{"KNN", "LogRegGD", "PrunedTree"};

// Every clean{0..c} tfm{0..t} est sequence.
std::vector<Seq> linear_topologies(int c, int t) {
  std::vector<Seq> heads{Seq{}};
  std::vector<Seq> all_heads;
  std::vector<Seq> cleans{Seq{}}, cur{Seq{}};
  for (int i = 0; i < c; ++i) {
    std::vector<Seq> next;
    for (const auto& s : cur) {
      for (const auto& x : kCleaners) {
        auto n = s;
        n.push_back(x);
        next.push_back(n);
      }
    }
    cleans.insert(cleans.end(), next.begin(), next.end());
    cur = next;
  }
  std::vector<Seq> tfms{Seq{}};
  cur = {Seq{}};
  for (int i = 0; i < t; ++i) {
    std::vector<Seq> next;
    for (const auto& s : cur) {
      for (const auto& x : kTransformers) {
        auto n = s;
        n.push_back(x);
        next.push_back(n);
      }
    }
    tfms.insert(tfms.end(), next.begin(), next.end());
    cur = next;
  }
  std::vector<Seq> out;
  for (const auto& a : cleans) {
    for (const auto& b : tfms) {
      for (const auto& e : kEstimators) {
        Seq s = a;
        s.insert(s.end(), b.begin(), b.end());
        s.push_back(e);
        out.push_back(s);
      }
    }
  }
  return out;
}

// Language of the AlphaD3M-style grammar: clean* tfm* est.
bool in_language(const Seq& s, std::size_t* cleaners = nullptr, std::size_t* tfms = nullptr) {
  if (s.empty()) return false;
  auto in = [](const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  std::size_t i = 0, a = 0, b = 0;
  while (i + 1 < s.size() && in(kCleaners, s[i])) ++i, ++a;
  while (i + 1 < s.size() && in(kTransformers, s[i])) ++i, ++b;
  if (cleaners) *cleaners = a;
  if (tfms) *tfms = b;
  return i + 1 == s.size() && in(kEstimators, s[i]);
}

TEST(Unfold, NonRecursive) {
  auto o = unfold(g("start := PCA >> KNN;"), test::registry(), 1);
  EXPECT_TRUE(test::isomorphic(o, pipe(test::registry().at("PCA"), test::registry().at("KNN"))));
  EXPECT_TRUE(test::isomorphic(o, unfold(g("start := PCA >> KNN;"), test::registry(), 5)));
}

TEST(Unfold, Unproductive) {
  EXPECT_EQ(code_of([] { unfold(g("start := start;"), test::registry(), 3); }),
            ErrorCode::EmptyAfterPruning);
}

TEST(Unfold, AlphaD3mDepth3) {
  auto o = unfold(load("alphad3m.grammar"), test::registry(), 3);
  EXPECT_TRUE(no_nonterminals(o));
  auto seqs = sequences(o);
  for (const auto& s : linear_topologies(2, 2)) {
    EXPECT_TRUE(seqs.count(s)) << "missing topology of length " << s.size();
  }
  for (const auto& s : seqs) EXPECT_TRUE(in_language(s));
}

TEST(Unfold, Monotone) {
  auto gr = load("alphad3m.grammar");
  std::set<Seq> prev;
  for (int d = 1; d <= 3; ++d) {
    auto cur = sequences(unfold(gr, test::registry(), d));
    for (const auto& s : prev) EXPECT_TRUE(cur.count(s)) << "depth " << d;
    EXPECT_GE(cur.size(), prev.size());
    prev = std::move(cur);
  }
}

TEST(Unfold, PrunesRecursiveAlternative) {
  auto o = unfold(g("start := KNN | PCA >> start;"), test::registry(), 2);
  auto seqs = sequences(o);
  EXPECT_EQ(seqs, (std::set<Seq>{{"KNN"}, {"PCA", "KNN"}}));
}

TEST(Sample, Deterministic) {
  auto gr = load("tpot.grammar");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto a = sample(gr, test::registry(), seed, 4);
    auto b = sample(gr, test::registry(), seed, 4);
    EXPECT_TRUE(test::isomorphic(a, b));
    EXPECT_FALSE(has_choice(a));
    EXPECT_TRUE(no_nonterminals(a));
  }
}

TEST(Sample, NoChoiceGrammarIsUnique) {
  auto gr = g("start := PCA >> KNN;");
  auto first = sample(gr, test::registry(), 0, 3);
  for (std::uint64_t seed = 1; seed < 10; ++seed) {
    EXPECT_TRUE(test::isomorphic(first, sample(gr, test::registry(), seed, 3)));
  }
}

TEST(Sample, AlphaD3mDerivable) {
  auto gr = load("alphad3m.grammar");
  std::map<int, std::set<Seq>> lang;
  std::set<Seq> distinct;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto o = sample(gr, test::registry(), seed, 3);
    ASSERT_FALSE(has_choice(o));
    auto seqs = sequences(o);
    ASSERT_EQ(seqs.size(), 1u);
    const Seq& s = *seqs.begin();
    std::size_t a = 0, b = 0;
    ASSERT_TRUE(in_language(s, &a, &b));
    int depth = static_cast<int>(std::max<std::size_t>({a, b, 1}));
    if (!lang.count(depth)) lang[depth] = sequences(unfold(gr, test::registry(), depth));
    EXPECT_TRUE(lang[depth].count(s));
    distinct.insert(s);
  }
  EXPECT_GT(distinct.size(), 20u);
}

TEST(Sample, NoTerminatingAlternative) {
  EXPECT_EQ(code_of([] { sample(g("start := PCA >> start;"), test::registry(), 0, 2); }),
            ErrorCode::NoTerminatingAlternative);
}

}  // namespace
}  // namespace lalec
