#include "lalec/grammar.hpp"

#include <limits>
#include <map>
#include <optional>

#include "lalec/error.hpp"
#include "lalec/rng.hpp"

namespace lalec {

namespace {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

AstPtr binary(ExprAst::Kind k, AstPtr l, AstPtr r, SourcePos pos) {
  auto n = std::make_shared<ExprAst>();
  n->kind = k;
  n->left = std::move(l);
  n->right = std::move(r);
  n->pos = pos;
  return n;
}

void flatten_choice(const AstPtr& a, std::vector<AstPtr>& out) {
  if (a->kind == ExprAst::Kind::Choose) {
    flatten_choice(a->left, out);
    flatten_choice(a->right, out);
  } else {
    out.push_back(a);
  }
}

AstPtr rebuild_choice(const std::vector<AstPtr>& alts, SourcePos pos) {
  AstPtr acc = alts.front();
  for (std::size_t i = 1; i < alts.size(); ++i) {
    acc = binary(ExprAst::Kind::Choose, acc, alts[i], pos);
  }
  return acc;
}

const GrammarRule& rule(const GrammarFile& g, const std::string& name) {
  const auto* r = g.find(name);
  if (!r) throw Error(ErrorCode::UndefinedNonterminal, "undefined nonterminal '" + name + "'");
  return *r;
}

class Unfolder {
 public:
  Unfolder(const GrammarFile& g, int depth) : g_(g), depth_(depth) {}

  std::optional<AstPtr> expand(const AstPtr& a) {
    switch (a->kind) {
      case ExprAst::Kind::Ref: return a;
      case ExprAst::Kind::Call: {
        if (!contains_nonterminal(*a)) return a;
        auto n = std::make_shared<ExprAst>(*a);
        for (auto& arg : n->args) {
          if (auto* p = std::get_if<AstPtr>(&arg.value)) {
            auto e = expand(*p);
            if (!e) return std::nullopt;
            *p = *e;
          }
        }
        return n;
      }
      case ExprAst::Kind::Nonterminal: {
        int& c = counts_[a->name];
        if (c >= depth_) return std::nullopt;
        ++c;
        auto r = expand(rule(g_, a->name).body);
        --counts_[a->name];
        return r;
      }
      case ExprAst::Kind::Pipe:
      case ExprAst::Kind::Both: {
        auto l = expand(a->left);
        if (!l) return std::nullopt;
        auto r = expand(a->right);
        if (!r) return std::nullopt;
        return binary(a->kind, *l, *r, a->pos);
      }
      case ExprAst::Kind::Choose: {
        std::vector<AstPtr> alts, kept;
        flatten_choice(a, alts);
        for (const auto& alt : alts) {
          if (auto e = expand(alt)) kept.push_back(*e);
        }
        if (kept.empty()) return std::nullopt;
        return rebuild_choice(kept, a->pos);
      }
    }
    return std::nullopt;
  }

 private:
  const GrammarFile& g_;
  int depth_;
  std::map<std::string, int> counts_;
};

/// Minimal derivation height per nonterminal (kInf if unproductive).
class Heights {
 public:
  explicit Heights(const GrammarFile& g) {
    for (const auto& r : g.rules) h_[r.name] = kInf;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : g.rules) {
        std::size_t v = of(*r.body);
        if (v < h_[r.name]) {
          h_[r.name] = v;
          changed = true;
        }
      }
    }
  }

  std::size_t of(const ExprAst& a) const {
    switch (a.kind) {
      case ExprAst::Kind::Ref: return 0;
      case ExprAst::Kind::Call: {
        std::size_t m = 0;
        for (const auto& arg : a.args) {
          if (const auto* p = std::get_if<AstPtr>(&arg.value)) m = std::max(m, of(**p));
        }
        return m;
      }
      case ExprAst::Kind::Nonterminal: {
        auto it = h_.find(a.name);
        if (it == h_.end() || it->second == kInf) return kInf;
        return it->second + 1;
      }
      case ExprAst::Kind::Pipe:
      case ExprAst::Kind::Both: return std::max(of(*a.left), of(*a.right));
      case ExprAst::Kind::Choose: return std::min(of(*a.left), of(*a.right));
    }
    return kInf;
  }

  std::size_t of(const std::string& nonterminal) const { return h_.at(nonterminal); }

 private:
  std::map<std::string, std::size_t> h_;
};

class Sampler {
 public:
  Sampler(const GrammarFile& g, std::uint64_t seed, int max_depth)
      : g_(g), heights_(g), rng_(seed), max_depth_(max_depth) {}

  AstPtr draw(const AstPtr& a, int level) {
    switch (a->kind) {
      case ExprAst::Kind::Ref: return a;
      case ExprAst::Kind::Call: {
        if (!contains_nonterminal(*a)) return a;
        auto n = std::make_shared<ExprAst>(*a);
        for (auto& arg : n->args) {
          if (auto* p = std::get_if<AstPtr>(&arg.value)) *p = draw(*p, level);
        }
        return n;
      }
      case ExprAst::Kind::Nonterminal: {
        const auto& r = rule(g_, a->name);
        if (level >= max_depth_ && heights_.of(a->name) == kInf) {
          throw Error(ErrorCode::NoTerminatingAlternative,
                      "nonterminal '" + a->name + "' cannot terminate");
        }
        return draw(r.body, level + 1);
      }
      case ExprAst::Kind::Pipe:
      case ExprAst::Kind::Both: {
        auto l = draw(a->left, level);
        auto r = draw(a->right, level);
        return binary(a->kind, l, r, a->pos);
      }
      case ExprAst::Kind::Choose: {
        std::vector<AstPtr> alts;
        flatten_choice(a, alts);
        if (level >= max_depth_) {
          std::size_t best = kInf;
          for (const auto& alt : alts) best = std::min(best, heights_.of(*alt));
          if (best == kInf) {
            throw Error(ErrorCode::NoTerminatingAlternative,
                        "no alternative at " + std::to_string(a->pos.line) + ":" +
                            std::to_string(a->pos.column) + " terminates");
          }
          std::vector<AstPtr> eligible;
          for (const auto& alt : alts) {
            if (heights_.of(*alt) == best) eligible.push_back(alt);
          }
          alts = std::move(eligible);
        }
        return draw(alts[rng_.below(alts.size())], level);
      }
    }
    return a;
  }

 private:
  const GrammarFile& g_;
  Heights heights_;
  Rng rng_;
  int max_depth_;
};

}  // namespace

AstPtr unfold_ast(const GrammarFile& g, int depth) {
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "depth must be positive");
  auto start = std::make_shared<ExprAst>();
  start->kind = ExprAst::Kind::Nonterminal;
  start->name = g.start;
  auto r = Unfolder(g, depth).expand(start);
  if (!r) {
    throw Error(ErrorCode::EmptyAfterPruning,
                "every alternative still contains a nonterminal at depth " +
                    std::to_string(depth));
  }
  return *r;
}

Operator unfold(const GrammarFile& g, const Registry& registry, int depth) {
  return build_operator(*unfold_ast(g, depth), registry);
}

AstPtr sample_ast(const GrammarFile& g, std::uint64_t seed, int max_depth) {
  if (max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max depth must be positive");
  auto start = std::make_shared<ExprAst>();
  start->kind = ExprAst::Kind::Nonterminal;
  start->name = g.start;
  return Sampler(g, seed, max_depth).draw(start, 0);
}

Operator sample(const GrammarFile& g, const Registry& registry, std::uint64_t seed,
                int max_depth) {
  return build_operator(*sample_ast(g, seed, max_depth), registry);
}

}  // namespace lalec
