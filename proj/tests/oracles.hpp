#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lalec/dsl.hpp"
#include "lalec/operator.hpp"
#include "lalec/rng.hpp"
#include "lalec/error.hpp"
#include "lalec/normalize.hpp"
#include "lalec/schema.hpp"
#include "lalec/toyml/registry.hpp"

namespace lalec::test {

inline std::string source_path(const std::string& rel) {
  return std::string(LALEC_SOURCE_DIR) + "/" + rel;
}

inline const Registry& registry() {
  static const Registry r = toyml::load_registry(source_path("schemas"));
  return r;
}

inline Operator op(const std::string& text) { return parse_expr(text, registry()); }

inline SchemaPtr schema_of(const std::string& name) {
  return registry().at(name).as_individual().schema;
}

/// Random series-parallel operator built through the combinators.
inline Operator random_sp(Rng& rng, int depth) {
  static const char* leaves[] = {"PCA", "KNN", "NoOp", "LR", "J48", "MinMaxScaler",
                                 "StandardScaler", "Concat"};
  if (depth == 0 || rng.uniform() < 0.3) {
    Operator leaf = registry().at(leaves[rng.below(8)]);
    if (rng.uniform() < 0.2 && leaf.as_individual().name == "KNN") {
      leaf = configure(leaf, {{"k", static_cast<int>(1 + rng.below(9))}});
    }
    return leaf;
  }
  auto a = random_sp(rng, depth - 1);
  auto b = random_sp(rng, depth - 1);
  switch (rng.below(3)) {
    case 0: return pipe(a, b);
    case 1: return both(a, b);
    default: return choose({a, b});
  }
}

/// 17 lattice points over a range: both bounds, points 1e-9 of the width
/// inside each bound, and 13 interior points (the midpoint among them).
/// Infinite bounds are clipped to +-100. Integer ranges are rounded.
inline std::vector<Value> range_lattice(const RangeSchema& r) {
  double lo = std::isfinite(r.lo) ? r.lo : -100;
  double hi = std::isfinite(r.hi) ? r.hi : 100;
  double w = hi - lo;
  std::vector<double> xs{lo, lo + 1e-9 * w};
  for (int k = 1; k <= 13; ++k) xs.push_back(lo + k * w / 14);
  xs.push_back(hi - 1e-9 * w);
  xs.push_back(hi);
  std::vector<Value> out;
  for (double x : xs) {
    Value v = r.integer ? Value(static_cast<std::int64_t>(std::llround(x))) : Value(x);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

/// Probe values for one property: enum values plus range lattices, through
/// anyOf/allOf.
inline std::vector<Value> probe_values(const SchemaNode& s) {
  std::vector<Value> out;
  auto add = [&](const std::vector<Value>& vs) {
    for (const auto& v : vs) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  };
  if (const auto* e = s.as<EnumSchema>()) add(e->values);
  if (const auto* r = s.as<RangeSchema>()) add(range_lattice(*r));
  if (const auto* a = s.as<AnyOfSchema>()) {
    for (const auto& c : a->children) add(probe_values(*c));
  }
  if (const auto* a = s.as<AllOfSchema>()) {
    for (const auto& c : a->children) add(probe_values(*c));
  }
  return out;
}

/// Cross product of probe values over the declared properties.
inline std::vector<Config> probe_configs(const SchemaNode& schema) {
  std::vector<Config> out{Config{}};
  for (const auto& [name, prop] : declared_domains(schema)) {
    std::vector<Config> next;
    for (const auto& c : out) {
      for (const auto& v : probe_values(*prop)) {
        Config d = c;
        d[name] = v;
        next.push_back(std::move(d));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Disjunct renderings, sorted, for order-insensitive comparison.
inline std::vector<std::string> disjunct_set(const NormalForm& nf) {
  std::vector<std::string> out;
  for (const auto& d : nf.disjuncts) out.push_back(normal_form_to_string(NormalForm{{d}}));
  std::sort(out.begin(), out.end());
  return out;
}

/// Name sequences of every choice resolution of a linear operator; non-linear
/// resolutions are skipped.
inline std::set<std::vector<std::string>> sequences(const Operator& o) {
  using Seq = std::vector<std::string>;
  switch (o.kind()) {
    case Operator::Kind::Individual:
      return {Seq{o.as_individual().name}};
    case Operator::Kind::Choice: {
      std::set<Seq> out;
      for (const auto& a : o.as_choice().alternatives) {
        auto s = sequences(*a);
        out.insert(s.begin(), s.end());
      }
      return out;
    }
    case Operator::Kind::Pipeline: {
      const auto& p = o.as_pipeline();
      auto order = topological_order(p);
      if (p.edges.size() + 1 != p.steps.size()) return {};
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        if (!std::binary_search(p.edges.begin(), p.edges.end(), Edge{order[i], order[i + 1]})) {
          return {};
        }
      }
      std::set<Seq> acc{Seq{}};
      for (auto i : order) {
        std::set<Seq> next;
        for (const auto& tail : sequences(*p.steps[i])) {
          for (const auto& head : acc) {
            Seq s = head;
            s.insert(s.end(), tail.begin(), tail.end());
            next.insert(std::move(s));
          }
        }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

bool isomorphic(const Operator& a, const Operator& b);

namespace detail {

inline bool match(const Operator::Pipeline& a, const Operator::Pipeline& b,
                  std::vector<int>& map, std::vector<char>& used, std::size_t i) {
  const std::size_t n = a.steps.size();
  if (i == n) return true;
  auto deg = [](const std::vector<Edge>& es, std::size_t v, bool out) {
    std::size_t d = 0;
    for (const auto& e : es) d += (out ? e.from : e.to) == v;
    return d;
  };
  auto has = [](const std::vector<Edge>& es, std::size_t f, std::size_t t) {
    for (const auto& e : es) {
      if (e.from == f && e.to == t) return true;
    }
    return false;
  };
  for (std::size_t j = 0; j < n; ++j) {
    if (used[j]) continue;
    if (deg(a.edges, i, true) != deg(b.edges, j, true) ||
        deg(a.edges, i, false) != deg(b.edges, j, false)) {
      continue;
    }
    if (!isomorphic(*a.steps[i], *b.steps[j])) continue;
    bool ok = true;
    for (std::size_t k = 0; k < i && ok; ++k) {
      auto mk = static_cast<std::size_t>(map[k]);
      ok = has(a.edges, k, i) == has(b.edges, mk, j) && has(a.edges, i, k) == has(b.edges, j, mk);
    }
    if (!ok) continue;
    map[i] = static_cast<int>(j);
    used[j] = 1;
    if (match(a, b, map, used, i + 1)) return true;
    used[j] = 0;
  }
  return false;
}

}  // namespace detail

/// Graph isomorphism on pipelines (steps compared recursively); choices
/// compare alternative by alternative.
inline bool isomorphic(const Operator& a, const Operator& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Operator::Kind::Individual: {
      // Captured operators compare by their full hyperparameters.
      const auto& x = a.as_individual();
      const auto& y = b.as_individual();
      if (x.name != y.name || x.captured != y.captured) return false;
      auto cx = x.captured ? effective_config(x) : x.bound;
      auto cy = y.captured ? effective_config(y) : y.bound;
      if (cx.size() != cy.size()) return false;
      for (const auto& [k, v] : cx) {
        auto it = cy.find(k);
        if (it == cy.end()) return false;
        if (v.is_operator() && it->second.is_operator()) {
          if (!isomorphic(*v.as_operator(), *it->second.as_operator())) return false;
        } else if (v != it->second) {
          return false;
        }
      }
      return true;
    }
    case Operator::Kind::Choice: {
      const auto& x = a.as_choice().alternatives;
      const auto& y = b.as_choice().alternatives;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!isomorphic(*x[i], *y[i])) return false;
      }
      return true;
    }
    case Operator::Kind::Pipeline: {
      const auto& x = a.as_pipeline();
      const auto& y = b.as_pipeline();
      if (x.steps.size() != y.steps.size() || x.edges.size() != y.edges.size()) return false;
      std::vector<int> map(x.steps.size(), -1);
      std::vector<char> used(x.steps.size(), 0);
      return detail::match(x, y, map, used, 0);
    }
  }
  return false;
}

}  // namespace lalec::test
