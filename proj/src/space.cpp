#include "lalec/space.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "lalec/error.hpp"

namespace lalec {

std::string mangle(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "__" + name;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string step_name(const Operator& op) {
  switch (op.kind()) {
    case Operator::Kind::Individual: return op.as_individual().name;
    case Operator::Kind::Pipeline: return "Pipeline";
    case Operator::Kind::Choice: return "Choice";
  }
  return "";
}

/// Appends _1, _2, ... to every name that occurs more than once.
std::vector<std::string> dedupe(const std::vector<std::string>& names) {
  std::map<std::string, int> total, seen;
  for (const auto& n : names) ++total[n];
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (total[n] > 1) {
      out.push_back(n + "_" + std::to_string(++seen[n]));
    } else {
      out.push_back(n);
    }
  }
  return out;
}

IRPtr make_ir(std::variant<StepMapIR, ChoiceIR, LeafIR> node, std::string prefix) {
  auto ir = std::make_shared<SearchIR>();
  ir->node = std::move(node);
  ir->prefix = std::move(prefix);
  return ir;
}

Operator with_schema(const Operator& op, SchemaPtr schema) {
  const auto& ind = op.as_individual();
  Operator out = Operator::individual(ind.name, std::move(schema), ind.impl);
  if (ind.captured) out = configure(out, ind.bound);
  return out;
}

class Compiler {
 public:
  explicit Compiler(CompileOptions opts) : opts_(opts) {}

  IRPtr root(const Operator& op) {
    if (op.is_pipeline()) return steps(op.as_pipeline(), "");
    StepMapIR sm;
    sm.wrapped = true;
    std::string tok = lower(step_name(op));
    sm.steps.push_back({tok, node(op, tok)});
    return make_ir(std::move(sm), "");
  }

  IRPtr node(const Operator& op, const std::string& prefix) {
    switch (op.kind()) {
      case Operator::Kind::Individual: return leaf(op, prefix);
      case Operator::Kind::Pipeline: return steps(op.as_pipeline(), prefix);
      case Operator::Kind::Choice: return choice(op.as_choice(), prefix);
    }
    return nullptr;
  }

 private:
  IRPtr steps(const Operator::Pipeline& p, const std::string& prefix) {
    std::vector<std::string> base;
    for (const auto& s : p.steps) base.push_back(lower(step_name(*s)));
    auto tokens = dedupe(base);
    StepMapIR sm;
    sm.edges = p.edges;
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
      sm.steps.push_back({tokens[i], node(*p.steps[i], mangle(prefix, tokens[i]))});
    }
    return make_ir(std::move(sm), prefix);
  }

  IRPtr choice(const Operator::Choice& c, const std::string& prefix) {
    std::vector<std::string> base;
    for (const auto& a : c.alternatives) base.push_back(step_name(*a));
    auto values = dedupe(base);
    ChoiceIR ci;
    ci.discriminant = mangle(prefix, "D");
    for (std::size_t i = 0; i < c.alternatives.size(); ++i) {
      std::string tok = lower(values[i]);
      ci.branches.push_back({values[i], tok, node(*c.alternatives[i], mangle(prefix, tok))});
    }
    return make_ir(std::move(ci), prefix);
  }

  IRPtr leaf(const Operator& op, const std::string& prefix) {
    const auto& ind = op.as_individual();
    LeafIR leaf;
    if (op.frozen_trainable() || op.frozen_trained()) {
      leaf.nf.disjuncts.push_back({});
      leaf.op = share(op);
      leaf.frozen = true;
      return make_ir(std::move(leaf), prefix);
    }
    std::string where = (prefix.empty() ? ind.name : prefix) + " (" + ind.name + ")";
    try {
      SchemaPtr schema = opts_.keep_constraints ? ind.schema : drop_constraints(ind.schema);
      leaf.op = opts_.keep_constraints ? share(op) : share(with_schema(op, schema));
      leaf.nf = normalize(*schema, declared_domains(*schema), {opts_.max_disjuncts});
    } catch (const SyntaxError&) {
      throw;
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    auto& ds = leaf.nf.disjuncts;
    for (const auto& [name, v] : ind.bound) {
      std::vector<Disjunct> kept;
      for (auto& d : ds) {
        auto it = std::find_if(d.begin(), d.end(), [&](const Param& p) { return p.name == name; });
        if (it == d.end()) continue;
        if (v.is_operator()) {
          if (!std::holds_alternative<OpSlotDomain>(it->domain)) continue;
          if (!v.as_operator()) continue;
          std::string marker = mangle(prefix, name);
          it->domain = OpSlotDomain{nested_for(*v.as_operator(), marker), marker};
        } else {
          if (!admits(it->domain, v)) continue;
          d.erase(it);
        }
        kept.push_back(std::move(d));
      }
      ds = std::move(kept);
    }
    // An unbound operator slot has nothing to search over.
    ds.erase(std::remove_if(ds.begin(), ds.end(),
                            [](const Disjunct& d) {
                              return std::any_of(d.begin(), d.end(), [](const Param& p) {
                                const auto* s = std::get_if<OpSlotDomain>(&p.domain);
                                return s && !s->nested;
                              });
                            }),
             ds.end());
    if (ds.empty()) {
      throw Error(ErrorCode::EmptySpace, where + ": bound hyperparameters admit no configuration");
    }
    return make_ir(std::move(leaf), prefix);
  }

  IRPtr nested_for(const Operator& op, const std::string& marker) {
    auto it = slots_.find(&op);
    if (it != slots_.end() && it->second.first == marker) return it->second.second;
    IRPtr ir = node(op, marker);
    slots_[&op] = {marker, ir};
    return ir;
  }

  CompileOptions opts_;
  std::map<const Operator*, std::pair<std::string, IRPtr>> slots_;
};

// Decoding ------------------------------------------------------------------

const IRPtr* slot_of(const NormalForm& nf, const std::string& name) {
  for (const auto& d : nf.disjuncts) {
    for (const auto& p : d) {
      if (p.name != name) continue;
      if (const auto* s = std::get_if<OpSlotDomain>(&p.domain)) return &s->nested;
    }
  }
  return nullptr;
}

Operator decode_node(const SearchIR& ir, const Point& pt, std::set<std::string>& used) {
  if (const auto* sm = std::get_if<StepMapIR>(&ir.node)) {
    std::vector<OperatorRef> steps;
    for (const auto& s : sm->steps) steps.push_back(share(decode_node(*s.body, pt, used)));
    if (sm->wrapped) return *steps.front();
    return Operator::pipeline(std::move(steps), sm->edges);
  }
  if (const auto* ci = std::get_if<ChoiceIR>(&ir.node)) {
    auto it = pt.find(ci->discriminant);
    if (it == pt.end()) {
      throw Error(ErrorCode::InvalidArgument, "point has no value for " + ci->discriminant);
    }
    used.insert(ci->discriminant);
    std::string v = it->second.to_token();
    for (const auto& b : ci->branches) {
      if (b.value == v) return decode_node(*b.body, pt, used);
    }
    throw Error(ErrorCode::UnknownMarker,
                ci->discriminant + " has no branch '" + v + "'");
  }
  const auto& leaf = std::get<LeafIR>(ir.node);
  if (leaf.frozen) return *leaf.op;
  Config cfg;
  for (const auto& name : leaf.nf.names()) {
    if (const IRPtr* nested = slot_of(leaf.nf, name)) {
      cfg[name] = Value(share(decode_node(**nested, pt, used)));
      continue;
    }
    std::string key = mangle(ir.prefix, name);
    auto it = pt.find(key);
    if (it != pt.end()) {
      cfg[name] = it->second;
      used.insert(key);
    }
  }
  return configure(*leaf.op, cfg);
}

std::size_t count_dims(const SearchIR& ir) {
  if (const auto* sm = std::get_if<StepMapIR>(&ir.node)) {
    std::size_t n = 0;
    for (const auto& s : sm->steps) n += count_dims(*s.body);
    return n;
  }
  if (const auto* ci = std::get_if<ChoiceIR>(&ir.node)) {
    std::size_t n = 1;
    for (const auto& b : ci->branches) n += count_dims(*b.body);
    return n;
  }
  const auto& leaf = std::get<LeafIR>(ir.node);
  std::size_t n = 0;
  for (const auto& name : leaf.nf.names()) {
    if (const IRPtr* nested = slot_of(leaf.nf, name)) {
      n += count_dims(**nested);
    } else {
      ++n;
    }
  }
  return n;
}

// Flat ----------------------------------------------------------------------

using FlatList = std::vector<FlatDisjunct>;

void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap) {
    throw Error(ErrorCode::BlowupExceeded,
                "flattened space exceeds " + std::to_string(cap) + " disjuncts");
  }
}

FlatList cross(const FlatList& a, const FlatList& b, std::size_t cap) {
  check_cap(a.size() * b.size(), cap);
  FlatList out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a) {
    for (const auto& y : b) {
      FlatDisjunct d = x;
      d.insert(d.end(), y.begin(), y.end());
      out.push_back(std::move(d));
    }
  }
  return out;
}

FlatList flatten(const SearchIR& ir, std::size_t cap) {
  if (const auto* sm = std::get_if<StepMapIR>(&ir.node)) {
    FlatList acc{FlatDisjunct{}};
    for (const auto& s : sm->steps) acc = cross(acc, flatten(*s.body, cap), cap);
    return acc;
  }
  if (const auto* ci = std::get_if<ChoiceIR>(&ir.node)) {
    FlatList out;
    for (const auto& b : ci->branches) {
      for (auto& d : flatten(*b.body, cap)) {
        d.insert(d.begin(), Param{ci->discriminant, CatDomain{{Value(b.value)}, Value(b.value)}});
        out.push_back(std::move(d));
        check_cap(out.size(), cap);
      }
    }
    return out;
  }
  const auto& leaf = std::get<LeafIR>(ir.node);
  FlatList out;
  for (const auto& d : leaf.nf.disjuncts) {
    FlatList acc{FlatDisjunct{}};
    for (const auto& p : d) {
      if (const auto* s = std::get_if<OpSlotDomain>(&p.domain)) {
        acc = cross(acc, flatten(*s->nested, cap), cap);
      } else {
        for (auto& x : acc) x.push_back({mangle(ir.prefix, p.name), p.domain});
      }
    }
    out.insert(out.end(), acc.begin(), acc.end());
    check_cap(out.size(), cap);
  }
  return out;
}

// Hierarchical --------------------------------------------------------------

Json node_to_json(const SearchIR& ir) {
  Json j;
  if (const auto* sm = std::get_if<StepMapIR>(&ir.node)) {
    j["kind"] = "steps";
    j["prefix"] = ir.prefix;
    j["wrapped"] = sm->wrapped;
    j["steps"] = Json::array();
    for (const auto& s : sm->steps) {
      j["steps"].push_back({{"token", s.token}, {"space", node_to_json(*s.body)}});
    }
    j["edges"] = Json::array();
    for (const auto& e : sm->edges) j["edges"].push_back({e.from, e.to});
    return j;
  }
  if (const auto* ci = std::get_if<ChoiceIR>(&ir.node)) {
    j["kind"] = "choice";
    j["prefix"] = ir.prefix;
    j["discriminant"] = ci->discriminant;
    j["branches"] = Json::array();
    for (const auto& b : ci->branches) {
      j["branches"].push_back(
          {{"value", b.value}, {"token", b.token}, {"space", node_to_json(*b.body)}});
    }
    return j;
  }
  const auto& leaf = std::get<LeafIR>(ir.node);
  j["kind"] = "disjuncts";
  j["prefix"] = ir.prefix;
  j["operator"] = leaf.op->name();
  j["frozen"] = leaf.frozen;
  j["disjuncts"] = Json::array();
  for (const auto& d : leaf.nf.disjuncts) {
    Json rec = Json::object();
    for (const auto& p : d) rec[p.name] = domain_to_json(p.domain);
    j["disjuncts"].push_back(std::move(rec));
  }
  return j;
}

Domain domain_from_json(const Json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "cat") {
    CatDomain c;
    for (const auto& v : j.at("values")) c.values.push_back(value_from_json(v));
    c.default_value = value_from_json(j.at("default"));
    return c;
  }
  if (kind == "cont") {
    ContDomain c;
    c.lo = j.at("lo").get<double>();
    c.hi = j.at("hi").get<double>();
    c.lo_open = j.at("loOpen").get<bool>();
    c.hi_open = j.at("hiOpen").get<bool>();
    c.integer = j.at("integer").get<bool>();
    c.prior.kind = j.at("prior") == "loguniform" ? PriorKind::LogUniform : PriorKind::Uniform;
    if (j.contains("quantization")) c.prior.quantization = j["quantization"].get<double>();
    c.default_value = j.at("default").get<double>();
    return c;
  }
  return OpSlotDomain{nullptr, j.at("marker").get<std::string>()};
}

bool member_node(const Json& n, const Point& pt, std::set<std::string>& used) {
  const std::string kind = n.at("kind").get<std::string>();
  if (kind == "steps") {
    for (const auto& s : n.at("steps")) {
      if (!member_node(s.at("space"), pt, used)) return false;
    }
    return true;
  }
  if (kind == "choice") {
    std::string disc = n.at("discriminant").get<std::string>();
    auto it = pt.find(disc);
    if (it == pt.end() || !it->second.is_string()) return false;
    for (const auto& b : n.at("branches")) {
      if (b.at("value") == it->second.as_string()) {
        used.insert(disc);
        return member_node(b.at("space"), pt, used);
      }
    }
    return false;
  }
  std::string prefix = n.at("prefix").get<std::string>();
  for (const auto& d : n.at("disjuncts")) {
    std::set<std::string> local = used;
    bool ok = true;
    for (const auto& [name, dom] : d.items()) {
      if (dom.at("kind") == "operator") {
        if (!member_node(dom.at("space"), pt, local)) {
          ok = false;
          break;
        }
        continue;
      }
      std::string key = mangle(prefix, name);
      auto it = pt.find(key);
      if (it == pt.end() || !admits(domain_from_json(dom), it->second)) {
        ok = false;
        break;
      }
      local.insert(key);
    }
    if (ok) {
      used = std::move(local);
      return true;
    }
  }
  return false;
}

// Sampling ------------------------------------------------------------------

Value cont_value(const ContDomain& d, double x) {
  if (d.integer) return Value(static_cast<std::int64_t>(std::llround(x)));
  return Value(x);
}

Value sample_domain_any(const Domain& d, Rng& rng) {
  if (const auto* c = std::get_if<CatDomain>(&d)) return c->values[rng.below(c->values.size())];
  return sample_domain(std::get<ContDomain>(d), rng);
}

void sample_node(const SearchIR& ir, Rng& rng, Point& out, const ChoiceIR* forced,
                 std::size_t forced_branch) {
  if (const auto* sm = std::get_if<StepMapIR>(&ir.node)) {
    for (const auto& s : sm->steps) sample_node(*s.body, rng, out, forced, forced_branch);
    return;
  }
  if (const auto* ci = std::get_if<ChoiceIR>(&ir.node)) {
    std::size_t i = ci == forced ? forced_branch : rng.below(ci->branches.size());
    const auto& b = ci->branches.at(i);
    out[ci->discriminant] = Value(b.value);
    sample_node(*b.body, rng, out, forced, forced_branch);
    return;
  }
  const auto& leaf = std::get<LeafIR>(ir.node);
  if (leaf.frozen) return;
  const auto& d = leaf.nf.disjuncts[rng.below(leaf.nf.disjuncts.size())];
  for (const auto& p : d) {
    if (const auto* s = std::get_if<OpSlotDomain>(&p.domain)) {
      sample_node(*s->nested, rng, out, forced, forced_branch);
    } else {
      out[mangle(ir.prefix, p.name)] = sample_domain_any(p.domain, rng);
    }
  }
}

void default_node(const SearchIR& ir, Point& out) {
  if (const auto* sm = std::get_if<StepMapIR>(&ir.node)) {
    for (const auto& s : sm->steps) default_node(*s.body, out);
    return;
  }
  if (const auto* ci = std::get_if<ChoiceIR>(&ir.node)) {
    out[ci->discriminant] = Value(ci->branches.front().value);
    default_node(*ci->branches.front().body, out);
    return;
  }
  const auto& leaf = std::get<LeafIR>(ir.node);
  if (leaf.frozen) return;
  for (const auto& p : leaf.nf.disjuncts.front()) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, CatDomain>) {
            out[mangle(ir.prefix, p.name)] = x.default_value;
          } else if constexpr (std::is_same_v<T, ContDomain>) {
            out[mangle(ir.prefix, p.name)] = cont_value(x, x.default_value);
          } else {
            default_node(*x.nested, out);
          }
        },
        p.domain);
  }
}

bool in_bounds(double x, const ContDomain& c) {
  if (c.lo_open ? !(x > c.lo) : !(x >= c.lo)) return false;
  if (c.hi_open ? !(x < c.hi) : !(x <= c.hi)) return false;
  return true;
}

std::string grid_key(const std::string& name, const Domain& d) {
  const auto& c = std::get<ContDomain>(d);
  return name + "|" + domain_to_string(d) + (c.integer ? "i" : "") +
         (c.prior.kind == PriorKind::LogUniform ? "l" : "");
}

}  // namespace

IRPtr combine(const Operator& op, CompileOptions options) {
  return Compiler(options).root(op);
}

Operator decode(const SearchIR& ir, const Point& point) {
  std::set<std::string> used;
  Operator op = decode_node(ir, point, used);
  for (const auto& [k, _] : point) {
    if (!used.count(k)) {
      throw Error(ErrorCode::UnknownMarker, "'" + k + "' is not a dimension of this space");
    }
  }
  return op;
}

std::size_t dimension_count(const SearchIR& ir) { return count_dims(ir); }

std::vector<FlatDisjunct> emit_flat(const SearchIR& ir, std::size_t max_disjuncts) {
  return flatten(ir, max_disjuncts);
}

bool flat_member(const std::vector<FlatDisjunct>& flat, const Point& point) {
  for (const auto& d : flat) {
    if (d.size() != point.size()) continue;
    bool ok = std::all_of(d.begin(), d.end(), [&](const Param& p) {
      auto it = point.find(p.name);
      return it != point.end() && admits(p.domain, it->second);
    });
    if (ok) return true;
  }
  return false;
}

Json domain_to_json(const Domain& d) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        Json j;
        if constexpr (std::is_same_v<T, CatDomain>) {
          j["kind"] = "cat";
          j["values"] = Json::array();
          for (const auto& v : x.values) j["values"].push_back(value_to_json(v));
          j["default"] = value_to_json(x.default_value);
        } else if constexpr (std::is_same_v<T, ContDomain>) {
          j["kind"] = "cont";
          j["lo"] = x.lo;
          j["hi"] = x.hi;
          j["loOpen"] = x.lo_open;
          j["hiOpen"] = x.hi_open;
          j["integer"] = x.integer;
          j["prior"] = x.prior.kind == PriorKind::LogUniform ? "loguniform" : "uniform";
          if (x.prior.quantization) j["quantization"] = *x.prior.quantization;
          j["default"] = x.integer ? Json(std::llround(x.default_value)) : Json(x.default_value);
        } else {
          j["kind"] = "operator";
          j["marker"] = x.marker;
          j["space"] = x.nested ? node_to_json(*x.nested) : Json();
        }
        return j;
      },
      d);
}

Json emit_hierarchical(const SearchIR& ir) {
  Json j;
  j["format"] = "lalec-hierarchical";
  j["version"] = 1;
  j["space"] = node_to_json(ir);
  return j;
}

bool hierarchical_member(const Json& doc, const Point& point) {
  std::set<std::string> used;
  if (!member_node(doc.at("space"), point, used)) return false;
  return used.size() == point.size();
}

std::string space_digest(const SearchIR& ir) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(emit_hierarchical(ir).dump())));
  return buf;
}

Value sample_domain(const ContDomain& d, Rng& rng) {
  if (d.lo == d.hi) return cont_value(d, d.lo);
  const bool log = d.prior.kind == PriorKind::LogUniform;
  if (d.integer) {
    double first = std::ceil(d.lo);
    if (d.lo_open && first == d.lo) first += 1;
    double last = std::floor(d.hi);
    if (d.hi_open && last == d.hi) last -= 1;
    double x;
    if (log) {
      double a = std::log(first), b = std::log(last + 1);
      x = std::floor(std::exp(a + rng.uniform() * (b - a)));
    } else {
      x = first + static_cast<double>(rng.below(static_cast<std::size_t>(last - first + 1)));
    }
    x = std::clamp(x, first, last);
    if (d.prior.quantization) {
      double q = *d.prior.quantization;
      double xq = std::round(x / q) * q;
      if (xq >= first && xq <= last && xq == std::round(xq)) x = xq;
    }
    return Value(static_cast<std::int64_t>(x));
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double u = rng.uniform();
    double x = log ? std::exp(std::log(d.lo) + u * (std::log(d.hi) - std::log(d.lo)))
                   : d.lo + u * (d.hi - d.lo);
    if (d.prior.quantization) {
      double q = *d.prior.quantization;
      double xq = std::round(x / q) * q;
      if (in_bounds(xq, d)) x = xq;
    }
    if (in_bounds(x, d)) return Value(x);
  }
  return Value((d.lo + d.hi) / 2);
}

Point sample_point(const SearchIR& ir, Rng& rng) {
  Point p;
  sample_node(ir, rng, p, nullptr, 0);
  return p;
}

Point sample_point_in_branch(const SearchIR& ir, std::size_t branch, Rng& rng) {
  Point p;
  sample_node(ir, rng, p, top_level_choice(ir), branch);
  return p;
}

Point default_point(const SearchIR& ir) {
  Point p;
  default_node(ir, p);
  return p;
}

const ChoiceIR* top_level_choice(const SearchIR& ir) {
  if (const auto* ci = std::get_if<ChoiceIR>(&ir.node)) return ci;
  if (const auto* sm = std::get_if<StepMapIR>(&ir.node)) {
    for (const auto& s : sm->steps) {
      if (const auto* ci = std::get_if<ChoiceIR>(&s.body->node)) return ci;
    }
  }
  return nullptr;
}

std::size_t GridDisjunct::cells() const {
  std::size_t n = 1;
  for (const auto& [_, vals] : params) n *= vals.size();
  return n;
}

std::size_t Grid::cells() const {
  std::size_t n = 0;
  for (const auto& d : disjuncts) n += d.cells();
  return n;
}

std::vector<Point> Grid::points() const {
  std::vector<Point> out;
  for (const auto& d : disjuncts) {
    std::vector<std::size_t> idx(d.params.size(), 0);
    if (d.cells() == 0) continue;
    for (;;) {
      Point p;
      for (std::size_t i = 0; i < idx.size(); ++i) p[d.params[i].first] = d.params[i].second[idx[i]];
      out.push_back(std::move(p));
      bool done = true;
      for (std::size_t k = idx.size(); k-- > 0;) {
        if (++idx[k] < d.params[k].second.size()) {
          done = false;
          break;
        }
        idx[k] = 0;
      }
      if (done) break;
    }
  }
  return out;
}

Grid emit_grid(const SearchIR& ir, std::size_t cont_samples, std::uint64_t seed,
               std::size_t max_disjuncts) {
  Grid g;
  std::map<std::string, std::vector<Value>> memo;
  for (const auto& d : emit_flat(ir, max_disjuncts)) {
    GridDisjunct gd;
    for (const auto& p : d) {
      if (const auto* c = std::get_if<CatDomain>(&p.domain)) {
        gd.params.emplace_back(p.name, c->values);
        continue;
      }
      const auto& cont = std::get<ContDomain>(p.domain);
      std::string key = grid_key(p.name, p.domain);
      auto it = memo.find(key);
      if (it == memo.end()) {
        std::vector<Value> vals;
        Value def = cont_value(cont, cont.default_value);
        if (admits(cont, def)) vals.push_back(def);
        Rng rng(seed ^ fnv1a(key));
        std::size_t added = 0;
        for (std::size_t tries = 0; added < cont_samples && tries < 16 * cont_samples + 16; ++tries) {
          Value v = sample_domain(cont, rng);
          if (std::find(vals.begin(), vals.end(), v) != vals.end()) continue;
          vals.push_back(v);
          ++added;
        }
        it = memo.emplace(key, std::move(vals)).first;
      }
      gd.params.emplace_back(p.name, it->second);
    }
    g.disjuncts.push_back(std::move(gd));
  }
  return g;
}

Json flat_to_json(const std::vector<FlatDisjunct>& flat) {
  Json j;
  j["format"] = "lalec-flat";
  j["count"] = flat.size();
  j["disjuncts"] = Json::array();
  for (const auto& d : flat) {
    Json rec = Json::object();
    for (const auto& p : d) rec[p.name] = domain_to_json(p.domain);
    j["disjuncts"].push_back(std::move(rec));
  }
  return j;
}

Json grid_to_json(const Grid& g) {
  Json j;
  j["format"] = "lalec-grid";
  j["cells"] = g.cells();
  j["disjuncts"] = Json::array();
  for (const auto& d : g.disjuncts) {
    Json rec = Json::object();
    for (const auto& [name, vals] : d.params) {
      Json arr = Json::array();
      for (const auto& v : vals) arr.push_back(value_to_json(v));
      rec[name] = std::move(arr);
    }
    j["disjuncts"].push_back(std::move(rec));
  }
  return j;
}

}  // namespace lalec
