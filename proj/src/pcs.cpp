#include "lalec/pcs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "lalec/error.hpp"

namespace lalec {

namespace {

struct Context {
  std::string parent;
  std::vector<std::string> values;
};

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += v[i];
  }
  return s;
}

std::string int_text(double x) { return std::to_string(static_cast<long long>(x)); }

class PcsEmitter {
 public:
  std::string run(const SearchIR& ir) {
    node(ir, std::nullopt);
    std::string out;
    for (const auto& l : params_) out += l + "\n";
    if (!conditions_.empty()) {
      out += "\n# conditions\n";
      for (const auto& l : conditions_) out += l + "\n";
    }
    return out;
  }

 private:
  void condition(const std::string& child, const std::optional<Context>& ctx) {
    if (!ctx) return;
    if (ctx->values.size() == 1) {
      conditions_.push_back(child + " | " + ctx->parent + " == " + ctx->values.front());
    } else {
      conditions_.push_back(child + " | " + ctx->parent + " in {" + join(ctx->values) + "}");
    }
  }

  void categorical(const std::string& name, const std::vector<std::string>& values,
                   const std::string& def, const std::optional<Context>& ctx) {
    params_.push_back(name + " {" + join(values) + "} [" + def + "]");
    condition(name, ctx);
  }

  void node(const SearchIR& ir, const std::optional<Context>& ctx) {
    if (const auto* sm = std::get_if<StepMapIR>(&ir.node)) {
      for (const auto& s : sm->steps) node(*s.body, ctx);
      return;
    }
    if (const auto* ci = std::get_if<ChoiceIR>(&ir.node)) {
      std::vector<std::string> values;
      for (const auto& b : ci->branches) values.push_back(b.value);
      categorical(ci->discriminant, values, values.front(), ctx);
      for (const auto& b : ci->branches) node(*b.body, Context{ci->discriminant, {b.value}});
      return;
    }
    const auto& leaf = std::get<LeafIR>(ir.node);
    if (leaf.frozen) return;
    const auto& ds = leaf.nf.disjuncts;
    if (ds.size() == 1) {
      for (const auto& p : ds.front()) param(mangle(ir.prefix, p.name), p.domain, ctx);
      return;
    }
    std::string selector = mangle(ir.prefix, "@disjunct");
    std::vector<std::string> ks;
    for (std::size_t k = 0; k < ds.size(); ++k) ks.push_back(std::to_string(k));
    categorical(selector, ks, "0", ctx);
    for (std::size_t j = 0; j < ds.front().size(); ++j) {
      // Group disjuncts whose domain for this name is identical.
      std::vector<std::vector<std::size_t>> groups;
      for (std::size_t k = 0; k < ds.size(); ++k) {
        bool placed = false;
        for (auto& g : groups) {
          if (ds[g.front()][j].domain == ds[k][j].domain) {
            g.push_back(k);
            placed = true;
            break;
          }
        }
        if (!placed) groups.push_back({k});
      }
      std::string base = mangle(ir.prefix, ds.front()[j].name);
      if (groups.size() == 1) {
        param(base, ds.front()[j].domain, ctx);
        continue;
      }
      for (const auto& g : groups) {
        Context c{selector, {}};
        for (auto k : g) c.values.push_back(std::to_string(k));
        const auto& dom = ds[g.front()][j].domain;
        std::string name = base + "@" + std::to_string(g.front());
        param(name, dom, c);
        // Conditions conjoin, so the branch guard is stated directly too.
        if (!std::holds_alternative<OpSlotDomain>(dom)) condition(name, ctx);
      }
    }
  }

  void param(const std::string& name, const Domain& d, const std::optional<Context>& ctx) {
    if (const auto* slot = std::get_if<OpSlotDomain>(&d)) {
      node(*slot->nested, ctx);
      return;
    }
    if (const auto* c = std::get_if<CatDomain>(&d)) {
      std::vector<std::string> values;
      for (const auto& v : c->values) values.push_back(v.to_token());
      categorical(name, values, c->default_value.to_token(), ctx);
      return;
    }
    const auto& c = std::get<ContDomain>(d);
    const std::string log = c.prior.kind == PriorKind::LogUniform ? "l" : "";
    if (c.integer) {
      double first = std::ceil(c.lo);
      if (c.lo_open && first == c.lo) first += 1;
      double last = std::floor(c.hi);
      if (c.hi_open && last == c.hi) last -= 1;
      double def = std::clamp(std::round(c.default_value), first, last);
      if (first == last) {
        categorical(name, {int_text(first)}, int_text(first), ctx);
        return;
      }
      params_.push_back(name + " [" + int_text(first) + ", " + int_text(last) + "] [" +
                        int_text(def) + "]i" + log);
      condition(name, ctx);
      return;
    }
    if (c.lo == c.hi) {
      categorical(name, {format_number(c.lo)}, format_number(c.lo), ctx);
      return;
    }
    double eps = 1e-9 * (c.hi - c.lo);
    double lo = c.lo_open ? c.lo + eps : c.lo;
    double hi = c.hi_open ? c.hi - eps : c.hi;
    double def = std::clamp(c.default_value, lo, hi);
    params_.push_back(name + " [" + format_number(lo) + ", " + format_number(hi) + "] [" +
                      format_number(def) + "]" + log);
    condition(name, ctx);
  }

  std::vector<std::string> params_;
  std::vector<std::string> conditions_;
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_int(const std::string& s, std::int64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

Value typed_token(const std::string& t) {
  if (t == "true") return Value(true);
  if (t == "false") return Value(false);
  if (t == "null") return Value();
  std::int64_t i;
  if (parse_int(t, i)) return Value(i);
  double d;
  if (parse_double(t, d)) return Value(d);
  return Value(t);
}

std::string strip_copy_suffix(const std::string& name) {
  auto at = name.rfind('@');
  if (at == std::string::npos || at + 1 == name.size()) return name;
  for (std::size_t i = at + 1; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return name;
  }
  return name.substr(0, at);
}

bool is_selector(const std::string& name) {
  const std::string tag = "@disjunct";
  return name.size() >= tag.size() && name.compare(name.size() - tag.size(), tag.size(), tag) == 0;
}

}  // namespace

const PcsParam* PcsSpace::find(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::string emit_pcs(const SearchIR& ir, std::size_t max_disjuncts) {
  emit_flat(ir, max_disjuncts);  // enforces the blowup cap
  return PcsEmitter().run(ir);
}

PcsSpace parse_pcs(std::string_view text) {
  PcsSpace space;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string raw(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) -> void { throw SyntaxError(line_no, 1, msg); };

    if (auto bar = line.find('|'); bar != std::string::npos) {
      PcsCondition c;
      c.child = trim(line.substr(0, bar));
      std::string rest = trim(line.substr(bar + 1));
      if (auto eq = rest.find("=="); eq != std::string::npos) {
        c.parent = trim(rest.substr(0, eq));
        c.values.push_back(trim(rest.substr(eq + 2)));
      } else if (auto in = rest.find(" in "); in != std::string::npos) {
        c.parent = trim(rest.substr(0, in));
        std::string set = trim(rest.substr(in + 4));
        if (set.size() < 2 || set.front() != '{' || set.back() != '}') {
          fail("expected {values} after 'in'");
        }
        c.values = split_list(set.substr(1, set.size() - 2));
      } else {
        fail("expected '==' or 'in' in condition");
      }
      if (c.child.empty() || c.parent.empty()) fail("empty name in condition");
      space.conditions.push_back(std::move(c));
      continue;
    }
    if (line.front() == '{') fail("forbidden clauses are not supported");

    PcsParam p;
    std::size_t open = line.find_first_of("{[");
    if (open == std::string::npos || open == 0) fail("expected parameter definition");
    p.name = trim(line.substr(0, open));
    if (p.name.find_first_of(" \t") != std::string::npos) fail("malformed parameter name");
    char close = line[open] == '{' ? '}' : ']';
    std::size_t end = line.find(close, open);
    if (end == std::string::npos) fail("unterminated domain");
    std::string body = line.substr(open + 1, end - open - 1);
    std::string rest = trim(line.substr(end + 1));
    if (rest.size() < 2 || rest.front() != '[') fail("expected [default]");
    std::size_t dend = rest.find(']');
    if (dend == std::string::npos) fail("unterminated default");
    p.default_value = trim(rest.substr(1, dend - 1));
    std::string suffix = trim(rest.substr(dend + 1));
    if (close == '}') {
      p.kind = PcsParam::Kind::Categorical;
      p.values = split_list(body);
      if (p.values.empty()) fail("empty categorical");
      if (!suffix.empty()) fail("unexpected suffix on categorical");
      if (std::find(p.values.begin(), p.values.end(), p.default_value) == p.values.end()) {
        fail("default not among values");
      }
    } else {
      auto bounds = split_list(body);
      if (bounds.size() != 2 || !parse_double(bounds[0], p.lo) ||
          !parse_double(bounds[1], p.hi)) {
        fail("expected [lo, hi]");
      }
      p.kind = PcsParam::Kind::Real;
      for (char ch : suffix) {
        if (ch == 'i') {
          p.kind = PcsParam::Kind::Integer;
        } else if (ch == 'l') {
          p.log = true;
        } else {
          fail(std::string("unknown suffix '") + ch + "'");
        }
      }
      double def;
      if (!parse_double(p.default_value, def) || def < p.lo || def > p.hi) {
        fail("default outside range");
      }
      if (p.lo > p.hi || (p.log && p.lo <= 0)) fail("invalid range");
    }
    if (space.find(p.name)) fail("duplicate parameter '" + p.name + "'");
    space.params.push_back(std::move(p));
  }
  for (const auto& c : space.conditions) {
    if (!space.find(c.child) || !space.find(c.parent)) {
      throw SyntaxError(line_no, 1, "condition refers to unknown parameter");
    }
  }
  return space;
}

std::vector<std::pair<std::string, std::string>> sample_pcs(const PcsSpace& space, Rng& rng) {
  std::map<std::string, std::vector<const PcsCondition*>> conds;
  for (const auto& c : space.conditions) conds[c.child].push_back(&c);
  std::map<std::string, std::optional<std::string>> decided;  // nullopt: inactive
  std::vector<std::pair<std::string, std::string>> out;
  bool progress = true;
  while (progress && decided.size() < space.params.size()) {
    progress = false;
    for (const auto& p : space.params) {
      if (decided.count(p.name)) continue;
      bool ready = true;
      bool active = true;
      for (const auto* c : conds[p.name]) {
        auto it = decided.find(c->parent);
        if (it == decided.end()) {
          ready = false;
          break;
        }
        if (!it->second || std::find(c->values.begin(), c->values.end(), *it->second) ==
                               c->values.end()) {
          active = false;
        }
      }
      if (!ready) continue;
      progress = true;
      if (!active) {
        decided[p.name] = std::nullopt;
        continue;
      }
      std::string v;
      switch (p.kind) {
        case PcsParam::Kind::Categorical: v = p.values[rng.below(p.values.size())]; break;
        case PcsParam::Kind::Real: {
          double u = rng.uniform();
          double x = p.log ? std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)))
                           : p.lo + u * (p.hi - p.lo);
          v = format_number(std::clamp(x, p.lo, p.hi));
          break;
        }
        case PcsParam::Kind::Integer: {
          double x;
          if (p.log) {
            double a = std::log(p.lo), b = std::log(p.hi + 1);
            x = std::floor(std::exp(a + rng.uniform() * (b - a)));
          } else {
            x = p.lo + static_cast<double>(rng.below(static_cast<std::size_t>(p.hi - p.lo + 1)));
          }
          v = int_text(std::clamp(x, p.lo, p.hi));
          break;
        }
      }
      decided[p.name] = v;
      out.emplace_back(p.name, v);
    }
  }
  return out;
}

Point pcs_to_point(const PcsSpace& space,
                   const std::vector<std::pair<std::string, std::string>>& sample) {
  Point pt;
  for (const auto& [name, tok] : sample) {
    if (is_selector(name)) continue;
    const PcsParam* p = space.find(name);
    Value v;
    if (p && p->kind == PcsParam::Kind::Integer) {
      std::int64_t i = 0;
      parse_int(tok, i);
      v = Value(i);
    } else if (p && p->kind == PcsParam::Kind::Real) {
      double d = 0;
      parse_double(tok, d);
      v = Value(d);
    } else {
      v = typed_token(tok);
    }
    pt[strip_copy_suffix(name)] = v;
  }
  return pt;
}

}  // namespace lalec
