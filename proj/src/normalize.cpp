#include "lalec/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lalec/error.hpp"

namespace lalec {

namespace {

// Absent names in a record are unrestricted.
using Record = std::vector<Param>;
using Alternatives = std::vector<Record>;

const Param* find_param(const Record& r, const std::string& name) {
  for (const auto& p : r) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

bool in_bounds(double x, const ContDomain& c) {
  if (c.lo_open ? !(x > c.lo) : !(x >= c.lo)) return false;
  if (c.hi_open ? !(x < c.hi) : !(x <= c.hi)) return false;
  return true;
}

bool cont_empty(const ContDomain& c) {
  if (c.lo > c.hi) return true;
  if (c.lo == c.hi && (c.lo_open || c.hi_open)) return true;
  if (c.integer) {
    double first = std::ceil(c.lo);
    if (c.lo_open && first == c.lo) first += 1;
    double last = std::floor(c.hi);
    if (c.hi_open && last == c.hi) last -= 1;
    if (first > last) return true;
  }
  return false;
}

class Normalizer {
 public:
  Normalizer(const PropertyList& declared, NormalizeOptions opts)
      : declared_(declared), opts_(opts) {}

  NormalForm run(const SchemaNode& schema) {
    Alternatives alts = record(schema);
    // Fill unmentioned names from the declared domains.
    for (const auto& [name, s] : declared_) {
      Alternatives filled;
      std::optional<std::vector<Domain>> fill;
      for (auto& r : alts) {
        if (find_param(r, name)) {
          filled.push_back(std::move(r));
          continue;
        }
        if (!fill) fill = declared_value(name, *s);
        for (const auto& d : *fill) {
          Record copy = r;
          copy.push_back({name, d});
          filled.push_back(std::move(copy));
          check_cap(filled.size());
        }
      }
      alts = std::move(filled);
    }
    NormalForm nf;
    for (auto& r : alts) {
      Disjunct d;
      for (const auto& [name, s] : declared_) {
        const Param* p = find_param(r, name);
        Param q = *p;
        fix_default(q, *s);
        d.push_back(std::move(q));
      }
      for (auto& p : r) {
        bool known = std::any_of(declared_.begin(), declared_.end(),
                                 [&](const auto& e) { return e.first == p.name; });
        if (!known) {
          throw Error(ErrorCode::UnknownProperty,
                      "constraint mentions undeclared hyperparameter '" + p.name + "'");
        }
      }
      for (const auto& p : d) {
        if (const auto* c = std::get_if<ContDomain>(&p.domain)) {
          if (!std::isfinite(c->lo) || !std::isfinite(c->hi)) {
            throw Error(ErrorCode::UnsupportedDomain,
                        "hyperparameter '" + p.name + "' has an unbounded range");
          }
        }
      }
      nf.disjuncts.push_back(std::move(d));
    }
    if (nf.disjuncts.empty()) {
      throw Error(ErrorCode::EmptySpace, "no configuration satisfies the schema");
    }
    return nf;
  }

 private:
  void check_cap(std::size_t n) const {
    if (n > opts_.max_disjuncts) {
      throw Error(ErrorCode::BlowupExceeded,
                  "normal form exceeds " + std::to_string(opts_.max_disjuncts) +
                      " disjuncts");
    }
  }

  std::vector<Domain> declared_value(const std::string& name, const SchemaNode& s) {
    auto v = value(s);
    if (!v) {
      throw Error(ErrorCode::UnsupportedDomain,
                  "hyperparameter '" + name + "' has no searchable domain");
    }
    return *v;
  }

  // Value-level DNF; nullopt means unrestricted.
  std::optional<std::vector<Domain>> value(const SchemaNode& s) {
    return std::visit(
        [&](const auto& x) -> std::optional<std::vector<Domain>> {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, RangeSchema>) {
            ContDomain c{x.lo, x.hi, x.lo_open, x.hi_open, x.integer, x.prior, 0};
            if (s.default_value() && s.default_value()->is_number()) {
              c.default_value = s.default_value()->as_number();
            } else {
              c.default_value = std::nan("");
            }
            if (cont_empty(c)) return std::vector<Domain>{};
            return std::vector<Domain>{c};
          } else if constexpr (std::is_same_v<T, EnumSchema>) {
            CatDomain c{x.values, s.default_value().value_or(x.values.front())};
            return std::vector<Domain>{c};
          } else if constexpr (std::is_same_v<T, AnyOfSchema>) {
            std::vector<Domain> out;
            for (const auto& ch : x.children) {
              auto v = value(*ch);
              if (!v) return std::nullopt;
              out.insert(out.end(), v->begin(), v->end());
            }
            check_cap(out.size());
            return out;
          } else if constexpr (std::is_same_v<T, AllOfSchema>) {
            std::optional<std::vector<Domain>> acc;
            for (const auto& ch : x.children) {
              auto v = value(*ch);
              if (!v) continue;
              if (!acc) {
                acc = std::move(v);
                continue;
              }
              std::vector<Domain> next;
              for (const auto& a : *acc) {
                for (const auto& b : *v) {
                  if (auto d = intersect_domain(a, b)) next.push_back(std::move(*d));
                }
              }
              check_cap(next.size());
              acc = std::move(next);
            }
            return acc;
          } else if constexpr (std::is_same_v<T, OperatorSlotSchema>) {
            return std::vector<Domain>{OpSlotDomain{}};
          } else if constexpr (std::is_same_v<T, AnySchema>) {
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, NotSchema>) {
            throw Error(ErrorCode::UnsupportedNegation,
                        "negation of a hyperparameter value is not supported");
          } else {
            throw Error(ErrorCode::UnsupportedDomain,
                        "nested objects are not hyperparameter domains");
          }
        },
        s.node());
  }

  Alternatives cross(const Alternatives& a, const Alternatives& b) {
    Alternatives out;
    for (const auto& x : a) {
      for (const auto& y : b) {
        if (auto r = intersect_record(x, y)) {
          out.push_back(std::move(*r));
          check_cap(out.size());
        }
      }
    }
    return out;
  }

  static std::optional<Record> intersect_record(const Record& a, const Record& b) {
    Record out;
    for (const auto& p : a) {
      if (const Param* q = find_param(b, p.name)) {
        auto d = intersect_domain(p.domain, q->domain);
        if (!d) return std::nullopt;
        out.push_back({p.name, std::move(*d)});
      } else {
        out.push_back(p);
      }
    }
    for (const auto& q : b) {
      if (!find_param(a, q.name)) out.push_back(q);
    }
    return out;
  }

  Alternatives record(const SchemaNode& s) {
    return std::visit(
        [&](const auto& x) -> Alternatives {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ObjectSchema>) {
            Alternatives acc{Record{}};
            for (const auto& [name, ps] : x.properties) {
              auto v = value(*ps);
              if (!v) continue;
              Alternatives next;
              for (const auto& r : acc) {
                for (const auto& d : *v) {
                  Record copy = r;
                  copy.push_back({name, d});
                  next.push_back(std::move(copy));
                  check_cap(next.size());
                }
              }
              acc = std::move(next);
            }
            return acc;
          } else if constexpr (std::is_same_v<T, AllOfSchema>) {
            Alternatives acc{Record{}};
            for (const auto& ch : x.children) acc = cross(acc, record(*ch));
            return acc;
          } else if constexpr (std::is_same_v<T, AnyOfSchema>) {
            Alternatives out;
            for (const auto& ch : x.children) {
              auto r = record(*ch);
              out.insert(out.end(), r.begin(), r.end());
              check_cap(out.size());
            }
            return out;
          } else if constexpr (std::is_same_v<T, NotSchema>) {
            return complement(*x.child);
          } else if constexpr (std::is_same_v<T, AnySchema>) {
            return Alternatives{Record{}};
          } else {
            throw Error(ErrorCode::UnsupportedDomain,
                        "constraint must be an object schema");
          }
        },
        s.node());
  }

  // not {p1: E1, ..., pk: Ek} = (p1 ∉ E1) ∨ ... ∨ (pk ∉ Ek), each taken
  // relative to the declared categorical domain of pi.
  Alternatives complement(const SchemaNode& s) {
    const auto* obj = s.as<ObjectSchema>();
    if (!obj) {
      throw Error(ErrorCode::UnsupportedNegation, "not must wrap an object of enums");
    }
    Alternatives out;
    for (const auto& [name, ps] : obj->properties) {
      const auto* e = ps->as<EnumSchema>();
      if (!e) {
        throw Error(ErrorCode::UnsupportedNegation,
                    "not over non-enum property '" + name + "'");
      }
      auto decl = std::find_if(declared_.begin(), declared_.end(),
                               [&](const auto& d) { return d.first == name; });
      if (decl == declared_.end()) {
        throw Error(ErrorCode::UnknownProperty,
                    "negated property '" + name + "' is not declared");
      }
      std::vector<Value> universe;
      for (const auto& d : declared_value(name, *decl->second)) {
        const auto* c = std::get_if<CatDomain>(&d);
        if (!c) {
          throw Error(ErrorCode::UnsupportedNegation,
                      "cannot complement non-categorical domain of '" + name + "'");
        }
        for (const auto& v : c->values) {
          if (std::find(universe.begin(), universe.end(), v) == universe.end()) {
            universe.push_back(v);
          }
        }
      }
      CatDomain rest;
      for (const auto& v : universe) {
        if (std::find(e->values.begin(), e->values.end(), v) == e->values.end()) {
          rest.values.push_back(v);
        }
      }
      if (rest.values.empty()) continue;
      rest.default_value = rest.values.front();
      out.push_back(Record{{name, rest}});
    }
    return out;
  }

  static std::optional<Value> leaf_default(const SchemaNode& s) {
    if (s.default_value()) return s.default_value();
    if (const auto* a = s.as<AnyOfSchema>()) {
      for (const auto& ch : a->children) {
        if (auto d = leaf_default(*ch)) return d;
      }
    }
    return std::nullopt;
  }

  // The property default when the domain admits it, else the domain's own
  // default, else a canonical point.
  static void fix_default(Param& p, const SchemaNode& declared) {
    auto prop_default = declared.default_value();
    std::visit(
        [&](auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, CatDomain>) {
            if (prop_default && admits(d, *prop_default)) {
              d.default_value = *prop_default;
            } else if (!admits(d, d.default_value)) {
              d.default_value = d.values.front();
            }
          } else if constexpr (std::is_same_v<T, ContDomain>) {
            if (prop_default && prop_default->is_number() && admits(d, *prop_default)) {
              d.default_value = prop_default->as_number();
            } else if (std::isnan(d.default_value) ||
                       !admits(d, Value(d.default_value))) {
              double mid = d.prior.kind == PriorKind::LogUniform
                               ? std::sqrt(d.lo * d.hi)
                               : (d.lo + d.hi) / 2;
              if (d.integer) {
                mid = std::round(mid);
                if (!in_bounds(mid, d)) mid = std::ceil(d.lo + (d.lo_open ? 0.5 : 0));
              }
              d.default_value = mid;
            }
          }
        },
        p.domain);
  }

  const PropertyList& declared_;
  NormalizeOptions opts_;
};

Prior merge_prior(const Prior& a, const Prior& b) {
  Prior p = a;
  if (b.kind == PriorKind::LogUniform) p.kind = PriorKind::LogUniform;
  if (!p.quantization) p.quantization = b.quantization;
  return p;
}

}  // namespace

std::vector<std::string> NormalForm::names() const {
  std::vector<std::string> out;
  if (disjuncts.empty()) return out;
  for (const auto& p : disjuncts.front()) out.push_back(p.name);
  return out;
}

std::optional<Domain> intersect_domain(const Domain& a, const Domain& b) {
  if (const auto* ca = std::get_if<CatDomain>(&a)) {
    CatDomain out;
    out.default_value = ca->default_value;
    for (const auto& v : ca->values) {
      if (admits(b, v)) out.values.push_back(v);
    }
    if (out.values.empty()) return std::nullopt;
    if (!admits(out, out.default_value)) out.default_value = out.values.front();
    return out;
  }
  if (std::holds_alternative<CatDomain>(b)) return intersect_domain(b, a);
  if (std::holds_alternative<OpSlotDomain>(a) || std::holds_alternative<OpSlotDomain>(b)) {
    if (std::holds_alternative<OpSlotDomain>(a) && std::holds_alternative<OpSlotDomain>(b)) {
      return a;
    }
    return std::nullopt;
  }
  const auto& x = std::get<ContDomain>(a);
  const auto& y = std::get<ContDomain>(b);
  ContDomain c = x;
  if (y.lo > x.lo) {
    c.lo = y.lo;
    c.lo_open = y.lo_open;
  } else if (y.lo == x.lo) {
    c.lo_open = x.lo_open || y.lo_open;
  }
  if (y.hi < x.hi) {
    c.hi = y.hi;
    c.hi_open = y.hi_open;
  } else if (y.hi == x.hi) {
    c.hi_open = x.hi_open || y.hi_open;
  }
  c.integer = x.integer || y.integer;
  c.prior = merge_prior(x.prior, y.prior);
  if (cont_empty(c)) return std::nullopt;
  if (c.prior.kind == PriorKind::LogUniform && !(c.lo > 0)) {
    throw Error(ErrorCode::InvalidSchema, "loguniform prior needs a positive range");
  }
  return c;
}

bool admits(const Domain& d, const Value& v) {
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CatDomain>) {
          return std::find(x.values.begin(), x.values.end(), v) != x.values.end();
        } else if constexpr (std::is_same_v<T, ContDomain>) {
          if (!v.is_number()) return false;
          if (x.integer && !v.is_integral()) return false;
          return in_bounds(v.as_number(), x);
        } else {
          return v.is_operator() && v.as_operator() != nullptr;
        }
      },
      d);
}

bool member(const NormalForm& nf, const Config& config) {
  for (const auto& d : nf.disjuncts) {
    if (d.size() != config.size()) continue;
    bool ok = true;
    for (const auto& p : d) {
      auto it = config.find(p.name);
      if (it == config.end() || !admits(p.domain, it->second)) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

NormalForm normalize(const SchemaNode& schema, const PropertyList& declared,
                     NormalizeOptions options) {
  return Normalizer(declared, options).run(schema);
}

NormalForm normalize(const SchemaNode& schema, NormalizeOptions options) {
  return normalize(schema, declared_domains(schema), options);
}

SchemaPtr drop_constraints(const SchemaPtr& schema) {
  if (schema->as<ObjectSchema>()) return schema;
  if (const auto* a = schema->as<AllOfSchema>()) {
    if (!a->children.empty() && a->children.front()->as<ObjectSchema>()) {
      return a->children.front();
    }
  }
  throw Error(ErrorCode::NoBaseObject, "schema has no base object");
}

SchemaPtr schema_from_normal_form(const NormalForm& nf) {
  AnyOfSchema any;
  for (const auto& d : nf.disjuncts) {
    ObjectSchema obj;
    obj.additional_allowed = false;
    for (const auto& p : d) {
      SchemaPtr s = std::visit(
          [](const auto& x) -> SchemaPtr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, CatDomain>) {
              return make_schema(EnumSchema{x.values}, x.default_value);
            } else if constexpr (std::is_same_v<T, ContDomain>) {
              RangeSchema r{x.lo, x.hi, x.lo_open, x.hi_open, x.integer, x.prior};
              Value def = x.integer ? Value(static_cast<std::int64_t>(x.default_value))
                                    : Value(x.default_value);
              return make_schema(r, def);
            } else {
              return make_schema(OperatorSlotSchema{});
            }
          },
          p.domain);
      obj.properties.emplace_back(p.name, s);
    }
    any.children.push_back(make_schema(std::move(obj)));
  }
  if (any.children.size() == 1) return any.children.front();
  return make_schema(std::move(any));
}

bool operator==(const CatDomain& a, const CatDomain& b) {
  return a.values == b.values && a.default_value == b.default_value;
}

bool operator==(const ContDomain& a, const ContDomain& b) {
  return a.lo == b.lo && a.hi == b.hi && a.lo_open == b.lo_open &&
         a.hi_open == b.hi_open && a.integer == b.integer && a.prior == b.prior &&
         a.default_value == b.default_value;
}

bool operator==(const OpSlotDomain& a, const OpSlotDomain& b) {
  return a.marker == b.marker && a.nested == b.nested;
}

bool operator==(const Param& a, const Param& b) {
  return a.name == b.name && a.domain == b.domain;
}

namespace {

// Display form: integral doubles without the ".0" marker.
std::string compact(double x) {
  std::string s = format_number(x);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s;
}

}  // namespace

std::string domain_to_string(const Domain& d) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CatDomain>) {
          std::string s = "[";
          for (std::size_t i = 0; i < x.values.size(); ++i) {
            if (i) s += ",";
            s += x.values[i].to_token();
          }
          return s + "]";
        } else if constexpr (std::is_same_v<T, ContDomain>) {
          return std::string(x.lo_open ? "(" : "[") + compact(x.lo) + ".." +
                 compact(x.hi) + (x.hi_open ? ")" : "]");
        } else {
          return "<operator " + x.marker + ">";
        }
      },
      d);
}

std::string normal_form_to_string(const NormalForm& nf) {
  std::string out;
  for (const auto& d : nf.disjuncts) {
    if (!out.empty()) out += " ∨ ";
    out += "{";
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (i) out += ", ";
      out += d[i].name + ":" + domain_to_string(d[i].domain);
    }
    out += "}";
  }
  return out;
}

}  // namespace lalec
