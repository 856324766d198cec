#include "lalec/schema.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lalec/error.hpp"

namespace lalec {

using json = Json;

const SchemaPtr* ObjectSchema::find(std::string_view name) const {
  for (const auto& [k, v] : properties) {
    if (k == name) return &v;
  }
  return nullptr;
}

SchemaNode::SchemaNode(Variant node, std::optional<Value> default_value,
                       std::string description)
    : node_(std::move(node)),
      default_(std::move(default_value)),
      description_(std::move(description)) {}

namespace {

bool same_ptr_schema(const SchemaPtr& a, const SchemaPtr& b) {
  if (!a || !b) return a == b;
  return *a == *b;
}

bool same_children(const std::vector<SchemaPtr>& a,
                   const std::vector<SchemaPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_ptr_schema(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

bool operator==(const SchemaNode& a, const SchemaNode& b) {
  if (a.node().index() != b.node().index()) return false;
  if (a.default_value() != b.default_value()) return false;
  if (a.description() != b.description()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node());
        if constexpr (std::is_same_v<T, ObjectSchema>) {
          if (x.required != y.required ||
              x.additional_allowed != y.additional_allowed ||
              x.properties.size() != y.properties.size()) {
            return false;
          }
          for (std::size_t i = 0; i < x.properties.size(); ++i) {
            if (x.properties[i].first != y.properties[i].first ||
                !same_ptr_schema(x.properties[i].second,
                                 y.properties[i].second)) {
              return false;
            }
          }
          return true;
        } else if constexpr (std::is_same_v<T, RangeSchema>) {
          return x.lo == y.lo && x.hi == y.hi && x.lo_open == y.lo_open &&
                 x.hi_open == y.hi_open && x.integer == y.integer &&
                 x.prior == y.prior;
        } else if constexpr (std::is_same_v<T, EnumSchema>) {
          return x.values == y.values;
        } else if constexpr (std::is_same_v<T, AnyOfSchema> ||
                             std::is_same_v<T, AllOfSchema>) {
          return same_children(x.children, y.children);
        } else if constexpr (std::is_same_v<T, NotSchema>) {
          return same_ptr_schema(x.child, y.child);
        } else {
          return true;
        }
      },
      a.node());
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string join_path(const std::vector<std::string>& path) {
  if (path.empty()) return "/";
  std::string s;
  for (const auto& p : path) s += "/" + p;
  return s;
}

[[noreturn]] void unsupported(const std::vector<std::string>& path,
                              const std::string& keyword) {
  throw Error(ErrorCode::UnsupportedKeyword,
              "unsupported keyword '" + keyword + "' at " + join_path(path));
}

[[noreturn]] void invalid(const std::vector<std::string>& path,
                          const std::string& what) {
  throw Error(ErrorCode::InvalidSchema, what + " at " + join_path(path));
}

const std::set<std::string>& known_keywords() {
  static const std::set<std::string> k = {
      "type",         "properties",       "required",
      "additionalProperties", "minimum",  "maximum",
      "exclusiveMinimum", "exclusiveMaximum", "enum",
      "anyOf",        "allOf",            "not",
      "default",      "distribution",     "quantization",
      "typeForOptimizer", "description"};
  return k;
}

double number_of(const json& j, const std::vector<std::string>& path,
                 const char* key) {
  if (!j.is_number()) invalid(path, std::string(key) + " must be a number");
  return j.get<double>();
}

SchemaPtr parse_node(const json& j, std::vector<std::string> path);

std::vector<SchemaPtr> parse_list(const json& j,
                                  const std::vector<std::string>& path,
                                  const char* key) {
  if (!j.is_array() || j.empty()) {
    invalid(path, std::string(key) + " must be a nonempty array");
  }
  std::vector<SchemaPtr> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto p = path;
    p.push_back(std::string(key) + "[" + std::to_string(i) + "]");
    out.push_back(parse_node(j[i], p));
  }
  return out;
}

void check_negation(const SchemaNode& child,
                    const std::vector<std::string>& path) {
  const auto* obj = child.as<ObjectSchema>();
  if (!obj || obj->properties.empty()) unsupported(path, "not");
  for (const auto& [name, prop] : obj->properties) {
    if (!prop->as<EnumSchema>()) unsupported(path, "not");
  }
}

SchemaPtr parse_node(const json& j, std::vector<std::string> path) {
  if (!j.is_object()) invalid(path, "schema must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keywords().count(key)) unsupported(path, key);
  }

  std::optional<Value> def;
  if (j.contains("default")) def = value_from_json(j["default"]);
  std::string description;
  if (j.contains("description")) {
    if (!j["description"].is_string()) invalid(path, "description");
    description = j["description"].get<std::string>();
  }

  std::string type;
  if (j.contains("type")) {
    if (!j["type"].is_string()) unsupported(path, "type");
    type = j["type"].get<std::string>();
  }

  auto structural = [&](std::initializer_list<const char*> keys) {
    int n = 0;
    for (const char* k : keys) n += j.contains(k) ? 1 : 0;
    return n;
  };
  if (structural({"enum", "anyOf", "allOf", "not", "typeForOptimizer"}) > 1) {
    unsupported(path, "combined structural keywords");
  }
  bool range_keys = j.contains("minimum") || j.contains("maximum") ||
                    j.contains("exclusiveMinimum") ||
                    j.contains("exclusiveMaximum") ||
                    j.contains("distribution") || j.contains("quantization");
  bool object_keys = j.contains("properties") || j.contains("required") ||
                     j.contains("additionalProperties");

  if (j.contains("enum")) {
    if (range_keys || object_keys) unsupported(path, "enum with range keywords");
    const auto& e = j["enum"];
    if (!e.is_array() || e.empty()) invalid(path, "enum must be nonempty");
    EnumSchema node;
    for (const auto& v : e) {
      Value val = value_from_json(v);
      if (std::find(node.values.begin(), node.values.end(), val) !=
          node.values.end()) {
        invalid(path, "duplicate enum value " + val.to_literal());
      }
      node.values.push_back(std::move(val));
    }
    if (def && std::find(node.values.begin(), node.values.end(), *def) ==
                   node.values.end()) {
      invalid(path, "default not among enum values");
    }
    return make_schema(std::move(node), def, description);
  }
  if (j.contains("anyOf") || j.contains("allOf")) {
    if (range_keys || object_keys || !type.empty()) {
      unsupported(path, "type alongside anyOf/allOf");
    }
    if (j.contains("anyOf")) {
      return make_schema(AnyOfSchema{parse_list(j["anyOf"], path, "anyOf")},
                         def, description);
    }
    return make_schema(AllOfSchema{parse_list(j["allOf"], path, "allOf")}, def,
                       description);
  }
  if (j.contains("not")) {
    auto p = path;
    p.push_back("not");
    auto child = parse_node(j["not"], p);
    check_negation(*child, path);
    return make_schema(NotSchema{child}, def, description);
  }
  if (j.contains("typeForOptimizer")) {
    if (j["typeForOptimizer"] != "operator") {
      unsupported(path, "typeForOptimizer");
    }
    return make_schema(OperatorSlotSchema{}, def, description);
  }
  if (type == "object" || (type.empty() && object_keys)) {
    if (range_keys) unsupported(path, "range keywords on object");
    ObjectSchema node;
    if (j.contains("properties")) {
      const auto& props = j["properties"];
      if (!props.is_object()) invalid(path, "properties must be an object");
      for (const auto& [name, sub] : props.items()) {
        auto p = path;
        p.push_back(name);
        node.properties.emplace_back(name, parse_node(sub, p));
      }
    }
    if (j.contains("required")) {
      for (const auto& r : j["required"]) {
        node.required.push_back(r.get<std::string>());
      }
    }
    if (j.contains("additionalProperties")) {
      if (!j["additionalProperties"].is_boolean()) {
        unsupported(path, "additionalProperties");
      }
      node.additional_allowed = j["additionalProperties"].get<bool>();
    }
    return make_schema(std::move(node), def, description);
  }
  if (type == "number" || type == "integer") {
    if (object_keys) unsupported(path, "object keywords on number");
    RangeSchema r;
    r.integer = type == "integer";
    if (j.contains("minimum")) r.lo = number_of(j["minimum"], path, "minimum");
    if (j.contains("maximum")) r.hi = number_of(j["maximum"], path, "maximum");
    if (j.contains("exclusiveMinimum")) {
      const auto& e = j["exclusiveMinimum"];
      if (e.is_boolean()) {
        r.lo_open = e.get<bool>();
      } else {
        r.lo = number_of(e, path, "exclusiveMinimum");
        r.lo_open = true;
      }
    }
    if (j.contains("exclusiveMaximum")) {
      const auto& e = j["exclusiveMaximum"];
      if (e.is_boolean()) {
        r.hi_open = e.get<bool>();
      } else {
        r.hi = number_of(e, path, "exclusiveMaximum");
        r.hi_open = true;
      }
    }
    if (j.contains("distribution")) {
      const auto& d = j["distribution"];
      if (d == "uniform") {
        r.prior.kind = PriorKind::Uniform;
      } else if (d == "loguniform") {
        r.prior.kind = PriorKind::LogUniform;
      } else {
        unsupported(path, "distribution");
      }
    }
    if (j.contains("quantization")) {
      double q = number_of(j["quantization"], path, "quantization");
      if (!(q > 0)) invalid(path, "quantization must be positive");
      r.prior.quantization = q;
    }
    if (r.lo > r.hi || (r.lo == r.hi && (r.lo_open || r.hi_open))) {
      invalid(path, "empty range");
    }
    if (r.prior.kind == PriorKind::LogUniform && !(r.lo > 0)) {
      invalid(path, "loguniform prior requires a positive lower bound");
    }
    return make_schema(r, def, description);
  }
  if (type == "boolean") {
    if (range_keys || object_keys) unsupported(path, "keywords on boolean");
    return make_schema(EnumSchema{{Value(true), Value(false)}}, def,
                       description);
  }
  if (type == "null") {
    return make_schema(EnumSchema{{Value()}}, def, description);
  }
  if (!type.empty()) unsupported(path, "type:" + type);
  if (range_keys) unsupported(path, "range keywords without numeric type");
  return make_schema(AnySchema{}, def, description);
}

}  // namespace

SchemaPtr schema_from_json(const json& j) { return parse_node(j, {}); }

SchemaPtr parse_schema(std::string_view document) {
  json j;
  try {
    j = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  return schema_from_json(j);
}

json schema_to_json(const SchemaNode& s) {
  json j = json::object();
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ObjectSchema>) {
          j["type"] = "object";
          json props = json::object();
          for (const auto& [k, v] : x.properties) props[k] = schema_to_json(*v);
          j["properties"] = props;
          if (!x.required.empty()) j["required"] = x.required;
          if (!x.additional_allowed) j["additionalProperties"] = false;
        } else if constexpr (std::is_same_v<T, RangeSchema>) {
          j["type"] = x.integer ? "integer" : "number";
          if (std::isfinite(x.lo)) j["minimum"] = x.lo;
          if (std::isfinite(x.hi)) j["maximum"] = x.hi;
          if (x.lo_open) j["exclusiveMinimum"] = true;
          if (x.hi_open) j["exclusiveMaximum"] = true;
          j["distribution"] =
              x.prior.kind == PriorKind::LogUniform ? "loguniform" : "uniform";
          if (x.prior.quantization) j["quantization"] = *x.prior.quantization;
        } else if constexpr (std::is_same_v<T, EnumSchema>) {
          json vals = json::array();
          for (const auto& v : x.values) vals.push_back(value_to_json(v));
          j["enum"] = vals;
        } else if constexpr (std::is_same_v<T, AnyOfSchema>) {
          json c = json::array();
          for (const auto& ch : x.children) c.push_back(schema_to_json(*ch));
          j["anyOf"] = c;
        } else if constexpr (std::is_same_v<T, AllOfSchema>) {
          json c = json::array();
          for (const auto& ch : x.children) c.push_back(schema_to_json(*ch));
          j["allOf"] = c;
        } else if constexpr (std::is_same_v<T, NotSchema>) {
          j["not"] = schema_to_json(*x.child);
        } else if constexpr (std::is_same_v<T, OperatorSlotSchema>) {
          j["typeForOptimizer"] = "operator";
        }
      },
      s.node());
  if (s.default_value()) j["default"] = value_to_json(*s.default_value());
  if (!s.description().empty()) j["description"] = s.description();
  return j;
}

// ---------------------------------------------------------------------------
// Validation

const char* violation_kind_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::Type: return "type";
    case ViolationKind::Range: return "range";
    case ViolationKind::Enum: return "enum";
    case ViolationKind::UnknownName: return "unknownName";
    case ViolationKind::ConstraintViolated: return "constraintViolated";
  }
  return "?";
}

std::string ValidationReport::to_string() const {
  if (ok) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const auto& v = violations[i];
    if (i) os << "\n";
    os << violation_kind_name(v.kind) << " at " << join_path(v.path) << ": "
       << v.description;
  }
  return os.str();
}

namespace {

using Path = std::vector<std::string>;

void add(std::vector<Violation>& out, Path path, std::string desc,
         ViolationKind kind) {
  Violation v{std::move(path), std::move(desc), kind};
  if (std::find(out.begin(), out.end(), v) == out.end()) {
    out.push_back(std::move(v));
  }
}

bool in_range(double x, const RangeSchema& r) {
  if (r.lo_open ? !(x > r.lo) : !(x >= r.lo)) return false;
  if (r.hi_open ? !(x < r.hi) : !(x <= r.hi)) return false;
  return true;
}

std::string describe_range(const RangeSchema& r) {
  return std::string(r.lo_open ? "(" : "[") + format_number(r.lo) + ", " +
         format_number(r.hi) + (r.hi_open ? ")" : "]");
}

void check_value(const Value& v, const SchemaNode& s, const Path& path,
                 std::vector<Violation>& out);
void check_object(const Config& c, const SchemaNode& s, const Path& path,
                  std::vector<Violation>& out);

std::string constraint_text(const SchemaNode& s, const char* fallback) {
  return s.description().empty() ? fallback : s.description();
}

void check_value(const Value& v, const SchemaNode& s, const Path& path,
                 std::vector<Violation>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, RangeSchema>) {
          if (!v.is_number()) {
            add(out, path, "expected a number, got " + v.to_literal(),
                ViolationKind::Type);
          } else if (x.integer && !v.is_integral()) {
            add(out, path, "expected an integer, got " + v.to_literal(),
                ViolationKind::Type);
          } else if (!in_range(v.as_number(), x)) {
            add(out, path,
                v.to_literal() + " outside " + describe_range(x),
                ViolationKind::Range);
          }
        } else if constexpr (std::is_same_v<T, EnumSchema>) {
          if (std::find(x.values.begin(), x.values.end(), v) ==
              x.values.end()) {
            std::string vals;
            for (const auto& e : x.values) {
              vals += (vals.empty() ? "" : ", ") + e.to_literal();
            }
            add(out, path, v.to_literal() + " not in [" + vals + "]",
                ViolationKind::Enum);
          }
        } else if constexpr (std::is_same_v<T, AnyOfSchema>) {
          std::vector<Violation> first;
          for (std::size_t i = 0; i < x.children.size(); ++i) {
            std::vector<Violation> tmp;
            check_value(v, *x.children[i], path, tmp);
            if (tmp.empty()) return;
            if (i == 0) first = std::move(tmp);
          }
          add(out, path,
              constraint_text(s, "value matches no alternative") + " (" +
                  v.to_literal() + ")",
              first.empty() ? ViolationKind::ConstraintViolated
                            : first.front().kind);
        } else if constexpr (std::is_same_v<T, AllOfSchema>) {
          for (const auto& ch : x.children) check_value(v, *ch, path, out);
        } else if constexpr (std::is_same_v<T, NotSchema>) {
          std::vector<Violation> tmp;
          check_value(v, *x.child, path, tmp);
          if (tmp.empty()) {
            add(out, path, constraint_text(s, "negated schema matched"),
                ViolationKind::ConstraintViolated);
          }
        } else if constexpr (std::is_same_v<T, OperatorSlotSchema>) {
          if (!v.is_operator() || !v.as_operator()) {
            add(out, path, "expected an operator, got " + v.to_literal(),
                ViolationKind::Type);
          }
        } else if constexpr (std::is_same_v<T, ObjectSchema>) {
          add(out, path, "expected an object, got " + v.to_literal(),
              ViolationKind::Type);
        }
      },
      s.node());
}

void check_object(const Config& c, const SchemaNode& s, const Path& path,
                  std::vector<Violation>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ObjectSchema>) {
          for (const auto& [name, value] : c) {
            Path p = path;
            p.push_back(name);
            if (const auto* prop = x.find(name)) {
              check_value(value, **prop, p, out);
            } else if (!x.additional_allowed) {
              add(out, p, "unknown hyperparameter '" + name + "'",
                  ViolationKind::UnknownName);
            }
          }
          for (const auto& r : x.required) {
            if (!c.count(r)) {
              Path p = path;
              p.push_back(r);
              add(out, p, "missing required hyperparameter",
                  ViolationKind::ConstraintViolated);
            }
          }
        } else if constexpr (std::is_same_v<T, AllOfSchema>) {
          for (const auto& ch : x.children) check_object(c, *ch, path, out);
        } else if constexpr (std::is_same_v<T, AnyOfSchema>) {
          for (const auto& ch : x.children) {
            std::vector<Violation> tmp;
            check_object(c, *ch, path, tmp);
            if (tmp.empty()) return;
          }
          add(out, path, constraint_text(s, "no alternative of anyOf holds"),
              ViolationKind::ConstraintViolated);
        } else if constexpr (std::is_same_v<T, NotSchema>) {
          std::vector<Violation> tmp;
          check_object(c, *x.child, path, tmp);
          if (tmp.empty()) {
            add(out, path, constraint_text(s, "negated constraint holds"),
                ViolationKind::ConstraintViolated);
          }
        } else if constexpr (std::is_same_v<T, AnySchema>) {
        } else {
          add(out, path, "expected a hyperparameter object",
              ViolationKind::Type);
        }
      },
      s.node());
}

const ObjectSchema* find_base(const SchemaNode& s) {
  if (const auto* o = s.as<ObjectSchema>()) return o;
  if (const auto* a = s.as<AllOfSchema>()) {
    if (!a->children.empty()) return a->children.front()->as<ObjectSchema>();
  }
  return nullptr;
}

}  // namespace

ValidationReport validate(const Config& config, const SchemaNode& schema) {
  ValidationReport r;
  if (const auto* base = find_base(schema)) {
    for (const auto& [name, _] : config) {
      if (!base->find(name)) {
        add(r.violations, {name}, "unknown hyperparameter '" + name + "'",
            ViolationKind::UnknownName);
      }
    }
  }
  check_object(config, schema, {}, r.violations);
  r.ok = r.violations.empty();
  return r;
}

ValidationReport validate_value(const Value& value, const SchemaNode& schema,
                                std::vector<std::string> path) {
  ValidationReport r;
  check_value(value, schema, path, r.violations);
  r.ok = r.violations.empty();
  return r;
}

const ObjectSchema& base_object(const SchemaNode& schema) {
  const auto* b = find_base(schema);
  if (!b) {
    throw Error(ErrorCode::NoBaseObject,
                "schema has no base object (object or allOf[object, ...])");
  }
  return *b;
}

PropertyList declared_domains(const SchemaNode& schema) {
  return base_object(schema).properties;
}

Config default_config(const SchemaNode& schema) {
  Config c;
  for (const auto& [name, prop] : base_object(schema).properties) {
    if (!prop->default_value()) {
      throw Error(ErrorCode::MissingDefault,
                  "hyperparameter '" + name + "' has no default");
    }
    c.emplace(name, *prop->default_value());
  }
  return c;
}

SchemaPtr replace_properties(const SchemaNode& schema,
                             const PropertyList& overrides) {
  ObjectSchema base = base_object(schema);
  for (const auto& [name, sub] : overrides) {
    bool found = false;
    for (auto& [k, v] : base.properties) {
      if (k == name) {
        v = sub;
        found = true;
      }
    }
    if (!found) {
      throw Error(ErrorCode::UnknownProperty,
                  "cannot customize unknown hyperparameter '" + name + "'");
    }
  }
  if (schema.as<ObjectSchema>()) {
    return std::make_shared<const SchemaNode>(
        SchemaNode::Variant(std::move(base)), schema.default_value(),
        schema.description());
  }
  AllOfSchema all = *schema.as<AllOfSchema>();
  all.children[0] = std::make_shared<const SchemaNode>(
      SchemaNode::Variant(std::move(base)), all.children[0]->default_value(),
      all.children[0]->description());
  return std::make_shared<const SchemaNode>(SchemaNode::Variant(std::move(all)),
                                            schema.default_value(),
                                            schema.description());
}

}  // namespace lalec
