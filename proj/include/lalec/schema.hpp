#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lalec/value.hpp"

namespace lalec {

enum class PriorKind { Uniform, LogUniform };

struct Prior {
  PriorKind kind = PriorKind::Uniform;
  std::optional<double> quantization;

  friend bool operator==(const Prior&, const Prior&) = default;
};

class SchemaNode;
using SchemaPtr = std::shared_ptr<const SchemaNode>;
using PropertyList = std::vector<std::pair<std::string, SchemaPtr>>;

struct ObjectSchema {
  PropertyList properties;
  std::vector<std::string> required;
  bool additional_allowed = true;

  const SchemaPtr* find(std::string_view name) const;
};

struct RangeSchema {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool hi_open = false;
  bool integer = false;
  Prior prior;
};

struct EnumSchema {
  std::vector<Value> values;
};

struct AnyOfSchema {
  std::vector<SchemaPtr> children;
};

struct AllOfSchema {
  std::vector<SchemaPtr> children;
};

/// Only `not` over an object of enum-valued properties is representable.
struct NotSchema {
  SchemaPtr child;
};

struct OperatorSlotSchema {};

struct AnySchema {};

/// Immutable node of the supported JSON-Schema subset. `default` and
/// `description` may decorate any node.
class SchemaNode {
 public:
  using Variant = std::variant<ObjectSchema, RangeSchema, EnumSchema,
                               AnyOfSchema, AllOfSchema, NotSchema,
                               OperatorSlotSchema, AnySchema>;

  explicit SchemaNode(Variant node, std::optional<Value> default_value = {},
                      std::string description = {});

  const Variant& node() const { return node_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&node_);
  }
  const std::optional<Value>& default_value() const { return default_; }
  const std::string& description() const { return description_; }

 private:
  Variant node_;
  std::optional<Value> default_;
  std::string description_;
};

bool operator==(const SchemaNode& a, const SchemaNode& b);

template <class T>
SchemaPtr make_schema(T node, std::optional<Value> default_value = {},
                      std::string description = {}) {
  return std::make_shared<const SchemaNode>(
      SchemaNode::Variant(std::move(node)), std::move(default_value),
      std::move(description));
}

/// Parses a schema document. Throws Error(MalformedJson) on bad JSON and
/// Error(UnsupportedKeyword) for keywords outside the subset.
SchemaPtr parse_schema(std::string_view document);
SchemaPtr schema_from_json(const Json& j);
Json schema_to_json(const SchemaNode& s);

enum class ViolationKind { Type, Range, Enum, UnknownName, ConstraintViolated };

const char* violation_kind_name(ViolationKind k);

struct Violation {
  std::vector<std::string> path;
  std::string description;
  ViolationKind kind;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;

  std::string to_string() const;
  friend bool operator==(const ValidationReport&,
                         const ValidationReport&) = default;
};

/// Checks `config` against `schema`. Names that are not declared by the
/// base object are reported as UnknownName; absent names are latent and
/// never violate anything on their own.
ValidationReport validate(const Config& config, const SchemaNode& schema);

/// Checks a single value against a property schema.
ValidationReport validate_value(const Value& value, const SchemaNode& schema,
                                std::vector<std::string> path = {});

Config default_config(const SchemaNode& schema);

/// The base object: the schema itself, or the first conjunct of a
/// top-level allOf. Throws Error(NoBaseObject).
const ObjectSchema& base_object(const SchemaNode& schema);
PropertyList declared_domains(const SchemaNode& schema);

/// Returns a copy of `schema` with the named base properties replaced.
SchemaPtr replace_properties(const SchemaNode& schema,
                             const PropertyList& overrides);

}  // namespace lalec
