#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>

#include "json.hpp"

namespace lalec {

/// Insertion-ordered JSON; declaration order of properties is significant.
using Json = nlohmann::ordered_json;

class Operator;
using OperatorRef = std::shared_ptr<const Operator>;

/// A hyperparameter value: a JSON scalar or a nested operator (for
/// operator-valued hyperparameters of higher-order operators).
class Value {
 public:
  using Storage = std::variant<std::monostate, bool, std::int64_t, double,
                               std::string, OperatorRef>;

  Value() = default;
  Value(std::nullptr_t) {}
  Value(bool b) : v_(b) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(std::int64_t i) : v_(i) {}
  Value(double d) : v_(d) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(OperatorRef op) : v_(std::move(op)) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_double() const { return std::holds_alternative<double>(v_); }
  bool is_number() const { return is_int() || is_double(); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_operator() const { return std::holds_alternative<OperatorRef>(v_); }

  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const;
  double as_number() const;
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const OperatorRef& as_operator() const { return std::get<OperatorRef>(v_); }

  /// True for numbers with no fractional part.
  bool is_integral() const;

  const Storage& storage() const { return v_; }

  /// JSON-literal rendering: `true`, `0.25`, `"mle"`, `null`; operators
  /// render as their DSL text.
  std::string to_literal() const;
  /// Like to_literal() but strings are unquoted.
  std::string to_token() const;

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

 private:
  Storage v_;
};

using Config = std::map<std::string, Value>;

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double d);

Json value_to_json(const Value& v);
/// Scalars only; objects of the form {"operator": ..., "config": ...} are
/// resolved by the registry-aware loader in the operator module.
Value value_from_json(const Json& j);

Json config_to_json(const Config& c);
Config config_from_json(const Json& j);

}  // namespace lalec
