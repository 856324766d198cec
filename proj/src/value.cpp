#include "lalec/value.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "lalec/dsl.hpp"
#include "lalec/error.hpp"
#include "lalec/operator.hpp"

namespace lalec {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::UnsupportedKeyword: return "UnsupportedKeyword";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::MissingDefault: return "MissingDefault";
    case ErrorCode::NoBaseObject: return "NoBaseObject";
    case ErrorCode::TooFewAlternatives: return "TooFewAlternatives";
    case ErrorCode::NotTrainable: return "NotTrainable";
    case ErrorCode::NotTrained: return "NotTrained";
    case ErrorCode::UnresolvedChoice: return "UnresolvedChoice";
    case ErrorCode::ImplementationError: return "ImplementationError";
    case ErrorCode::ConstraintTrap: return "ConstraintTrap";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnknownProperty: return "UnknownProperty";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownOperator: return "UnknownOperator";
    case ErrorCode::UndefinedNonterminal: return "UndefinedNonterminal";
    case ErrorCode::MissingStart: return "MissingStart";
    case ErrorCode::NotExpressible: return "NotExpressible";
    case ErrorCode::EmptyAfterPruning: return "EmptyAfterPruning";
    case ErrorCode::NoTerminatingAlternative: return "NoTerminatingAlternative";
    case ErrorCode::BlowupExceeded: return "BlowupExceeded";
    case ErrorCode::UnsupportedNegation: return "UnsupportedNegation";
    case ErrorCode::UnsupportedDomain: return "UnsupportedDomain";
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::UnknownMarker: return "UnknownMarker";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::NoValidTrial: return "NoValidTrial";
    case ErrorCode::BadCsv: return "BadCsv";
    case ErrorCode::LabelColumnMissing: return "LabelColumnMissing";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::int64_t Value::as_int() const {
  if (auto* i = std::get_if<std::int64_t>(&v_)) return *i;
  return static_cast<std::int64_t>(std::get<double>(v_));
}

double Value::as_number() const {
  if (auto* i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
  return std::get<double>(v_);
}

bool Value::is_integral() const {
  if (is_int()) return true;
  if (!is_double()) return false;
  double d = std::get<double>(v_);
  return std::isfinite(d) && std::floor(d) == d;
}

std::string format_number(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
  std::string s(buf.data(), end);
  // Keep a decimal marker so that the text reads back as a double.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string Value::to_literal() const {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "null";
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(x);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return Json(x).dump();
        } else {
          return x ? pretty_print(*x) : "null";
        }
      },
      v_);
}

std::string Value::to_token() const {
  if (is_string()) return as_string();
  return to_literal();
}

bool operator==(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) {
    if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
    return a.as_number() == b.as_number();
  }
  if (a.v_.index() != b.v_.index()) return false;
  if (a.is_operator()) {
    const auto& x = a.as_operator();
    const auto& y = b.as_operator();
    if (!x || !y) return x == y;
    return *x == *y;
  }
  return a.v_ == b.v_;
}

Json value_to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, OperatorRef>) {
          if (!x) return nullptr;
          return operator_to_json(*x);
        } else {
          return x;
        }
      },
      v.storage());
}

Value value_from_json(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return Value();
    case Json::value_t::boolean: return Value(j.get<bool>());
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
      return Value(j.get<std::int64_t>());
    case Json::value_t::number_float: return Value(j.get<double>());
    case Json::value_t::string: return Value(j.get<std::string>());
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "not a scalar hyperparameter value: " + j.dump());
  }
}

Json config_to_json(const Config& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c) j[k] = value_to_json(v);
  return j;
}

Config config_from_json(const Json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  }
  Config c;
  for (const auto& [k, v] : j.items()) c.emplace(k, value_from_json(v));
  return c;
}

}  // namespace lalec
