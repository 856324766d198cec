#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lalec/schema.hpp"
#include "lalec/value.hpp"

namespace lalec {

struct SearchIR;

/// Finite set of values.
struct CatDomain {
  std::vector<Value> values;
  Value default_value;
};

/// Interval of reals (or integers).
struct ContDomain {
  double lo = 0;
  double hi = 0;
  bool lo_open = false;
  bool hi_open = false;
  bool integer = false;
  Prior prior;
  double default_value = 0;
};

/// Operator-valued hyperparameter. `nested` is null while normalizing and
/// is filled in by combine() once the slot is bound to an operator.
struct OpSlotDomain {
  std::shared_ptr<const SearchIR> nested;
  std::string marker;
};

using Domain = std::variant<CatDomain, ContDomain, OpSlotDomain>;

struct Param {
  std::string name;
  Domain domain;
};

using Disjunct = std::vector<Param>;

/// Disjunction of records; every record binds the same names in the same
/// (declaration) order.
struct NormalForm {
  std::vector<Disjunct> disjuncts;

  std::vector<std::string> names() const;
};

struct NormalizeOptions {
  std::size_t max_disjuncts = 10000;
};

/// Rewrites `schema` into a disjunction of records. `declared` supplies the
/// base domains used to fill unmentioned names and to complement `not`.
/// Throws Error(BlowupExceeded), Error(UnsupportedNegation),
/// Error(UnsupportedDomain), Error(EmptySpace).
NormalForm normalize(const SchemaNode& schema, const PropertyList& declared,
                     NormalizeOptions options = {});
/// normalize(schema, declared_domains(schema)).
NormalForm normalize(const SchemaNode& schema, NormalizeOptions options = {});

std::optional<Domain> intersect_domain(const Domain& a, const Domain& b);

bool admits(const Domain& d, const Value& v);
/// True iff some disjunct admits every value and `config` binds exactly
/// the normal form's names.
bool member(const NormalForm& nf, const Config& config);

/// The base object alone, without constraint conjuncts.
SchemaPtr drop_constraints(const SchemaPtr& schema);

/// An anyOf-of-objects schema with the same meaning as `nf`.
SchemaPtr schema_from_normal_form(const NormalForm& nf);

bool operator==(const CatDomain& a, const CatDomain& b);
bool operator==(const ContDomain& a, const ContDomain& b);
bool operator==(const OpSlotDomain& a, const OpSlotDomain& b);
bool operator==(const Param& a, const Param& b);

std::string domain_to_string(const Domain& d);
/// `{N:(0..1)} ∨ {N:[mle]}` style rendering, in source order.
std::string normal_form_to_string(const NormalForm& nf);

}  // namespace lalec
