#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lalec/rng.hpp"
#include "lalec/space.hpp"

namespace lalec {

// Classic PCS dialect (see docs/pcs.md):
//
//   name {v1, v2, ...} [default]       categorical
//   name [lo, hi] [default]            real
//   name [lo, hi] [default]i           integer      (`l` suffix: log scale)
//   child | parent == value            condition
//   child | parent in {v1, v2}         condition
//   # comment

struct PcsParam {
  enum class Kind { Categorical, Real, Integer };
  std::string name;
  Kind kind = Kind::Categorical;
  std::vector<std::string> values;  // categorical
  double lo = 0;
  double hi = 0;
  bool log = false;
  std::string default_value;
};

struct PcsCondition {
  std::string child;
  std::string parent;
  std::vector<std::string> values;
};

struct PcsSpace {
  std::vector<PcsParam> params;
  std::vector<PcsCondition> conditions;

  const PcsParam* find(std::string_view name) const;
};

/// Choices become discriminant categoricals; a leaf with several disjuncts
/// gets a `<prefix>__@disjunct` selector and parameters whose domain differs
/// between disjuncts are split into `name@k` copies conditioned on it.
/// Open bounds are closed by shrinking 1e-9·(hi−lo). Throws
/// Error(BlowupExceeded) when the flat form exceeds `max_disjuncts`.
std::string emit_pcs(const SearchIR& ir, std::size_t max_disjuncts = 10000);

/// Throws SyntaxError.
PcsSpace parse_pcs(std::string_view text);

/// Samples active parameters only; values are PCS tokens.
std::vector<std::pair<std::string, std::string>> sample_pcs(const PcsSpace& space,
                                                            Rng& rng);

/// Converts a PCS sample to a point: `@k` suffixes are stripped, disjunct
/// selectors dropped, and tokens typed (bool, null, integer, real, string).
Point pcs_to_point(const PcsSpace& space,
                   const std::vector<std::pair<std::string, std::string>>& sample);

}  // namespace lalec
