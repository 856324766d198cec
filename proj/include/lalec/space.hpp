#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "lalec/normalize.hpp"
#include "lalec/operator.hpp"
#include "lalec/rng.hpp"

namespace lalec {

// Compiled search spaces.
//
// Every node carries the mangling prefix of its path. A leaf's hyperparameter
// `p` is addressed as `<prefix>__p`; a choice's discriminant is
// `<prefix>__D` and takes operator names as values. Step tokens are
// lowercased operator names ("choice" / "pipeline" for composite steps);
// siblings that would collide are numbered `_1`, `_2`, ...

struct SearchIR;
using IRPtr = std::shared_ptr<const SearchIR>;

struct StepMapIR {
  struct Step {
    std::string token;
    IRPtr body;
  };
  std::vector<Step> steps;
  std::vector<Edge> edges;
  /// The compiled root was a single operator, not a pipeline.
  bool wrapped = false;
};

struct ChoiceIR {
  struct Branch {
    std::string value;  // discriminant value
    std::string token;  // path token
    IRPtr body;
  };
  std::string discriminant;
  std::vector<Branch> branches;
};

struct LeafIR {
  NormalForm nf;  // frozen leaves hold one empty disjunct
  OperatorRef op;
  bool frozen = false;
};

struct SearchIR {
  std::variant<StepMapIR, ChoiceIR, LeafIR> node;
  std::string prefix;
};

struct CompileOptions {
  bool keep_constraints = true;
  std::size_t max_disjuncts = 10000;
};

std::string mangle(const std::string& prefix, const std::string& name);

/// Builds the nested IR of a planned or trainable operator. Errors from the
/// normalizer are rethrown with the failing step path prepended.
IRPtr combine(const Operator& op, CompileOptions options = {});

/// A point: mangled name → value. Discriminants hold operator names.
using Point = Config;

/// Rebuilds the configured operator a point denotes. Throws
/// Error(UnknownMarker) for names that are not part of the space and
/// Error(ValidationFailed) if a step rejects its values.
Operator decode(const SearchIR& ir, const Point& point);

/// Number of searchable dimensions reachable in the IR (0 for a fully
/// frozen pipeline).
std::size_t dimension_count(const SearchIR& ir);

// Flat backend --------------------------------------------------------------

using FlatDisjunct = std::vector<Param>;

/// Cross product over sibling steps, concatenation over choice branches.
/// Throws Error(BlowupExceeded).
std::vector<FlatDisjunct> emit_flat(const SearchIR& ir,
                                    std::size_t max_disjuncts = 10000);
bool flat_member(const std::vector<FlatDisjunct>& flat, const Point& point);
Json flat_to_json(const std::vector<FlatDisjunct>& flat);

// Hierarchical backend ------------------------------------------------------

Json emit_hierarchical(const SearchIR& ir);
/// Membership evaluated on the document alone.
bool hierarchical_member(const Json& doc, const Point& point);

Json domain_to_json(const Domain& d);
std::string space_digest(const SearchIR& ir);

// Sampling ------------------------------------------------------------------

/// Branches uniform, disjuncts uniform within a leaf, values by prior.
Point sample_point(const SearchIR& ir, Rng& rng);
/// Same, with the first top-level choice forced to branch `branch`.
Point sample_point_in_branch(const SearchIR& ir, std::size_t branch, Rng& rng);
/// Default point: first branch, first disjunct, domain defaults.
Point default_point(const SearchIR& ir);
/// The first choice directly under the root step map, if any.
const ChoiceIR* top_level_choice(const SearchIR& ir);

Value sample_domain(const ContDomain& d, Rng& rng);

// Discretized grid ----------------------------------------------------------

struct GridDisjunct {
  std::vector<std::pair<std::string, std::vector<Value>>> params;

  std::size_t cells() const;
};

struct Grid {
  std::vector<GridDisjunct> disjuncts;

  std::size_t cells() const;
  /// Cells in deterministic order: disjunct by disjunct, last parameter
  /// varying fastest.
  std::vector<Point> points() const;
};

/// Each continuous domain becomes {default} ∪ {cont_samples seeded draws};
/// identical (name, domain) pairs get identical draws.
Grid emit_grid(const SearchIR& ir, std::size_t cont_samples = 1,
               std::uint64_t seed = 0, std::size_t max_disjuncts = 10000);
Json grid_to_json(const Grid& g);

}  // namespace lalec
