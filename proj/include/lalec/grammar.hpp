#pragma once

#include <cstdint>

#include "lalec/dsl.hpp"

namespace lalec {

/// Substitutes rule bodies starting from the start symbol, expanding each
/// nonterminal at most `depth` times along any derivation path, then prunes
/// choice alternatives that still mention a nonterminal. Throws
/// Error(EmptyAfterPruning).
Operator unfold(const GrammarFile& g, const Registry& registry, int depth);
AstPtr unfold_ast(const GrammarFile& g, int depth);

/// Draws one derivation: each choice picks an alternative uniformly. Once
/// the nonterminal nesting reaches `max_depth`, only the alternatives
/// closest to termination stay eligible (nonterminal-free ones when any
/// exist). Throws Error(NoTerminatingAlternative).
Operator sample(const GrammarFile& g, const Registry& registry, std::uint64_t seed,
                int max_depth);
AstPtr sample_ast(const GrammarFile& g, std::uint64_t seed, int max_depth);

}  // namespace lalec
