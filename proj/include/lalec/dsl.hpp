#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lalec/operator.hpp"

namespace lalec {

// Surface syntax
//
//   expr    := choice
//   choice  := and ('|' and)*
//   and     := pipe ('&' pipe)*
//   pipe    := atom ('>>' atom)*
//   atom    := Name | Name '(' [arg (',' arg)*] ')' | '(' expr ')'
//   arg     := name '=' (literal | Name | Name '(' ... ')')
//   literal := number | true | false | null | "string" | 'string'
//
// `>>` binds tighter than `&`, which binds tighter than `|`; all three are
// left-associative. `#` starts a comment that runs to the end of the line.

struct ExprAst;
using AstPtr = std::shared_ptr<const ExprAst>;

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

struct CallArg;

struct ExprAst {
  enum class Kind { Ref, Call, Pipe, Both, Choose, Nonterminal };
  Kind kind = Kind::Ref;
  std::string name;            // Ref, Call, Nonterminal
  std::vector<CallArg> args;   // Call
  AstPtr left, right;          // Pipe, Both, Choose
  SourcePos pos;
};

/// A hyperparameter argument: a scalar literal or an operator expression
/// (for operator-valued hyperparameters).
struct CallArg {
  std::string name;
  std::variant<Value, AstPtr> value;
};

struct GrammarRule {
  std::string name;
  AstPtr body;
};

struct GrammarFile {
  std::vector<GrammarRule> rules;
  std::string start = "start";

  const GrammarRule* find(std::string_view name) const;
};

/// Parses one expression. Every name must resolve through the registry.
/// Throws SyntaxError, Error(UnknownOperator), Error(ValidationFailed).
AstPtr parse_expr_ast(std::string_view text, const Registry& registry);
Operator parse_expr(std::string_view text, const Registry& registry);

/// Parses `name := expr ;` rules. Lowercase-initial names that are not
/// registered operators are nonterminals. Throws SyntaxError,
/// Error(UndefinedNonterminal), Error(MissingStart).
GrammarFile parse_grammar(std::string_view text, const Registry& registry);

/// Builds the operator denoted by a nonterminal-free AST.
Operator build_operator(const ExprAst& ast, const Registry& registry);
bool contains_nonterminal(const ExprAst& ast);

/// Canonical text with minimal parentheses. Throws Error(NotExpressible)
/// for graphs that are not series-parallel compositions in step order.
std::string pretty_print(const Operator& op);

std::string ast_to_string(const ExprAst& ast);

}  // namespace lalec
