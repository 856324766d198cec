#include "lalec/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <set>

#include "lalec/error.hpp"

namespace lalec {

namespace {

enum class Tok {
  Ident,
  Number,
  String,
  Pipe,    // >>
  And,     // &
  Or,      // |
  LParen,
  RParen,
  Assign,  // =
  Comma,
  Define,  // :=
  Semi,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Value literal;
  SourcePos pos;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "name";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::Pipe: return "'>>'";
    case Tok::And: return "'&'";
    case Tok::Or: return "'|'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Assign: return "'='";
    case Tok::Comma: return "','";
    case Tok::Define: return "':='";
    case Tok::Semi: return "';'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = pos_;
      if (at_end()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = peek();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = i_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                             peek() == '_')) {
          advance();
        }
        t.kind = Tok::Ident;
        t.text = std::string(text_.substr(start, i_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+' || c == '.') && i_ + 1 < text_.size() &&
                  (std::isdigit(static_cast<unsigned char>(text_[i_ + 1])) ||
                   text_[i_ + 1] == '.'))) {
        t = number(t.pos);
      } else if (c == '"' || c == '\'') {
        t = string_literal(t.pos);
      } else if (c == '>' && next_is('>')) {
        advance();
        advance();
        t.kind = Tok::Pipe;
      } else if (c == ':' && next_is('=')) {
        advance();
        advance();
        t.kind = Tok::Define;
      } else {
        advance();
        switch (c) {
          case '&': t.kind = Tok::And; break;
          case '|': t.kind = Tok::Or; break;
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '=': t.kind = Tok::Assign; break;
          case ',': t.kind = Tok::Comma; break;
          case ';': t.kind = Tok::Semi; break;
          default:
            throw SyntaxError(t.pos.line, t.pos.column,
                              std::string("unexpected character '") + c + "'");
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }
  bool next_is(char c) const { return i_ + 1 < text_.size() && text_[i_ + 1] == c; }

  void advance() {
    if (text_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token number(SourcePos pos) {
    std::size_t start = i_;
    if (peek() == '-' || peek() == '+') advance();
    bool is_float = false;
    while (!at_end()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        advance();
        if ((c == 'e' || c == 'E') && !at_end() && (peek() == '-' || peek() == '+')) {
          advance();
        }
      } else {
        break;
      }
    }
    std::string s(text_.substr(start, i_ - start));
    Token t;
    t.kind = Tok::Number;
    t.text = s;
    t.pos = pos;
    std::string digits = s[0] == '+' ? s.substr(1) : s;
    if (!is_float) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec == std::errc() && p == digits.data() + digits.size()) {
        t.literal = Value(v);
        return t;
      }
    }
    double d = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (ec != std::errc() || p != digits.data() + digits.size()) {
      throw SyntaxError(pos.line, pos.column, "malformed number '" + s + "'");
    }
    t.literal = Value(d);
    return t;
  }

  Token string_literal(SourcePos pos) {
    char quote = peek();
    advance();
    std::string s;
    while (!at_end() && peek() != quote) {
      if (peek() == '\n') break;
      if (peek() == '\\' && i_ + 1 < text_.size()) {
        advance();
        char e = peek();
        s += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        s += peek();
      }
      advance();
    }
    if (at_end() || peek() != quote) {
      throw SyntaxError(pos.line, pos.column, "unterminated string");
    }
    advance();
    Token t;
    t.kind = Tok::String;
    t.text = s;
    t.literal = Value(s);
    t.pos = pos;
    return t;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

bool lowercase_initial(const std::string& name) {
  return !name.empty() && std::islower(static_cast<unsigned char>(name[0]));
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const Registry& registry, bool grammar_mode)
      : toks_(std::move(toks)), registry_(registry), grammar_(grammar_mode) {}

  AstPtr expression_only() {
    auto e = expr();
    expect(Tok::End, "after expression");
    return e;
  }

  GrammarFile grammar() {
    GrammarFile g;
    std::set<std::string> seen;
    while (cur().kind != Tok::End) {
      const Token& name = cur();
      if (name.kind != Tok::Ident) {
        fail(name, std::string("expected rule name, found ") + describe(name));
      }
      if (!seen.insert(name.text).second) {
        fail(name, "duplicate rule '" + name.text + "'");
      }
      if (registry_.contains(name.text)) {
        fail(name, "rule name '" + name.text + "' collides with a registered operator");
      }
      ++i_;
      expect(Tok::Define, "after rule name");
      auto body = expr();
      expect(Tok::Semi, "at end of rule");
      g.rules.push_back({name.text, body});
    }
    return g;
  }

 private:
  const Token& cur() const { return toks_[i_]; }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::Ident || t.kind == Tok::Number) return "'" + t.text + "'";
    return tok_name(t.kind);
  }

  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw SyntaxError(t.pos.line, t.pos.column, msg);
  }

  void expect(Tok kind, const char* where) {
    if (cur().kind != kind) {
      fail(cur(), std::string("expected ") + tok_name(kind) + " " + where +
                      ", found " + describe(cur()));
    }
    ++i_;
  }

  static AstPtr binary(ExprAst::Kind k, AstPtr l, AstPtr r, SourcePos pos) {
    auto n = std::make_shared<ExprAst>();
    n->kind = k;
    n->left = std::move(l);
    n->right = std::move(r);
    n->pos = pos;
    return n;
  }

  AstPtr expr() {
    auto l = and_expr();
    while (cur().kind == Tok::Or) {
      auto pos = cur().pos;
      ++i_;
      l = binary(ExprAst::Kind::Choose, l, and_expr(), pos);
    }
    return l;
  }

  AstPtr and_expr() {
    auto l = pipe_expr();
    while (cur().kind == Tok::And) {
      auto pos = cur().pos;
      ++i_;
      l = binary(ExprAst::Kind::Both, l, pipe_expr(), pos);
    }
    return l;
  }

  AstPtr pipe_expr() {
    auto l = atom();
    while (cur().kind == Tok::Pipe) {
      auto pos = cur().pos;
      ++i_;
      l = binary(ExprAst::Kind::Pipe, l, atom(), pos);
    }
    return l;
  }

  AstPtr atom() {
    const Token& t = cur();
    if (t.kind == Tok::LParen) {
      ++i_;
      auto e = expr();
      expect(Tok::RParen, "to close '('");
      return e;
    }
    if (t.kind != Tok::Ident) {
      fail(t, std::string("expected operator, found ") + describe(t));
    }
    ++i_;
    auto n = std::make_shared<ExprAst>();
    n->name = t.text;
    n->pos = t.pos;
    bool known = registry_.contains(t.text);
    if (!known) {
      if (grammar_ && lowercase_initial(t.text)) {
        if (cur().kind == Tok::LParen) {
          fail(cur(), "nonterminal '" + t.text + "' cannot take arguments");
        }
        n->kind = ExprAst::Kind::Nonterminal;
        return n;
      }
      throw Error(ErrorCode::UnknownOperator,
                  std::to_string(t.pos.line) + ":" + std::to_string(t.pos.column) +
                      ": unknown operator '" + t.text + "'");
    }
    if (cur().kind != Tok::LParen) {
      n->kind = ExprAst::Kind::Ref;
      return n;
    }
    ++i_;
    n->kind = ExprAst::Kind::Call;
    std::set<std::string> names;
    if (cur().kind != Tok::RParen) {
      for (;;) {
        const Token& key = cur();
        if (key.kind != Tok::Ident) {
          fail(key, std::string("expected hyperparameter name, found ") + describe(key));
        }
        if (!names.insert(key.text).second) {
          fail(key, "duplicate hyperparameter '" + key.text + "'");
        }
        ++i_;
        expect(Tok::Assign, "after hyperparameter name");
        n->args.push_back({key.text, argument()});
        if (cur().kind == Tok::Comma) {
          ++i_;
          continue;
        }
        break;
      }
    }
    expect(Tok::RParen, "to close argument list");
    return n;
  }

  std::variant<Value, AstPtr> argument() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Number:
      case Tok::String:
        ++i_;
        return t.literal;
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") {
          ++i_;
          return Value(t.text == "true");
        }
        if (t.text == "null" || t.text == "None") {
          ++i_;
          return Value();
        }
        return atom();
      case Tok::LParen:
        return atom();
      default:
        fail(t, std::string("expected a value, found ") + describe(t));
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const Registry& registry_;
  bool grammar_;
};

void collect_nonterminals(const ExprAst& a, std::vector<const ExprAst*>& out) {
  switch (a.kind) {
    case ExprAst::Kind::Nonterminal: out.push_back(&a); break;
    case ExprAst::Kind::Call:
      for (const auto& arg : a.args) {
        if (auto* p = std::get_if<AstPtr>(&arg.value)) collect_nonterminals(**p, out);
      }
      break;
    case ExprAst::Kind::Pipe:
    case ExprAst::Kind::Both:
    case ExprAst::Kind::Choose:
      collect_nonterminals(*a.left, out);
      collect_nonterminals(*a.right, out);
      break;
    default: break;
  }
}

void collect_choice(const ExprAst& a, std::vector<const ExprAst*>& out) {
  if (a.kind == ExprAst::Kind::Choose) {
    collect_choice(*a.left, out);
    collect_choice(*a.right, out);
  } else {
    out.push_back(&a);
  }
}

}  // namespace

const GrammarRule* GrammarFile::find(std::string_view name) const {
  for (const auto& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

AstPtr parse_expr_ast(std::string_view text, const Registry& registry) {
  Parser p(Lexer(text).run(), registry, false);
  return p.expression_only();
}

Operator parse_expr(std::string_view text, const Registry& registry) {
  return build_operator(*parse_expr_ast(text, registry), registry);
}

GrammarFile parse_grammar(std::string_view text, const Registry& registry) {
  Parser p(Lexer(text).run(), registry, true);
  GrammarFile g = p.grammar();
  if (!g.find(g.start)) {
    throw Error(ErrorCode::MissingStart, "grammar has no '" + g.start + "' rule");
  }
  for (const auto& r : g.rules) {
    std::vector<const ExprAst*> refs;
    collect_nonterminals(*r.body, refs);
    for (const auto* n : refs) {
      if (!g.find(n->name)) {
        throw Error(ErrorCode::UndefinedNonterminal,
                    std::to_string(n->pos.line) + ":" + std::to_string(n->pos.column) +
                        ": undefined nonterminal '" + n->name + "'");
      }
    }
  }
  return g;
}

bool contains_nonterminal(const ExprAst& ast) {
  std::vector<const ExprAst*> refs;
  collect_nonterminals(ast, refs);
  return !refs.empty();
}

Operator build_operator(const ExprAst& ast, const Registry& registry) {
  switch (ast.kind) {
    case ExprAst::Kind::Ref: return registry.at(ast.name);
    case ExprAst::Kind::Call: {
      Config cfg;
      for (const auto& arg : ast.args) {
        if (const auto* v = std::get_if<Value>(&arg.value)) {
          cfg.emplace(arg.name, *v);
        } else {
          cfg.emplace(arg.name,
                      Value(share(build_operator(*std::get<AstPtr>(arg.value), registry))));
        }
      }
      return configure(registry.at(ast.name), cfg);
    }
    case ExprAst::Kind::Pipe:
      return pipe(build_operator(*ast.left, registry),
                  build_operator(*ast.right, registry));
    case ExprAst::Kind::Both:
      return both(build_operator(*ast.left, registry),
                  build_operator(*ast.right, registry));
    case ExprAst::Kind::Choose: {
      std::vector<const ExprAst*> alts;
      collect_choice(ast, alts);
      std::vector<Operator> ops;
      for (const auto* a : alts) ops.push_back(build_operator(*a, registry));
      return choose(std::move(ops));
    }
    case ExprAst::Kind::Nonterminal:
      throw Error(ErrorCode::UndefinedNonterminal,
                  "unresolved nonterminal '" + ast.name + "'");
  }
  throw Error(ErrorCode::InvalidArgument, "bad expression");
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels: 0 atom, 1 pipe, 2 and, 3 choice.
struct Printed {
  std::string text;
  int level;
};

std::string wrap(const Printed& p, int max_level) {
  return p.level > max_level ? "(" + p.text + ")" : p.text;
}

Printed print_op(const Operator& op);

Printed print_individual(const Operator::Individual& ind) {
  if (!ind.captured) return {ind.name, 0};
  std::string s = ind.name + "(";
  bool first = true;
  for (const auto& [k, v] : ind.bound) {
    if (!first) s += ", ";
    first = false;
    s += k + "=";
    if (v.is_operator() && v.as_operator()) {
      s += wrap(print_op(*v.as_operator()), 0);
    } else {
      s += v.to_literal();
    }
  }
  return {s + ")", 0};
}

Printed print_graph(const Operator::Pipeline& p, const std::vector<std::size_t>& ids) {
  if (ids.size() == 1) return print_op(*p.steps[ids.front()]);
  auto in = [&](std::size_t v, std::size_t lo, std::size_t hi) {
    auto it = std::lower_bound(ids.begin(), ids.end(), v);
    if (it == ids.end() || *it != v) return false;
    auto k = static_cast<std::size_t>(it - ids.begin());
    return k >= lo && k < hi;
  };
  std::size_t n = ids.size();
  // Parallel split: no edges between the prefix and the rest.
  for (std::size_t k = 1; k < n; ++k) {
    bool crossing = false;
    for (const auto& e : p.edges) {
      if ((in(e.from, 0, k) && in(e.to, k, n)) || (in(e.from, k, n) && in(e.to, 0, k))) {
        crossing = true;
        break;
      }
    }
    if (!crossing) {
      std::vector<std::size_t> l(ids.begin(), ids.begin() + k);
      std::vector<std::size_t> r(ids.begin() + k, ids.end());
      return {wrap(print_graph(p, l), 2) + " & " + wrap(print_graph(p, r), 2), 2};
    }
  }
  // Series split: edges across the cut are exactly sinks(prefix) x sources(rest).
  for (std::size_t k = 1; k < n; ++k) {
    std::set<std::size_t> left_sinks, right_sources;
    for (std::size_t i = 0; i < k; ++i) left_sinks.insert(ids[i]);
    for (std::size_t i = k; i < n; ++i) right_sources.insert(ids[i]);
    std::set<Edge> cross;
    bool backward = false;
    for (const auto& e : p.edges) {
      if (in(e.from, 0, k) && in(e.to, 0, k)) left_sinks.erase(e.from);
      if (in(e.from, k, n) && in(e.to, k, n)) right_sources.erase(e.to);
      if (in(e.from, 0, k) && in(e.to, k, n)) cross.insert(e);
      if (in(e.from, k, n) && in(e.to, 0, k)) backward = true;
    }
    if (backward || cross.empty()) continue;
    std::set<Edge> expected;
    for (auto s : left_sinks) {
      for (auto t : right_sources) expected.insert({s, t});
    }
    if (cross != expected) continue;
    std::vector<std::size_t> l(ids.begin(), ids.begin() + k);
    std::vector<std::size_t> r(ids.begin() + k, ids.end());
    return {wrap(print_graph(p, l), 1) + " >> " + wrap(print_graph(p, r), 1), 1};
  }
  throw Error(ErrorCode::NotExpressible,
              "pipeline is not a series-parallel composition in step order");
}

Printed print_op(const Operator& op) {
  switch (op.kind()) {
    case Operator::Kind::Individual: return print_individual(op.as_individual());
    case Operator::Kind::Pipeline: {
      const auto& p = op.as_pipeline();
      std::vector<std::size_t> ids(p.steps.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
      return print_graph(p, ids);
    }
    case Operator::Kind::Choice: {
      std::string s;
      for (const auto& a : op.as_choice().alternatives) {
        if (!s.empty()) s += " | ";
        s += wrap(print_op(*a), 2);
      }
      return {s, 3};
    }
  }
  return {"", 0};
}

Printed print_ast(const ExprAst& a) {
  switch (a.kind) {
    case ExprAst::Kind::Ref:
    case ExprAst::Kind::Nonterminal: return {a.name, 0};
    case ExprAst::Kind::Call: {
      std::string s = a.name + "(";
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ", ";
        s += a.args[i].name + "=";
        if (const auto* v = std::get_if<Value>(&a.args[i].value)) {
          s += v->to_literal();
        } else {
          s += wrap(print_ast(*std::get<AstPtr>(a.args[i].value)), 0);
        }
      }
      return {s + ")", 0};
    }
    case ExprAst::Kind::Pipe:
      return {wrap(print_ast(*a.left), 1) + " >> " + wrap(print_ast(*a.right), 0), 1};
    case ExprAst::Kind::Both:
      return {wrap(print_ast(*a.left), 2) + " & " + wrap(print_ast(*a.right), 1), 2};
    case ExprAst::Kind::Choose:
      return {wrap(print_ast(*a.left), 3) + " | " + wrap(print_ast(*a.right), 2), 3};
  }
  return {"", 0};
}

}  // namespace

std::string pretty_print(const Operator& op) { return print_op(op).text; }

std::string ast_to_string(const ExprAst& ast) { return print_ast(ast).text; }

}  // namespace lalec
