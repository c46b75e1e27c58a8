#include <cmath>
#include <cstdio>
#include <cstring>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <optional>
#include <algorithm>

#include "mwb/query.hpp"

namespace mwb {

std::string_view to_string(Op2 op) {
  switch (op) {
    case Op2::Coalesce: return "??";
    case Op2::Or: return "||";
    case Op2::And: return "&&";
    case Op2::Eq: return "==";
    case Op2::Ne: return "!=";
    case Op2::StrictEq: return "===";
    case Op2::StrictNe: return "!==";
    case Op2::Lt: return "<";
    case Op2::Le: return "<=";
    case Op2::Gt: return ">";
    case Op2::Ge: return ">=";
    case Op2::Add: return "+";
    case Op2::Sub: return "-";
    case Op2::Mul: return "*";
    case Op2::Div: return "/";
    case Op2::Mod: return "%";
  }
  return "?";
}

namespace {

enum class Tok : std::uint8_t { End, Int, Real, String, Template, Ident, Dollar, Punct };

struct Splice {
  std::string source;
  SourcePos pos;
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier, punctuation, string value
  std::int64_t integer = 0;
  double real = 0;
  SourcePos pos;
  bool newline_before = false;
  std::vector<std::string> parts;  // template text runs
  std::vector<Splice> splices;
};

[[noreturn]] void syntax(SourcePos pos, const std::string& msg, const std::string& near = {}) {
  throw Error(ErrorCode::Syntax, msg, pos, near);
}

class Lexer {
 public:
  Lexer(std::string_view src, SourcePos start, bool dialect) : src_(src), line_(start.line), col_(start.column), dialect_(dialect) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    bool newline = false;
    while (true) {
      newline |= skip_space();
      Token t = next();
      t.newline_before = newline;
      newline = false;
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }

  char bump() {
    char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  SourcePos here() const { return {line_, col_}; }

  bool skip_space() {
    bool newline = false;
    while (i_ < src_.size()) {
      char c = peek();
      if (c == '\n') {
        newline = true;
        bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else if (c == '/' && peek(1) == '/') {
        while (i_ < src_.size() && peek() != '\n') bump();
      } else if (c == '/' && peek(1) == '*') {
        SourcePos at = here();
        bump();
        bump();
        while (i_ < src_.size() && !(peek() == '*' && peek(1) == '/')) {
          if (peek() == '\n') newline = true;
          bump();
        }
        if (i_ >= src_.size()) syntax(at, "unterminated comment");
        bump();
        bump();
      } else {
        break;
      }
    }
    return newline;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  Token next() {
    Token t;
    t.pos = here();
    if (i_ >= src_.size()) return t;
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) return number(t);
    if (ident_start(c)) {
      while (ident_char(peek())) t.text += bump();
      t.kind = Tok::Ident;
      return t;
    }
    if (c == '$') {
      bump();
      if (!ident_start(peek())) syntax(t.pos, "expected a name after '$'");
      while (ident_char(peek())) t.text += bump();
      t.kind = Tok::Dollar;
      return t;
    }
    if (c == '\'' || c == '"') return string(t);
    if (c == '`') return templ(t);
    static const char* const kPuncts[] = {"===", "!==", "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "<>",
                                          "(",   ")",   "[",  "]",  "{",  "}",  ",",  ".",  "?",  ":",  ";",
                                          "+",   "-",   "*",  "/",  "%",  "<",  ">",  "!",  "="};
    for (const char* p : kPuncts) {
      std::size_t n = std::strlen(p);
      if (src_.substr(i_, n) == p) {
        if (std::string_view(p) == "<>" && !dialect_) continue;
        for (std::size_t k = 0; k < n; ++k) bump();
        t.kind = Tok::Punct;
        t.text = p;
        return t;
      }
    }
    syntax(t.pos, std::string("unexpected character '") + c + "'");
  }

  Token number(Token& t) {
    std::string digits;
    bool real = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) digits += bump();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      real = true;
      digits += bump();
      while (std::isdigit(static_cast<unsigned char>(peek()))) digits += bump();
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save_i = i_;
      int save_line = line_, save_col = col_;
      std::string exp;
      exp += bump();
      if (peek() == '+' || peek() == '-') exp += bump();
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        while (std::isdigit(static_cast<unsigned char>(peek()))) exp += bump();
        digits += exp;
        real = true;
      } else {
        i_ = save_i;
        line_ = save_line;
        col_ = save_col;
      }
    }
    if (ident_start(peek())) syntax(here(), "malformed number");
    if (real) {
      t.kind = Tok::Real;
      t.real = std::strtod(digits.c_str(), nullptr);
    } else {
      t.kind = Tok::Int;
      errno = 0;
      t.integer = std::strtoll(digits.c_str(), nullptr, 10);
      if (errno == ERANGE) syntax(t.pos, "integer literal out of range");
    }
    t.text = digits;
    return t;
  }

  char escape(SourcePos at) {
    if (i_ >= src_.size()) syntax(at, "unterminated string");
    char e = bump();
    switch (e) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '0': return '\0';
      default: return e;
    }
  }

  Token string(Token& t) {
    const char quote = bump();
    while (true) {
      if (i_ >= src_.size() || peek() == '\n') syntax(t.pos, "unterminated string");
      char c = bump();
      if (c == quote) break;
      t.text += c == '\\' ? escape(t.pos) : c;
    }
    t.kind = Tok::String;
    return t;
  }

  Token templ(Token& t) {
    bump();
    std::string run;
    while (true) {
      if (i_ >= src_.size()) syntax(t.pos, "unterminated template");
      char c = peek();
      if (c == '`') {
        bump();
        break;
      }
      if (c == '\\') {
        bump();
        run += escape(t.pos);
        continue;
      }
      if (c == '$' && peek(1) == '{') {
        bump();
        bump();
        t.parts.push_back(run);
        run.clear();
        SourcePos at = here();
        std::string inner;
        splice_body(inner, at);
        bump();
        t.splices.push_back({inner, at});
        continue;
      }
      run += bump();
    }
    t.parts.push_back(run);
    t.kind = Tok::Template;
    return t;
  }

  // Copies the source of a splice up to its closing brace, skipping over
  // strings and nested templates.
  void splice_body(std::string& inner, SourcePos at) {
    int depth = 0;
    while (true) {
      if (i_ >= src_.size()) syntax(at, "unterminated ${ in template");
      const char d = peek();
      if (d == '\'' || d == '"') {
        quoted(inner, at);
        continue;
      }
      if (d == '`') {
        nested_template(inner, at);
        continue;
      }
      if (d == '{') {
        ++depth;
      } else if (d == '}') {
        if (depth == 0) return;
        --depth;
      }
      inner += bump();
    }
  }

  void quoted(std::string& inner, SourcePos at) {
    const char q = bump();
    inner += q;
    while (true) {
      if (i_ >= src_.size()) syntax(at, "unterminated ${ in template");
      const char c = bump();
      inner += c;
      if (c == '\\' && i_ < src_.size()) {
        inner += bump();
      } else if (c == q) {
        return;
      }
    }
  }

  void nested_template(std::string& inner, SourcePos at) {
    inner += bump();
    while (true) {
      if (i_ >= src_.size()) syntax(at, "unterminated ${ in template");
      const char c = peek();
      if (c == '\\') {
        inner += bump();
        if (i_ < src_.size()) inner += bump();
      } else if (c == '`') {
        inner += bump();
        return;
      } else if (c == '$' && peek(1) == '{') {
        inner += bump();
        inner += bump();
        splice_body(inner, at);
        inner += bump();
      } else {
        inner += bump();
      }
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_;
  int col_;
  bool dialect_;
};

std::shared_ptr<Expr> node(ExprKind k, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->pos = pos;
  return e;
}

class Parser {
 public:
  Parser(std::string_view src, SourcePos start, bool dialect)
      : toks_(Lexer(src, start, dialect).run()), dialect_(dialect) {}

  ExprPtr whole_expression() {
    if (at_end()) syntax(cur().pos, "empty expression");
    ExprPtr e = expression();
    if (!at_end()) syntax(cur().pos, "unexpected '" + describe(cur()) + "'");
    return e;
  }

  Script whole_script() {
    Script s;
    while (!at_end()) {
      if (is_punct(";")) {
        ++k_;
        continue;
      }
      s.body.push_back(statement());
    }
    return s;
  }

  ExprPtr expression() { return conditional(); }

 private:
  const Token& cur() const { return toks_[k_]; }
  const Token& ahead(std::size_t n) const { return toks_[std::min(k_ + n, toks_.size() - 1)]; }
  bool at_end() const { return cur().kind == Tok::End; }
  bool is_punct(std::string_view p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool is_word(std::string_view w) const { return cur().kind == Tok::Ident && cur().text == w; }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of input";
      case Tok::String: return "'" + t.text + "'";
      case Tok::Template: return "template";
      case Tok::Dollar: return "$" + t.text;
      default: return t.text;
    }
  }

  void expect(std::string_view p) {
    if (!is_punct(p)) syntax(cur().pos, "expected '" + std::string(p) + "' but found " + describe(cur()));
    ++k_;
  }

  bool lambda_ahead() const {
    if (cur().kind == Tok::Ident && ahead(1).kind == Tok::Punct && ahead(1).text == "=>") return true;
    if (!is_punct("(")) return false;
    std::size_t n = 1;
    if (ahead(n).kind == Tok::Punct && ahead(n).text == ")") {
      return ahead(n + 1).kind == Tok::Punct && ahead(n + 1).text == "=>";
    }
    while (true) {
      if (ahead(n).kind != Tok::Ident) return false;
      ++n;
      if (ahead(n).kind == Tok::Punct && ahead(n).text == ",") {
        ++n;
        continue;
      }
      if (ahead(n).kind == Tok::Punct && ahead(n).text == ")") {
        return ahead(n + 1).kind == Tok::Punct && ahead(n + 1).text == "=>";
      }
      return false;
    }
  }

  ExprPtr conditional() {
    if (lambda_ahead()) return lambda();
    ExprPtr c = binary(0);
    if (!is_punct("?")) return c;
    auto e = node(ExprKind::Conditional, cur().pos);
    ++k_;
    ExprPtr a = conditional();
    expect(":");
    ExprPtr b = conditional();
    e->args = {c, a, b};
    return e;
  }

  ExprPtr lambda() {
    auto e = node(ExprKind::Lambda, cur().pos);
    if (cur().kind == Tok::Ident) {
      e->params.push_back(cur().text);
      ++k_;
    } else {
      expect("(");
      while (!is_punct(")")) {
        e->params.push_back(cur().text);
        ++k_;
        if (is_punct(",")) ++k_;
      }
      expect(")");
    }
    expect("=>");
    e->args.push_back(conditional());
    return e;
  }

  // Binary levels, loosest first.
  std::optional<Op2> binary_op(int level) const {
    const Token& t = cur();
    if (dialect_ && t.kind == Tok::Ident) {
      if (level == 1 && t.text == "or") return Op2::Or;
      if (level == 2 && t.text == "and") return Op2::And;
      return std::nullopt;
    }
    if (t.kind != Tok::Punct) return std::nullopt;
    const std::string& p = t.text;
    switch (level) {
      case 0:
        if (p == "??") return Op2::Coalesce;
        break;
      case 1:
        if (p == "||") return Op2::Or;
        break;
      case 2:
        if (p == "&&") return Op2::And;
        break;
      case 3:
        if (p == "==") return Op2::Eq;
        if (p == "!=") return Op2::Ne;
        if (p == "===") return Op2::StrictEq;
        if (p == "!==") return Op2::StrictNe;
        if (dialect_ && p == "=") return Op2::Eq;
        if (dialect_ && p == "<>") return Op2::Ne;
        break;
      case 4:
        if (p == "<") return Op2::Lt;
        if (p == "<=") return Op2::Le;
        if (p == ">") return Op2::Gt;
        if (p == ">=") return Op2::Ge;
        break;
      case 5:
        if (p == "+") return Op2::Add;
        if (p == "-") return Op2::Sub;
        break;
      case 6:
        if (p == "*") return Op2::Mul;
        if (p == "/") return Op2::Div;
        if (p == "%") return Op2::Mod;
        break;
      default:
        break;
    }
    return std::nullopt;
  }

  ExprPtr binary(int level) {
    if (level > 6) return unary();
    ExprPtr left = binary(level + 1);
    while (auto op = binary_op(level)) {
      auto e = node(ExprKind::Binary, cur().pos);
      ++k_;
      e->op2 = *op;
      e->args = {left, binary(level + 1)};
      left = e;
    }
    return left;
  }

  ExprPtr unary() {
    const bool neg = is_punct("-");
    const bool bang = is_punct("!") || (dialect_ && is_word("not"));
    if (neg || bang) {
      auto e = node(ExprKind::Unary, cur().pos);
      ++k_;
      e->op1 = neg ? Op1::Neg : Op1::Not;
      e->args.push_back(unary());
      return e;
    }
    return postfix(primary());
  }

  ExprPtr postfix(ExprPtr e) {
    while (true) {
      if (is_punct(".")) {
        SourcePos at = cur().pos;
        ++k_;
        if (cur().kind == Tok::Ident) {
          auto m = node(ExprKind::Member, at);
          m->name = cur().text;
          m->args.push_back(e);
          e = m;
        } else if (cur().kind == Tok::Dollar) {
          auto m = node(ExprKind::Dollar, at);
          m->name = cur().text;
          m->args.push_back(e);
          e = m;
        } else {
          syntax(cur().pos, "expected a member name after '.'");
        }
        ++k_;
      } else if (is_punct("[")) {
        auto m = node(ExprKind::Index, cur().pos);
        ++k_;
        m->args = {e, expression()};
        expect("]");
        e = m;
      } else if (is_punct("(")) {
        auto m = node(ExprKind::Call, cur().pos);
        ++k_;
        m->args.push_back(e);
        while (!is_punct(")")) {
          m->args.push_back(expression());
          if (!is_punct(")")) expect(",");
        }
        ++k_;
        e = m;
      } else {
        return e;
      }
    }
  }

  ExprPtr primary() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Int: {
        auto e = node(ExprKind::Int, t.pos);
        e->integer = t.integer;
        ++k_;
        return e;
      }
      case Tok::Real: {
        auto e = node(ExprKind::Real, t.pos);
        e->real = t.real;
        ++k_;
        return e;
      }
      case Tok::String: {
        auto e = node(ExprKind::String, t.pos);
        e->name = t.text;
        ++k_;
        return e;
      }
      case Tok::Template: {
        auto e = node(ExprKind::Template, t.pos);
        e->parts = t.parts;
        for (const Splice& s : t.splices) {
          Parser inner(s.source, s.pos, dialect_);
          e->args.push_back(inner.whole_expression());
        }
        ++k_;
        return e;
      }
      case Tok::Ident: {
        if (t.text == "true" || t.text == "false") {
          auto e = node(ExprKind::Bool, t.pos);
          e->boolean = t.text == "true";
          ++k_;
          return e;
        }
        if (t.text == "null" || t.text == "undefined") {
          ++k_;
          return node(ExprKind::Null, t.pos);
        }
        auto e = node(ExprKind::Ident, t.pos);
        e->name = dialect_ && t.text == "self" ? "data" : t.text;
        ++k_;
        return e;
      }
      case Tok::Punct:
        if (t.text == "(") {
          ++k_;
          ExprPtr e = expression();
          expect(")");
          return e;
        }
        if (t.text == "[") {
          auto e = node(ExprKind::List, t.pos);
          ++k_;
          while (!is_punct("]")) {
            e->args.push_back(expression());
            if (!is_punct("]")) expect(",");
          }
          ++k_;
          return e;
        }
        break;
      default:
        break;
    }
    syntax(t.pos, "unexpected " + describe(t));
  }

  // --- scripts ---

  std::vector<StmtPtr> block() {
    std::vector<StmtPtr> out;
    if (is_punct("{")) {
      ++k_;
      while (!is_punct("}")) {
        if (at_end()) syntax(cur().pos, "missing '}'");
        if (is_punct(";")) {
          ++k_;
          continue;
        }
        out.push_back(statement());
      }
      ++k_;
    } else {
      out.push_back(statement());
    }
    return out;
  }

  void end_statement() {
    if (is_punct(";")) {
      ++k_;
      return;
    }
    if (at_end() || is_punct("}") || cur().newline_before) return;
    syntax(cur().pos, "expected end of statement before " + describe(cur()));
  }

  StmtPtr statement() {
    auto s = std::make_shared<Stmt>();
    s->pos = cur().pos;
    if (is_word("let") || is_word("const") || is_word("var")) {
      ++k_;
      if (cur().kind != Tok::Ident) syntax(cur().pos, "expected a variable name");
      s->kind = StmtKind::Let;
      s->name = cur().text;
      ++k_;
      if (is_punct("=")) {
        ++k_;
        s->value = expression();
      } else {
        s->value = node(ExprKind::Null, s->pos);
      }
      end_statement();
      return s;
    }
    if (is_word("if")) {
      ++k_;
      s->kind = StmtKind::If;
      expect("(");
      s->value = expression();
      expect(")");
      s->then_branch = block();
      if (is_word("else")) {
        ++k_;
        s->else_branch = block();
      }
      return s;
    }
    ExprPtr e = expression();
    if (is_punct("=")) {
      ++k_;
      s->kind = StmtKind::Assign;
      if (e->kind == ExprKind::Ident) {
        s->name = e->name;
      } else if (e->kind == ExprKind::Member) {
        s->target = e;
      } else {
        syntax(s->pos, "cannot assign to this expression");
      }
      s->value = expression();
    } else {
      s->kind = StmtKind::Expr;
      s->value = e;
    }
    end_statement();
    return s;
  }

  std::vector<Token> toks_;
  std::size_t k_ = 0;
  bool dialect_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

ExprPtr parse_expression(std::string_view source) { return Parser(source, {1, 1}, false).whole_expression(); }

Predicate parse_predicate(std::string_view source) {
  std::string_view s = trim(source);
  if (s.substr(0, 8) != "context " && s.substr(0, 8) != "context\t") return {parse_expression(source), {}};
  // context <Class> inv[ name]: body
  std::size_t colon = s.find(':');
  std::size_t inv = s.find(" inv");
  if (colon == std::string_view::npos || inv == std::string_view::npos || inv > colon) {
    throw Error(ErrorCode::Syntax, "constraint must read 'context <Class> inv: <expression>'", SourcePos{1, 1});
  }
  std::string cls(trim(s.substr(8, inv - 8)));
  if (cls.empty()) throw Error(ErrorCode::Syntax, "missing context class", SourcePos{1, 9});
  std::size_t body_at = static_cast<std::size_t>(s.data() - source.data()) + colon + 1;
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < body_at; ++i) {
    if (source[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  Predicate p;
  p.expr = Parser(source.substr(body_at), {line, col}, true).whole_expression();
  p.context_class = cls;
  return p;
}

Script parse_script(std::string_view source) { return Parser(source, {1, 1}, false).whole_script(); }

// --- printing ---

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Lambda:
    case ExprKind::Conditional: return 1;
    case ExprKind::Binary:
      switch (e.op2) {
        case Op2::Coalesce: return 2;
        case Op2::Or: return 3;
        case Op2::And: return 4;
        case Op2::Eq:
        case Op2::Ne:
        case Op2::StrictEq:
        case Op2::StrictNe: return 5;
        case Op2::Lt:
        case Op2::Le:
        case Op2::Gt:
        case Op2::Ge: return 6;
        case Op2::Add:
        case Op2::Sub: return 7;
        default: return 8;
      }
    case ExprKind::Unary: return 9;
    case ExprKind::Member:
    case ExprKind::Dollar:
    case ExprKind::Index:
    case ExprKind::Call: return 10;
    case ExprKind::Int:
    case ExprKind::Real:
      return 11;
    default: return 11;
  }
}

std::string quote(const std::string& s, char q) {
  std::string out(1, q);
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\0': out += "\\0"; break;
      case '\\': out += "\\\\"; break;
      default:
        if (c == q) out += '\\';
        out += c;
    }
  }
  out += q;
  return out;
}

std::string print_at(const Expr& e, int min_prec);

std::string print_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string print_raw(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Null: return "null";
    case ExprKind::Bool: return e.boolean ? "true" : "false";
    case ExprKind::Int: return e.integer < 0 ? "(" + std::to_string(e.integer) + ")" : std::to_string(e.integer);
    case ExprKind::Real: return e.real < 0 ? "(" + print_real(e.real) + ")" : print_real(e.real);
    case ExprKind::String: return quote(e.name, '\'');
    case ExprKind::Template: {
      std::string out = "`";
      for (std::size_t i = 0; i < e.parts.size(); ++i) {
        for (std::size_t k = 0; k < e.parts[i].size(); ++k) {
          char c = e.parts[i][k];
          if (c == '`' || c == '\\' || (c == '$' && k + 1 < e.parts[i].size() && e.parts[i][k + 1] == '{')) {
            out += '\\';
          }
          if (c == '$' && k + 1 == e.parts[i].size() && i < e.args.size()) out += '\\';
          out += c;
        }
        if (i < e.args.size()) out += "${" + print_at(*e.args[i], 0) + "}";
      }
      return out + "`";
    }
    case ExprKind::List: {
      std::string out = "[";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += print_at(*e.args[i], 1);
      }
      return out + "]";
    }
    case ExprKind::Ident: return e.name;
    case ExprKind::Member: return print_at(*e.args[0], 10) + "." + e.name;
    case ExprKind::Dollar: return print_at(*e.args[0], 10) + ".$" + e.name;
    case ExprKind::Index: return print_at(*e.args[0], 10) + "[" + print_at(*e.args[1], 0) + "]";
    case ExprKind::Call: {
      std::string out = print_at(*e.args[0], 10) + "(";
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        if (i > 1) out += ", ";
        out += print_at(*e.args[i], 1);
      }
      return out + ")";
    }
    case ExprKind::Lambda: {
      std::string head;
      if (e.params.size() == 1) {
        head = e.params[0];
      } else {
        head = "(";
        for (std::size_t i = 0; i < e.params.size(); ++i) head += (i ? ", " : "") + e.params[i];
        head += ")";
      }
      return head + " => " + print_at(*e.args[0], 1);
    }
    case ExprKind::Unary: return std::string(e.op1 == Op1::Neg ? "-" : "!") + print_at(*e.args[0], 9);
    case ExprKind::Binary: {
      const int p = precedence(e);
      return print_at(*e.args[0], p) + " " + std::string(to_string(e.op2)) + " " + print_at(*e.args[1], p + 1);
    }
    case ExprKind::Conditional:
      return print_at(*e.args[0], 2) + " ? " + print_at(*e.args[1], 1) + " : " + print_at(*e.args[2], 1);
  }
  return "?";
}

std::string print_at(const Expr& e, int min_prec) {
  std::string s = print_raw(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

}  // namespace

std::string print(const Expr& e) { return print_at(e, 0); }

bool same_tree(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::Bool:
      if (a.boolean != b.boolean) return false;
      break;
    case ExprKind::Int:
      if (a.integer != b.integer) return false;
      break;
    case ExprKind::Real:
      if (!(a.real == b.real || (std::isnan(a.real) && std::isnan(b.real)))) return false;
      break;
    case ExprKind::String:
    case ExprKind::Ident:
    case ExprKind::Member:
    case ExprKind::Dollar:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Template:
      if (a.parts != b.parts) return false;
      break;
    case ExprKind::Lambda:
      if (a.params != b.params) return false;
      break;
    case ExprKind::Unary:
      if (a.op1 != b.op1) return false;
      break;
    case ExprKind::Binary:
      if (a.op2 != b.op2) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_tree(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

}  // namespace mwb

namespace mwb {

ExprPtr parse_template_text(std::string_view text) {
  std::string src = "`";
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (depth == 0) {
      if (c == '$' && i + 1 < text.size() && text[i + 1] == '{') {
        src += "${";
        ++i;
        depth = 1;
        continue;
      }
      if (c == '`' || c == '\\') src += '\\';
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
    }
    src += c;
  }
  src += '`';
  return parse_expression(src);
}

}  // namespace mwb
