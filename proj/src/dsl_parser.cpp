#include "masched/dsl.hpp"
#include "masched/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace masched::dsl {

std::string_view to_string(Type t) {
  switch (t) {
    case Type::Bool: return "bool";
    case Type::Int: return "int";
    case Type::Real: return "real";
  }
  return "?";
}

Expr Expr::make_number(double v, bool integral, SourcePos pos) {
  Expr e;
  e.kind = Kind::Number;
  e.number = v;
  e.integral = integral;
  e.pos = pos;
  return e;
}

Expr Expr::make_bool(bool v, SourcePos pos) {
  Expr e;
  e.kind = Kind::Boolean;
  e.boolean = v;
  e.pos = pos;
  return e;
}

Expr Expr::make_name(std::string n, SourcePos pos) {
  Expr e;
  e.kind = Kind::Name;
  e.name = std::move(n);
  e.pos = pos;
  return e;
}

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  bool integral = true;
  SourcePos pos;
};

[[noreturn]] void fail(SourcePos pos, std::string message) {
  throw ParseError({Diagnostic{pos.line, pos.column, std::move(message)}});
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char* const puncts[] = {"..", "->", "<=", ">=", "==", "!=", "&&", "||", "[", "]", "(", ")", "{",
                                       "}",  ";",  ":",  ",",  "'",  "+",  "-",  "*",  "/", "%", "<", ">", "!",
                                       "&",  "?",  "="};
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const SourcePos start{line, col};
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) fail(start, "unterminated comment");
      advance(2);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool integral = true;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        integral = false;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          integral = false;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      t.integral = integral;
      t.number = std::strtod(t.text.c_str(), nullptr);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    bool matched = false;
    for (const char* p : puncts) {
      const std::string_view ps(p);
      if (src.substr(i, ps.size()) == ps) {
        t.kind = Tok::Punct;
        t.text = std::string(ps);
        advance(ps.size());
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched) fail(t.pos, std::string("unexpected character '") + c + "'");
  }
  Token end;
  end.kind = Tok::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  NetworkModel model() {
    NetworkModel m;
    while (peek().kind != Tok::End) {
      if (is_ident("const")) {
        m.constants.push_back(constant());
      } else if (is_ident("reward")) {
        m.rewards.push_back(reward());
      } else if (is_ident("process")) {
        m.processes.push_back(process());
      } else if (is_ident("property")) {
        if (m.property) fail(peek().pos, "only one property may be declared");
        m.property = property();
      } else {
        fail(peek().pos, "expected 'const', 'reward', 'process' or 'property', found '" + describe(peek()) + "'");
      }
    }
    return m;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : t.text; }

  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == Tok::Punct && t.text == p;
  }
  bool is_ident(std::string_view w, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == Tok::Ident && t.text == w;
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail(peek().pos, "expected '" + std::string(p) + "', found '" + describe(peek()) + "'");
    next();
  }
  void expect_ident(std::string_view w) {
    if (!is_ident(w)) fail(peek().pos, "expected '" + std::string(w) + "', found '" + describe(peek()) + "'");
    next();
  }
  std::string identifier(std::string_view what) {
    if (peek().kind != Tok::Ident) fail(peek().pos, "expected " + std::string(what) + ", found '" + describe(peek()) + "'");
    return next().text;
  }

  Type type_name() {
    const auto& t = peek();
    if (is_ident("int")) return next(), Type::Int;
    if (is_ident("real")) return next(), Type::Real;
    if (is_ident("bool")) return next(), Type::Bool;
    fail(t.pos, "expected a type ('int', 'real' or 'bool'), found '" + describe(t) + "'");
  }

  ConstDecl constant() {
    ConstDecl c;
    c.pos = next().pos;
    c.type = type_name();
    c.name = identifier("constant name");
    expect_punct("=");
    c.value = expr();
    expect_punct(";");
    return c;
  }

  RewardDecl reward() {
    RewardDecl r;
    r.pos = next().pos;
    r.name = identifier("reward name");
    if (is_punct("=")) {
      next();
      r.rate = expr();
    }
    expect_punct(";");
    return r;
  }

  PropertyDecl property() {
    PropertyDecl p;
    p.pos = next().pos;
    const Token& dir = peek();
    if (is_ident("Xmax")) {
      p.direction = Direction::Max;
    } else if (is_ident("Xmin")) {
      p.direction = Direction::Min;
    } else {
      fail(dir.pos, "expected 'Xmax' or 'Xmin'");
    }
    next();
    expect_punct("[");
    expect_ident("T");
    expect_punct("==");
    p.bound = expr();
    expect_punct("]");
    expect_punct("(");
    expect_ident("S");
    expect_punct("(");
    p.reward = identifier("reward name");
    expect_punct(")");
    expect_punct(")");
    expect_punct(";");
    return p;
  }

  Process process() {
    Process p;
    p.pos = next().pos;
    p.name = identifier("process name");
    expect_punct("{");
    while (!is_punct("}")) {
      if (peek().kind == Tok::End) fail(peek().pos, "unterminated process '" + p.name + "'");
      if (is_punct("[") || is_ident("rate")) {
        p.commands.push_back(command());
      } else {
        if (!p.commands.empty()) fail(peek().pos, "variable declarations must precede commands");
        p.variables.push_back(variable());
      }
    }
    next();
    return p;
  }

  VarDecl variable() {
    VarDecl v;
    v.pos = peek().pos;
    if (is_ident("observable")) {
      next();
      v.observable = true;
    }
    v.name = identifier("variable name");
    expect_punct(":");
    if (is_ident("bool")) {
      next();
      v.type = Type::Bool;
      v.lower = Expr::make_number(0, true, v.pos);
      v.upper = Expr::make_number(1, true, v.pos);
    } else {
      expect_punct("[");
      v.type = Type::Int;
      v.lower = expr();
      expect_punct("..");
      v.upper = expr();
      expect_punct("]");
    }
    expect_ident("init");
    v.init = expr();
    expect_punct(";");
    return v;
  }

  Command command() {
    Command c;
    c.pos = peek().pos;
    if (is_ident("rate")) {
      next();
      c.kind = Command::Kind::Markovian;
      expect_punct("(");
      c.rate = expr();
      expect_punct(")");
      c.guard = expr();
      expect_punct("->");
      Branch b;
      b.weight = Expr::make_number(1, true, c.pos);
      b.update = update();
      c.branches.push_back(std::move(b));
    } else {
      next();
      c.kind = Command::Kind::Probabilistic;
      if (!is_punct("]")) c.action = identifier("action label");
      expect_punct("]");
      c.guard = expr();
      expect_punct("->");
      if (starts_update()) {
        Branch b;
        b.weight = Expr::make_number(1, true, peek().pos);
        b.update = update();
        c.branches.push_back(std::move(b));
      } else {
        while (true) {
          Branch b;
          b.weight = expr();
          expect_punct(":");
          b.update = update();
          c.branches.push_back(std::move(b));
          if (!is_punct("+")) break;
          next();
        }
      }
    }
    expect_punct(";");
    return c;
  }

  bool starts_update() const {
    if (is_ident("true") && is_punct(";", 1)) return true;
    return is_punct("(") && peek(1).kind == Tok::Ident && is_punct("'", 2);
  }

  std::vector<Assignment> update() {
    std::vector<Assignment> out;
    if (is_ident("true")) {
      next();
      return out;
    }
    while (true) {
      Assignment a;
      a.pos = peek().pos;
      expect_punct("(");
      a.target = identifier("assignment target");
      expect_punct("'");
      expect_punct("=");
      a.value = expr();
      expect_punct(")");
      out.push_back(std::move(a));
      if (!is_punct("&")) break;
      next();
    }
    return out;
  }

  // Precedence climbing: ?: < || < && < == != < relational < + - < * / % < unary.
  Expr expr() { return ternary(); }

  Expr ternary() {
    Expr cond = binary(0);
    if (!is_punct("?")) return cond;
    const SourcePos pos = next().pos;
    Expr then = ternary();
    expect_punct(":");
    Expr otherwise = ternary();
    Expr e;
    e.kind = Expr::Kind::Ternary;
    e.pos = pos;
    e.args = {std::move(cond), std::move(then), std::move(otherwise)};
    return e;
  }

  static int precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return -1;
  }

  Expr binary(int min_prec) {
    Expr lhs = unary();
    while (true) {
      const Token& t = peek();
      if (t.kind != Tok::Punct) break;
      const int prec = precedence(t.text);
      if (prec < 0 || prec < min_prec) break;
      std::string op = t.text;
      const SourcePos pos = next().pos;
      Expr rhs = binary(prec + 1);
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.name = std::move(op);
      e.pos = pos;
      e.args = {std::move(lhs), std::move(rhs)};
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr unary() {
    if (is_punct("-") || is_punct("!")) {
      const Token& t = next();
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.name = t.text;
      e.pos = t.pos;
      e.args.push_back(unary());
      return e;
    }
    return primary();
  }

  Expr primary() {
    const Token t = peek();
    if (t.kind == Tok::Number) {
      next();
      return Expr::make_number(t.number, t.integral, t.pos);
    }
    if (is_punct("(")) {
      next();
      Expr e = expr();
      expect_punct(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      next();
      if (t.text == "true" || t.text == "false") return Expr::make_bool(t.text == "true", t.pos);
      if (is_punct("(")) {
        next();
        Expr e;
        e.kind = Expr::Kind::Call;
        e.name = t.text;
        e.pos = t.pos;
        if (!is_punct(")")) {
          e.args.push_back(expr());
          while (is_punct(",")) {
            next();
            e.args.push_back(expr());
          }
        }
        expect_punct(")");
        return e;
      }
      return Expr::make_name(t.text, t.pos);
    }
    fail(t.pos, "expected an expression, found '" + describe(t) + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

NetworkModel parse_syntax(std::string_view text) { return Parser(lex(text)).model(); }

NetworkModel parse(std::string_view text) {
  NetworkModel m = parse_syntax(text);
  check(m);
  return m;
}

NetworkModel parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace masched::dsl
