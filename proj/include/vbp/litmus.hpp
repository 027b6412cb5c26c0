#pragma once

// Litmus test language: AST, parser and printer for small multithreaded
// programs over relaxed atomics, with outcome expectations and optional
// embedded protocol declarations.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vbp {

using Value = std::int64_t;

struct SourcePos {
  int line = 0;
  int col = 0;
};

class ParseError : public std::runtime_error {
public:
  ParseError(SourcePos pos, const std::string& msg)
      : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + msg),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

private:
  SourcePos pos_;
};

struct Location {
  std::string name;
  Value initial_value = 0;
  friend bool operator==(const Location&, const Location&) = default;
};

struct Register {
  std::string name;
  int owner = -1;  // thread index
  friend bool operator==(const Register&, const Register&) = default;
};

// A literal value or a same-thread register.
struct Expr {
  bool is_literal = true;
  Value literal = 0;
  int reg = -1;

  static Expr lit(Value v) { return {true, v, -1}; }
  static Expr of_reg(int r) { return {false, 0, r}; }
  friend bool operator==(const Expr&, const Expr&) = default;
};

struct StoreStmt {
  int loc = -1;
  Expr value;
  friend bool operator==(const StoreStmt&, const StoreStmt&) = default;
};

struct LoadStmt {
  int dst = -1;  // register
  int loc = -1;
  friend bool operator==(const LoadStmt&, const LoadStmt&) = default;
};

struct RmwStmt {
  int loc = -1;
  Expr expected;
  Expr desired;
  int result = -1;  // register receiving 1 on success, 0 on failure; -1 if discarded
  friend bool operator==(const RmwStmt&, const RmwStmt&) = default;
};

using Statement = std::variant<StoreStmt, LoadStmt, RmwStmt>;

struct Expectation {
  enum class Polarity { Allowed, Forbidden };
  Polarity polarity = Polarity::Allowed;
  std::vector<std::pair<int, Value>> clause;  // conjunction of register == value
  friend bool operator==(const Expectation&, const Expectation&) = default;
};

// Protocol declarations as they appear in the source; resolved and validated
// by the protocol module.
struct RawStateDecl {
  std::string name;
  bool init = false;
  bool accepting = false;
  std::optional<Value> val;
  SourcePos pos;
  friend bool operator==(const RawStateDecl& a, const RawStateDecl& b) {
    return a.name == b.name && a.init == b.init && a.accepting == b.accepting && a.val == b.val;
  }
};

struct RawEdgeDecl {
  std::string src;
  Value label = 0;
  std::string dst;
  SourcePos pos;
  friend bool operator==(const RawEdgeDecl& a, const RawEdgeDecl& b) {
    return a.src == b.src && a.label == b.label && a.dst == b.dst;
  }
};

struct RawProtocolDecl {
  std::string thread_name;
  std::string loc_name;
  std::vector<RawStateDecl> states;
  std::vector<RawEdgeDecl> edges;
  SourcePos pos;
  friend bool operator==(const RawProtocolDecl& a, const RawProtocolDecl& b) {
    return a.thread_name == b.thread_name && a.loc_name == b.loc_name && a.states == b.states &&
           a.edges == b.edges;
  }
};

struct LitmusProgram {
  std::string name;
  std::vector<Location> locations;
  std::vector<std::string> thread_names;
  std::vector<std::vector<Statement>> threads;  // indexed by thread
  std::vector<Register> registers;
  std::vector<Expectation> expectations;
  std::vector<RawProtocolDecl> declared_protocols;

  int num_threads() const { return static_cast<int>(threads.size()); }
  int num_locations() const { return static_cast<int>(locations.size()); }

  std::optional<int> find_location(std::string_view n) const {
    for (int i = 0; i < num_locations(); ++i)
      if (locations[i].name == n) return i;
    return std::nullopt;
  }
  std::optional<int> find_register(std::string_view n) const {
    for (int i = 0; i < static_cast<int>(registers.size()); ++i)
      if (registers[i].name == n) return i;
    return std::nullopt;
  }
  std::optional<int> find_thread(std::string_view n) const {
    for (int i = 0; i < num_threads(); ++i)
      if (thread_names[i] == n) return i;
    return std::nullopt;
  }

  friend bool operator==(const LitmusProgram&, const LitmusProgram&) = default;
};

// Registers assigned by loads or rmw results: the domain of outcome predicates.
inline std::set<int> free_registers(const LitmusProgram& prog) {
  std::set<int> out;
  for (const auto& body : prog.threads) {
    for (const auto& stmt : body) {
      if (const auto* ld = std::get_if<LoadStmt>(&stmt)) out.insert(ld->dst);
      if (const auto* rmw = std::get_if<RmwStmt>(&stmt))
        if (rmw->result >= 0) out.insert(rmw->result);
    }
  }
  return out;
}

namespace detail {

struct Token {
  enum class Kind { Ident, Int, Sym, End };
  Kind kind = Kind::End;
  std::string text;
  Value num = 0;
  SourcePos pos;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SourcePos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Token::Kind::Ident, std::string(src.substr(i, j - i)), 0, pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      Token t{Token::Kind::Int, std::string(src.substr(i, j - i)), 0, pos};
      t.num = std::stoll(t.text);
      out.push_back(t);
      advance(j - i);
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == ":=" || two == "==" || two == "&&" || two == "->") {
      out.push_back({Token::Kind::Sym, std::string(two), 0, pos});
      advance(2);
      continue;
    }
    if (std::string_view("{}(),;-=").find(c) != std::string_view::npos) {
      out.push_back({Token::Kind::Sym, std::string(1, c), 0, pos});
      advance(1);
      continue;
    }
    throw ParseError(pos, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Token::Kind::End, "<eof>", 0, {line, col}});
  return out;
}

class LitmusParser {
public:
  explicit LitmusParser(std::string_view src) : toks_(tokenize(src)) {
    for (const auto& t : toks_)
      if (t.kind == Token::Kind::Ident) idents_.insert(t.text);
  }

  LitmusProgram parse() {
    expect_kw("test");
    prog_.name = expect_ident("test name");
    parse_vars();
    if (at_kw("protocols")) parse_protocols();
    if (!at_kw("thread")) fail("expected 'thread'");
    while (at_kw("thread")) parse_thread();
    while (at_kw("allowed") || at_kw("forbidden")) parse_expectation();
    if (cur().kind != Token::Kind::End) fail("trailing input after test");
    return std::move(prog_);
  }

private:
  std::vector<Token> toks_;
  size_t i_ = 0;
  LitmusProgram prog_;
  std::set<std::string> idents_;
  int fresh_counter_ = 0;

  const Token& cur() const { return toks_[i_]; }
  const Token& next() { return toks_[i_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(cur().pos, msg); }

  bool at_sym(std::string_view s) const {
    return cur().kind == Token::Kind::Sym && cur().text == s;
  }
  bool at_kw(std::string_view s) const {
    return cur().kind == Token::Kind::Ident && cur().text == s;
  }
  void expect_sym(std::string_view s) {
    if (!at_sym(s)) fail("expected '" + std::string(s) + "'");
    ++i_;
  }
  void expect_kw(std::string_view s) {
    if (!at_kw(s)) fail("expected '" + std::string(s) + "'");
    ++i_;
  }
  std::string expect_ident(const std::string& what) {
    if (cur().kind != Token::Kind::Ident) fail("expected " + what);
    return next().text;
  }
  Value expect_int() {
    bool neg = false;
    if (at_sym("-")) {
      neg = true;
      ++i_;
    }
    if (cur().kind != Token::Kind::Int) fail("expected integer");
    Value v = next().num;
    return neg ? -v : v;
  }

  void parse_vars() {
    expect_kw("vars");
    do {
      auto pos = cur().pos;
      std::string name = expect_ident("location name");
      if (prog_.find_location(name)) throw ParseError(pos, "duplicate location '" + name + "'");
      expect_sym("=");
      Value init = expect_int();
      prog_.locations.push_back({name, init});
    } while (at_sym(",") && (++i_, true));
  }

  void parse_protocols() {
    expect_kw("protocols");
    expect_sym("{");
    while (at_kw("protocol")) {
      RawProtocolDecl decl;
      decl.pos = cur().pos;
      ++i_;
      decl.thread_name = expect_ident("thread name");
      decl.loc_name = expect_ident("location name");
      expect_sym("{");
      if (!at_kw("state")) fail("expected 'state'");
      while (at_kw("state")) {
        ++i_;
        RawStateDecl st;
        st.pos = cur().pos;
        st.name = expect_ident("state name");
        do {
          if (at_kw("init")) {
            ++i_;
            st.init = true;
          } else if (at_kw("accepting")) {
            ++i_;
            st.accepting = true;
          } else if (at_kw("val")) {
            ++i_;
            expect_sym("=");
            st.val = expect_int();
          } else {
            fail("expected state attribute (init, accepting, val = N)");
          }
        } while (at_sym(",") && (++i_, true));
        expect_sym(";");
        decl.states.push_back(std::move(st));
      }
      while (!at_sym("}")) {
        RawEdgeDecl e;
        e.pos = cur().pos;
        e.src = expect_ident("edge source state");
        expect_sym("-");
        e.label = expect_int();
        expect_sym("->");
        e.dst = expect_ident("edge target state");
        expect_sym(";");
        decl.edges.push_back(std::move(e));
      }
      expect_sym("}");
      prog_.declared_protocols.push_back(std::move(decl));
    }
    expect_sym("}");
  }

  int define_register(const std::string& name, int thread, SourcePos pos) {
    if (prog_.find_location(name))
      throw ParseError(pos, "cannot load into atomic location '" + name + "'");
    if (auto r = prog_.find_register(name)) {
      if (prog_.registers[*r].owner != thread)
        throw ParseError(pos, "register '" + name + "' used across threads");
      return *r;
    }
    prog_.registers.push_back({name, thread});
    return static_cast<int>(prog_.registers.size()) - 1;
  }

  int use_register(const std::string& name, int thread, SourcePos pos) {
    auto r = prog_.find_register(name);
    if (!r) throw ParseError(pos, "undeclared register '" + name + "'");
    if (prog_.registers[*r].owner != thread)
      throw ParseError(pos, "register '" + name + "' used across threads");
    return *r;
  }

  int fresh_register(int thread) {
    std::string name;
    do {
      name = "r" + std::to_string(fresh_counter_++);
    } while (idents_.count(name));
    prog_.registers.push_back({name, thread});
    return static_cast<int>(prog_.registers.size()) - 1;
  }

  // A literal, a register, or a location name (the latter only meaningful on
  // the right-hand side of an assignment).
  struct RawExpr {
    std::optional<Value> literal;
    std::string ident;
    SourcePos pos;
  };

  RawExpr parse_raw_expr() {
    RawExpr e;
    e.pos = cur().pos;
    if (at_sym("-") || cur().kind == Token::Kind::Int) {
      e.literal = expect_int();
    } else {
      e.ident = expect_ident("expression");
    }
    return e;
  }

  Expr resolve_value_expr(const RawExpr& e, int thread) {
    if (e.literal) return Expr::lit(*e.literal);
    if (prog_.find_location(e.ident))
      throw ParseError(e.pos, "atomic location '" + e.ident + "' not allowed here");
    return Expr::of_reg(use_register(e.ident, thread, e.pos));
  }

  RmwStmt parse_rmw(int thread) {
    expect_kw("rmw");
    expect_sym("(");
    auto pos = cur().pos;
    std::string locname = expect_ident("location");
    auto loc = prog_.find_location(locname);
    if (!loc) throw ParseError(pos, "undeclared location '" + locname + "'");
    expect_sym(",");
    Expr expected = resolve_value_expr(parse_raw_expr(), thread);
    expect_sym(",");
    Expr desired = resolve_value_expr(parse_raw_expr(), thread);
    expect_sym(")");
    return RmwStmt{*loc, expected, desired, -1};
  }

  void parse_statement(int thread, std::vector<Statement>& body) {
    if (at_kw("rmw")) {
      body.emplace_back(parse_rmw(thread));
      expect_sym(";");
      return;
    }
    auto pos = cur().pos;
    std::string lhs = expect_ident("statement");
    expect_sym(":=");
    if (auto loc = prog_.find_location(lhs)) {
      if (at_kw("rmw")) throw ParseError(pos, "rmw result must be bound to a register");
      RawExpr rhs = parse_raw_expr();
      if (!rhs.literal && prog_.find_location(rhs.ident)) {
        // x := y with both atomic: load into a fresh register, then store it.
        int r = fresh_register(thread);
        body.emplace_back(LoadStmt{r, *prog_.find_location(rhs.ident)});
        body.emplace_back(StoreStmt{*loc, Expr::of_reg(r)});
      } else {
        body.emplace_back(StoreStmt{*loc, resolve_value_expr(rhs, thread)});
      }
    } else {
      if (at_kw("rmw")) {
        RmwStmt rmw = parse_rmw(thread);
        rmw.result = define_register(lhs, thread, pos);
        body.emplace_back(rmw);
      } else {
        RawExpr rhs = parse_raw_expr();
        if (rhs.literal || !prog_.find_location(rhs.ident))
          throw ParseError(rhs.pos, "load source must be an atomic location");
        body.emplace_back(LoadStmt{define_register(lhs, thread, pos),
                                   *prog_.find_location(rhs.ident)});
      }
    }
    expect_sym(";");
  }

  void parse_thread() {
    expect_kw("thread");
    auto pos = cur().pos;
    std::string name = expect_ident("thread name");
    if (prog_.find_thread(name)) throw ParseError(pos, "duplicate thread '" + name + "'");
    int t = prog_.num_threads();
    prog_.thread_names.push_back(name);
    prog_.threads.emplace_back();
    expect_sym("{");
    while (!at_sym("}")) parse_statement(t, prog_.threads[t]);
    expect_sym("}");
  }

  void parse_expectation() {
    Expectation e;
    e.polarity = at_kw("allowed") ? Expectation::Polarity::Allowed
                                  : Expectation::Polarity::Forbidden;
    ++i_;
    expect_sym("{");
    do {
      auto pos = cur().pos;
      std::string name = expect_ident("register name");
      auto r = prog_.find_register(name);
      if (!r) throw ParseError(pos, "undeclared register '" + name + "'");
      expect_sym("==");
      e.clause.emplace_back(*r, expect_int());
    } while (at_sym("&&") && (++i_, true));
    expect_sym("}");
    prog_.expectations.push_back(std::move(e));
  }
};

}  // namespace detail

inline LitmusProgram parse_litmus(std::string_view source) {
  return detail::LitmusParser(source).parse();
}

inline std::string format_expr(const LitmusProgram& prog, const Expr& e) {
  return e.is_literal ? std::to_string(e.literal) : prog.registers[e.reg].name;
}

inline std::string format_clause(const LitmusProgram& prog,
                                 const std::vector<std::pair<int, Value>>& clause) {
  std::string out;
  for (size_t i = 0; i < clause.size(); ++i) {
    if (i) out += " && ";
    out += prog.registers[clause[i].first].name + " == " + std::to_string(clause[i].second);
  }
  return out;
}

inline std::string format_statement(const LitmusProgram& prog, const Statement& stmt) {
  std::ostringstream os;
  if (const auto* st = std::get_if<StoreStmt>(&stmt)) {
    os << prog.locations[st->loc].name << " := " << format_expr(prog, st->value);
  } else if (const auto* ld = std::get_if<LoadStmt>(&stmt)) {
    os << prog.registers[ld->dst].name << " := " << prog.locations[ld->loc].name;
  } else {
    const auto& rmw = std::get<RmwStmt>(stmt);
    if (rmw.result >= 0) os << prog.registers[rmw.result].name << " := ";
    os << "rmw(" << prog.locations[rmw.loc].name << ", " << format_expr(prog, rmw.expected)
       << ", " << format_expr(prog, rmw.desired) << ")";
  }
  return os.str();
}

inline std::string pretty_print(const LitmusProgram& prog) {
  std::ostringstream os;
  os << "test " << prog.name << "\n";
  os << "vars ";
  for (int x = 0; x < prog.num_locations(); ++x) {
    if (x) os << ", ";
    os << prog.locations[x].name << " = " << prog.locations[x].initial_value;
  }
  os << "\n";
  if (!prog.declared_protocols.empty()) {
    os << "protocols {\n";
    for (const auto& p : prog.declared_protocols) {
      os << "  protocol " << p.thread_name << " " << p.loc_name << " {\n";
      for (const auto& s : p.states) {
        os << "    state " << s.name;
        bool first = true;
        auto attr = [&](const std::string& a) {
          os << (first ? " " : ", ") << a;
          first = false;
        };
        if (s.init) attr("init");
        if (s.accepting) attr("accepting");
        if (s.val) attr("val = " + std::to_string(*s.val));
        os << ";\n";
      }
      for (const auto& e : p.edges)
        os << "    " << e.src << " - " << e.label << " -> " << e.dst << ";\n";
      os << "  }\n";
    }
    os << "}\n";
  }
  for (int t = 0; t < prog.num_threads(); ++t) {
    os << "thread " << prog.thread_names[t] << " {\n";
    for (const auto& stmt : prog.threads[t])
      os << "  " << format_statement(prog, stmt) << ";\n";
    os << "}\n";
  }
  for (const auto& e : prog.expectations) {
    os << (e.polarity == Expectation::Polarity::Allowed ? "allowed" : "forbidden") << " { "
       << format_clause(prog, e.clause) << " }\n";
  }
  return os.str();
}

}  // namespace vbp
