#include "cycleq/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace cycleq {

std::string Diagnostic::str() const {
  return std::to_string(line) + ":" + std::to_string(col) + ": " + message;
}

static std::string join_diags(const std::vector<Diagnostic>& d) {
  std::string s;
  for (const auto& x : d) s += (s.empty() ? "" : "\n") + x.str();
  return s;
}

ParseError::ParseError(std::vector<Diagnostic> d) : Error(join_diags(d)), diags_(std::move(d)) {}

const Goal& Program::goal(const std::string& name) const {
  for (const auto& g : goals)
    if (g.name == name) return g;
  throw Error("no goal named " + name);
}

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok { Upper, Lower, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 0, col = 0;
  bool first = false;  // starts at column 1
};

[[noreturn]] void fail(int line, int col, const std::string& msg) { throw ParseError({{line, col, msg}}); }

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (src.compare(i, 2, "--") == 0) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    t.first = col == 1;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.text = src.substr(i, j - i);
      t.kind = std::isupper(static_cast<unsigned char>(c)) ? Tok::Upper : Tok::Lower;
      advance(j - i);
    } else if (src.compare(i, 2, "::") == 0 || src.compare(i, 2, "->") == 0) {
      t.kind = Tok::Sym;
      t.text = src.substr(i, 2);
      advance(2);
    } else if (src.compare(i, 3, "\xE2\x89\x90") == 0 || src.compare(i, 3, "\xE2\x89\xA1") == 0) {
      t.kind = Tok::Sym;  // ≐ and ≡
      t.text = "=";
      advance(3);
    } else if (std::string("=|():.,").find(c) != std::string::npos) {
      t.kind = Tok::Sym;
      t.text = std::string(1, c);
      advance(1);
    } else {
      fail(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  end.first = true;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------- syntax trees

struct TypeAst {
  enum Kind { Con, Var, Arrow } kind = Con;
  std::string name;
  std::vector<TypeAst> args;  // Con arguments, or {dom, cod}
  int line = 0, col = 0;
};

struct TermAst {
  bool upper = false;
  std::string name;            // set for atoms
  std::vector<TermAst> spine;  // set for applications (head first)
  int line = 0, col = 0;
};

struct ConAst {
  std::string name;
  std::vector<TypeAst> args;
  int line = 0, col = 0;
};

struct DataAst {
  std::string name;
  std::vector<std::string> params;
  std::vector<ConAst> cons;
  int line = 0, col = 0;
};

struct SigAst {
  std::string name;
  TypeAst type;
  int line = 0, col = 0;
};

struct RuleAst {
  std::string head;
  std::vector<TermAst> pats;
  TermAst rhs;
  int line = 0, col = 0;
};

struct GoalAst {
  std::string name;
  std::vector<std::pair<std::string, TypeAst>> binders;
  TermAst lhs, rhs;
  int line = 0, col = 0;
};

// ---------------------------------------------------------------- parser

class Parser {
 public:
  Parser(const std::vector<Token>& toks, std::size_t begin, std::size_t end)
      : toks_(toks), pos_(begin), end_(end) {}

  const Token& peek() const { return pos_ < end_ ? toks_[pos_] : toks_[end_]; }
  bool at_end() const { return pos_ >= end_; }
  bool is_sym(const std::string& s) const { return !at_end() && peek().kind == Tok::Sym && peek().text == s; }
  const Token& next() {
    const Token& t = peek();
    if (!at_end()) ++pos_;
    return t;
  }
  [[noreturn]] void error(const std::string& what) const {
    const Token& t = peek();
    std::string found = at_end() ? "end of declaration" : "'" + t.text + "'";
    fail(t.line, t.col, "expected " + what + ", found " + found);
  }
  void expect(const std::string& s) {
    if (!is_sym(s)) error("'" + s + "'");
    next();
  }
  const Token& expect(Tok k, const std::string& what) {
    if (at_end() || peek().kind != k) error(what);
    return next();
  }
  void finish() {
    if (!at_end()) error("end of declaration");
  }

  // type := btype ("->" type)?
  TypeAst type() {
    TypeAst d = btype();
    if (is_sym("->")) {
      next();
      TypeAst r;
      r.kind = TypeAst::Arrow;
      r.line = d.line;
      r.col = d.col;
      r.args = {d, type()};
      return r;
    }
    return d;
  }
  // btype := UpperIdent atype* | atype
  TypeAst btype() {
    if (!at_end() && peek().kind == Tok::Upper) {
      TypeAst t = atype();
      while (starts_atype()) t.args.push_back(atype());
      return t;
    }
    return atype();
  }
  bool starts_atype() const {
    return !at_end() && (peek().kind == Tok::Upper || peek().kind == Tok::Lower || is_sym("("));
  }
  // atype := UpperIdent | lowerIdent | "(" type ")"
  TypeAst atype() {
    const Token& t = peek();
    TypeAst a;
    a.line = t.line;
    a.col = t.col;
    if (t.kind == Tok::Upper && !at_end()) {
      a.kind = TypeAst::Con;
      a.name = next().text;
      return a;
    }
    if (t.kind == Tok::Lower && !at_end()) {
      a.kind = TypeAst::Var;
      a.name = next().text;
      return a;
    }
    if (is_sym("(")) {
      next();
      TypeAst inner = type();
      expect(")");
      return inner;
    }
    error("a type");
  }

  TermAst term() {
    std::vector<TermAst> spine;
    while (starts_atom()) spine.push_back(atom());
    if (spine.empty()) error("a term");
    if (spine.size() == 1) return spine[0];
    TermAst t;
    t.line = spine[0].line;
    t.col = spine[0].col;
    t.spine = std::move(spine);
    return t;
  }
  bool starts_atom() const {
    return !at_end() && (peek().kind == Tok::Upper || peek().kind == Tok::Lower || is_sym("("));
  }
  TermAst atom() {
    const Token& t = peek();
    if (is_sym("(")) {
      next();
      TermAst inner = term();
      expect(")");
      return inner;
    }
    TermAst a;
    a.line = t.line;
    a.col = t.col;
    a.upper = t.kind == Tok::Upper;
    a.name = next().text;
    return a;
  }

  // pattern := lowerIdent | UpperIdent | "(" UpperIdent pattern* ")"
  TermAst pattern() {
    const Token& t = peek();
    if (is_sym("(")) {
      next();
      const Token& c = peek();
      if (c.kind == Tok::Lower && !at_end()) {
        TermAst v = atom();
        expect(")");
        return v;
      }
      const Token& head = expect(Tok::Upper, "a constructor");
      TermAst h;
      h.upper = true;
      h.name = head.text;
      h.line = head.line;
      h.col = head.col;
      std::vector<TermAst> spine{h};
      while (!is_sym(")")) spine.push_back(pattern());
      next();
      if (spine.size() == 1) return h;
      TermAst app;
      app.line = h.line;
      app.col = h.col;
      app.spine = std::move(spine);
      return app;
    }
    if (!at_end() && (t.kind == Tok::Upper || t.kind == Tok::Lower)) return atom();
    error("a pattern");
  }

  DataAst data() {
    const Token& kw = next();
    DataAst d;
    d.line = kw.line;
    d.col = kw.col;
    d.name = expect(Tok::Upper, "a datatype name").text;
    while (!at_end() && peek().kind == Tok::Lower) d.params.push_back(next().text);
    expect("=");
    for (;;) {
      const Token& c = expect(Tok::Upper, "a constructor name");
      ConAst con;
      con.name = c.text;
      con.line = c.line;
      con.col = c.col;
      while (starts_atype()) con.args.push_back(atype());
      d.cons.push_back(std::move(con));
      if (!is_sym("|")) break;
      next();
    }
    finish();
    return d;
  }

  SigAst sig() {
    const Token& n = next();
    SigAst s;
    s.name = n.text;
    s.line = n.line;
    s.col = n.col;
    expect("::");
    s.type = type();
    finish();
    return s;
  }

  RuleAst rule() {
    const Token& n = next();
    RuleAst r;
    r.head = n.text;
    r.line = n.line;
    r.col = n.col;
    while (!is_sym("=")) {
      if (at_end()) error("'='");
      r.pats.push_back(pattern());
    }
    next();
    r.rhs = term();
    finish();
    return r;
  }

  // binders and terms after "goal name :"
  GoalAst goal_body(GoalAst g) {
    if (!at_end() && peek().kind == Tok::Lower && peek().text == "forall") {
      next();
      while (!is_sym(".")) {
        const Token& v = expect(Tok::Lower, "a variable binder");
        expect(":");
        g.binders.emplace_back(v.text, type());
        if (is_sym(",")) next();
      }
      next();
    }
    g.lhs = term();
    expect("=");
    g.rhs = term();
    finish();
    return g;
  }

  GoalAst goal() {
    const Token& kw = next();
    GoalAst g;
    g.line = kw.line;
    g.col = kw.col;
    g.name = expect(Tok::Lower, "a goal name").text;
    expect(":");
    return goal_body(std::move(g));
  }

 private:
  const std::vector<Token>& toks_;
  std::size_t pos_, end_;
};

// ---------------------------------------------------------------- elaboration

class Elaborator {
 public:
  explicit Elaborator(const Signature& sig) : sig_(sig) {}

  TypeExpr type(const TypeAst& t, const std::set<std::string>* params) const {
    switch (t.kind) {
      case TypeAst::Var:
        if (params && !params->count(t.name)) fail(t.line, t.col, "type variable " + t.name + " is not a parameter");
        return TypeExpr::var(t.name);
      case TypeAst::Arrow:
        return TypeExpr::arrow(type(t.args[0], params), type(t.args[1], params));
      case TypeAst::Con: {
        if (!sig_.has_datatype(t.name)) fail(t.line, t.col, "unknown datatype " + t.name);
        const auto& d = sig_.datatype(t.name);
        if (d.params.size() != t.args.size())
          fail(t.line, t.col,
               "datatype " + t.name + " expects " + std::to_string(d.params.size()) + " arguments");
        std::vector<TypeExpr> as;
        for (const auto& a : t.args) as.push_back(type(a, params));
        return TypeExpr::data(t.name, as);
      }
    }
    fail(t.line, t.col, "bad type");
  }

  // Lower-case names resolve to pattern variables if bound, else to functions;
  // with `free_vars` unknown lower-case names become variables.
  Term term(const TermAst& t, const std::set<std::string>& vars, bool free_vars = false) const {
    if (!t.spine.empty()) {
      std::vector<Term> parts;
      for (const auto& s : t.spine) parts.push_back(term(s, vars, free_vars));
      Term r = parts[0];
      for (std::size_t i = 1; i < parts.size(); ++i) r = Term::app(r, parts[i]);
      return r;
    }
    if (t.upper) {
      if (!sig_.is_constructor(t.name)) fail(t.line, t.col, "unknown constructor " + t.name);
      return Term::con(t.name);
    }
    if (vars.count(t.name)) return Term::var(t.name);
    if (sig_.is_defined(t.name)) return Term::fun(t.name);
    if (free_vars) return Term::var(t.name);
    fail(t.line, t.col, "unknown identifier " + t.name);
  }

  Term pattern(const TermAst& t, std::set<std::string>& vars) const {
    if (!t.spine.empty()) {
      Term r = pattern(t.spine[0], vars);
      for (std::size_t i = 1; i < t.spine.size(); ++i) r = Term::app(r, pattern(t.spine[i], vars));
      return r;
    }
    if (t.upper) {
      if (!sig_.is_constructor(t.name)) fail(t.line, t.col, "unknown constructor " + t.name);
      return Term::con(t.name);
    }
    if (sig_.has_symbol(t.name)) fail(t.line, t.col, "defined function " + t.name + " in a pattern");
    vars.insert(t.name);
    return Term::var(t.name);
  }

  Equation goal(const GoalAst& g) const {
    TypeEnv env;
    std::set<std::string> vars;
    for (const auto& [x, ty] : g.binders) {
      if (env.count(x)) fail(g.line, g.col, "variable " + x + " bound twice");
      if (sig_.has_symbol(x)) fail(g.line, g.col, "binder " + x + " shadows a function");
      env[x] = type(ty, nullptr);
      vars.insert(x);
    }
    Term l = term(g.lhs, vars), r = term(g.rhs, vars);
    try {
      return make_equation(sig_, l, r, env);
    } catch (const TypeError& e) {
      fail(g.lhs.line, g.lhs.col, e.what());
    }
  }

 private:
  const Signature& sig_;
};

}  // namespace

Program parse_program(const std::string& text) {
  std::vector<Token> toks = lex(text);
  // split into declarations at tokens that start in column 1
  std::vector<std::pair<std::size_t, std::size_t>> decls;
  for (std::size_t i = 0; i + 1 < toks.size();) {
    if (!toks[i].first) fail(toks[i].line, toks[i].col, "declarations must start in column 1");
    std::size_t j = i + 1;
    while (!toks[j].first) ++j;
    decls.emplace_back(i, j);
    i = j;
  }

  std::vector<DataAst> datas;
  std::vector<SigAst> sigs;
  std::vector<RuleAst> rules;
  std::vector<GoalAst> goals;
  for (auto [b, e] : decls) {
    Parser p(toks, b, e);
    const Token& t = toks[b];
    if (t.kind == Tok::Lower && t.text == "data") {
      datas.push_back(p.data());
    } else if (t.kind == Tok::Lower && t.text == "goal") {
      goals.push_back(p.goal());
    } else if (t.kind == Tok::Lower) {
      if (b + 1 < e && toks[b + 1].kind == Tok::Sym && toks[b + 1].text == "::")
        sigs.push_back(p.sig());
      else
        rules.push_back(p.rule());
    } else {
      fail(t.line, t.col, "expected a declaration, found '" + t.text + "'");
    }
  }

  Program prog;
  Signature& sig = prog.sig;
  Elaborator el(sig);
  for (const auto& d : datas) {
    if (sig.has_datatype(d.name)) fail(d.line, d.col, "datatype " + d.name + " declared twice");
    DataDecl dd{d.name, d.params, {}};
    sig.add_datatype(dd);
  }
  for (const auto& d : datas) {
    std::set<std::string> params(d.params.begin(), d.params.end());
    std::vector<TypeExpr> pargs;
    for (const auto& p : d.params) pargs.push_back(TypeExpr::var(p));
    TypeExpr result = TypeExpr::data(d.name, pargs);
    for (const auto& c : d.cons) {
      if (sig.has_symbol(c.name)) fail(c.line, c.col, "constructor " + c.name + " declared twice");
      std::vector<TypeExpr> as;
      for (const auto& a : c.args) {
        TypeExpr ty = el.type(a, &params);
        if (ty.is_arrow()) fail(a.line, a.col, "constructor arguments must be first-order");
        as.push_back(ty);
      }
      sig.add_constructor(c.name, TypeExpr::arrows(as, result), d.name);
    }
  }
  for (const auto& s : sigs) {
    if (sig.has_symbol(s.name)) fail(s.line, s.col, "symbol " + s.name + " declared twice");
    sig.add_function(s.name, el.type(s.type, nullptr));
  }

  std::vector<RewriteRule> rs;
  for (const auto& r : rules) {
    if (!sig.is_defined(r.head)) fail(r.line, r.col, "rule for undeclared function " + r.head);
    std::set<std::string> vars;
    Term lhs = Term::fun(r.head);
    for (const auto& p : r.pats) {
      std::set<std::string> pv;
      Term pt = el.pattern(p, pv);
      for (const auto& v : pv)
        if (vars.count(v)) fail(p.line, p.col, "variable " + v + " repeated in the left-hand side");
      vars.insert(pv.begin(), pv.end());
      lhs = Term::app(lhs, pt);
    }
    Term rhs = el.term(r.rhs, vars);
    RewriteRule rule;
    rule.lhs = lhs;
    rule.rhs = rhs;
    rule.line = r.line;
    try {
      rule.env = infer_env(sig, {}, {lhs, rhs}, nullptr, true);
      validate_rule(sig, rule);
    } catch (const Error& e) {
      fail(r.line, r.col, e.what());
    }
    rs.push_back(std::move(rule));
  }
  try {
    prog.rules = RuleSet(sig, rs);
  } catch (const Error& e) {
    fail(1, 1, e.what());
  }
  prog.completeness = check_completeness(prog.rules);
  prog.orthogonality = check_orthogonality(prog.rules);

  std::set<std::string> names;
  for (const auto& g : goals) {
    if (!names.insert(g.name).second) fail(g.line, g.col, "goal " + g.name + " declared twice");
    prog.goals.push_back({g.name, el.goal(g), g.line});
  }
  return prog;
}

Program parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

Term parse_term(const Signature& sig, const std::string& text) {
  std::vector<Token> toks = lex(text);
  Parser p(toks, 0, toks.size() - 1);
  TermAst t = p.term();
  p.finish();
  return Elaborator(sig).term(t, {}, true);
}

Equation parse_equation(const Signature& sig, const std::string& text) {
  std::vector<Token> toks = lex(text);
  Parser p(toks, 0, toks.size() - 1);
  GoalAst g = p.goal_body({});
  return Elaborator(sig).goal(g);
}

std::string pretty_term(const Term& t) { return t.str(); }

std::string pretty_type(const TypeExpr& t) { return t.str(); }

std::string pretty_equation(const Equation& e) { return e.lhs.str() + " \xE2\x89\x90 " + e.rhs.str(); }

std::string pretty_goal(const Equation& e) {
  std::string s = "forall";
  bool first = true;
  for (const auto& [x, ty] : e.env) {
    s += (first ? " " : ", ") + x + ":" + ty.str();
    first = false;
  }
  return s + ". " + e.lhs.str() + " = " + e.rhs.str();
}

}  // namespace cycleq
