#include "cycleq/terms.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace cycleq {

// ---------------------------------------------------------------- TypeExpr

struct TypeExpr::Node {
  Kind kind;
  std::string name;
  std::vector<TypeExpr> args;  // Arrow: {dom, cod}
};

TypeExpr::TypeExpr() : n_(std::make_shared<Node>(Node{Kind::Data, "?", {}})) {}

TypeExpr TypeExpr::data(std::string name, std::vector<TypeExpr> args) {
  return TypeExpr(std::make_shared<Node>(Node{Kind::Data, std::move(name), std::move(args)}));
}

TypeExpr TypeExpr::var(std::string name) {
  return TypeExpr(std::make_shared<Node>(Node{Kind::Var, std::move(name), {}}));
}

TypeExpr TypeExpr::arrow(TypeExpr dom, TypeExpr cod) {
  return TypeExpr(std::make_shared<Node>(Node{Kind::Arrow, "", {std::move(dom), std::move(cod)}}));
}

TypeExpr TypeExpr::arrows(const std::vector<TypeExpr>& doms, TypeExpr result) {
  for (auto it = doms.rbegin(); it != doms.rend(); ++it) result = arrow(*it, result);
  return result;
}

TypeExpr::Kind TypeExpr::kind() const { return n_->kind; }
const std::string& TypeExpr::name() const { return n_->name; }
const std::vector<TypeExpr>& TypeExpr::args() const { return n_->args; }
const TypeExpr& TypeExpr::dom() const { return n_->args.at(0); }
const TypeExpr& TypeExpr::cod() const { return n_->args.at(1); }

int TypeExpr::order() const {
  if (!is_arrow()) return 0;
  return std::max(dom().order() + 1, cod().order());
}

std::vector<TypeExpr> TypeExpr::domains() const {
  std::vector<TypeExpr> out;
  const TypeExpr* t = this;
  while (t->is_arrow()) {
    out.push_back(t->dom());
    t = &t->cod();
  }
  return out;
}

TypeExpr TypeExpr::result() const {
  const TypeExpr* t = this;
  while (t->is_arrow()) t = &t->cod();
  return *t;
}

std::set<std::string> TypeExpr::type_vars() const {
  std::set<std::string> out;
  std::function<void(const TypeExpr&)> go = [&](const TypeExpr& t) {
    if (t.is_var()) out.insert(t.name());
    for (const auto& a : t.args()) go(a);
  };
  go(*this);
  return out;
}

TypeExpr TypeExpr::subst(const std::map<std::string, TypeExpr>& s) const {
  switch (kind()) {
    case Kind::Var: {
      auto it = s.find(name());
      return it == s.end() ? *this : it->second;
    }
    case Kind::Arrow:
      return arrow(dom().subst(s), cod().subst(s));
    case Kind::Data: {
      if (args().empty()) return *this;
      std::vector<TypeExpr> as;
      for (const auto& a : args()) as.push_back(a.subst(s));
      return data(name(), std::move(as));
    }
  }
  return *this;
}

std::string TypeExpr::str() const {
  switch (kind()) {
    case Kind::Var:
      return name();
    case Kind::Arrow: {
      std::string d = dom().str();
      if (dom().is_arrow()) d = "(" + d + ")";
      return d + " -> " + cod().str();
    }
    case Kind::Data: {
      std::string s = name();
      for (const auto& a : args()) {
        std::string as = a.str();
        if (a.is_arrow() || (a.is_data() && !a.args().empty())) as = "(" + as + ")";
        s += " " + as;
      }
      return s;
    }
  }
  return "?";
}

bool operator==(const TypeExpr& a, const TypeExpr& b) {
  if (a.n_ == b.n_) return true;
  return a.kind() == b.kind() && a.name() == b.name() && a.args() == b.args();
}

bool operator<(const TypeExpr& a, const TypeExpr& b) {
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  if (a.name() != b.name()) return a.name() < b.name();
  return std::lexicographical_compare(a.args().begin(), a.args().end(), b.args().begin(), b.args().end());
}

// ---------------------------------------------------------------- Signature

void Signature::add_datatype(const DataDecl& d) {
  if (data_.count(d.name)) throw TypeError("duplicate datatype " + d.name);
  DataDecl copy = d;
  copy.constructors.clear();
  data_[d.name] = copy;
  data_order_.push_back(d.name);
}

void Signature::add_constructor(const std::string& name, const TypeExpr& type, const std::string& datatype) {
  if (!data_.count(datatype)) throw TypeError("unknown datatype " + datatype);
  if (has_symbol(name)) throw TypeError("duplicate symbol " + name);
  TypeExpr res = type.result();
  if (!res.is_data() || res.name() != datatype)
    throw TypeError("constructor " + name + " must return " + datatype);
  if (type.order() > 1) throw TypeError("constructor " + name + " is higher-order");
  cons_[name] = type;
  owner_[name] = datatype;
  data_[datatype].constructors.push_back(name);
  con_order_.push_back(name);
}

void Signature::add_function(const std::string& name, const TypeExpr& type) {
  if (has_symbol(name)) throw TypeError("duplicate symbol " + name);
  defs_[name] = type;
  def_order_.push_back(name);
}

const DataDecl& Signature::datatype(const std::string& d) const {
  auto it = data_.find(d);
  if (it == data_.end()) throw TypeError("unknown datatype " + d);
  return it->second;
}

const TypeExpr& Signature::type_of(const std::string& s) const {
  if (auto it = cons_.find(s); it != cons_.end()) return it->second;
  if (auto it = defs_.find(s); it != defs_.end()) return it->second;
  throw TypeError("unknown symbol " + s);
}

const std::string& Signature::owner(const std::string& con) const {
  auto it = owner_.find(con);
  if (it == owner_.end()) throw TypeError("not a constructor: " + con);
  return it->second;
}

const std::vector<std::string>& Signature::constructors_of(const std::string& d) const {
  return datatype(d).constructors;
}

std::vector<TypeExpr> Signature::constructor_args(const std::string& con, const TypeExpr& at) const {
  const TypeExpr& ty = type_of(con);
  const DataDecl& dd = datatype(owner(con));
  if (!at.is_data() || at.name() != dd.name || at.args().size() != dd.params.size())
    throw TypeError("constructor " + con + " does not build " + at.str());
  std::map<std::string, TypeExpr> s;
  for (std::size_t i = 0; i < dd.params.size(); ++i) s[dd.params[i]] = at.args()[i];
  std::vector<TypeExpr> out;
  for (const auto& d : ty.domains()) out.push_back(d.subst(s));
  return out;
}

// ---------------------------------------------------------------- Term

struct Term::Node {
  Kind kind;
  std::string name;
  std::optional<Term> fn, arg;
  std::size_t hash;
  std::size_t size;
  std::size_t depth;
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }
}  // namespace

Term::Term() : Term(var("_")) {}

Term Term::var(const std::string& name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->name = name;
  n->hash = mix(1, std::hash<std::string>()(name));
  n->size = 1;
  n->depth = 1;
  return Term(std::shared_ptr<const Node>(std::move(n)));
}

Term Term::con(const std::string& name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Con;
  n->name = name;
  n->hash = mix(2, std::hash<std::string>()(name));
  n->size = 1;
  n->depth = 1;
  return Term(std::shared_ptr<const Node>(std::move(n)));
}

Term Term::fun(const std::string& name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Fun;
  n->name = name;
  n->hash = mix(3, std::hash<std::string>()(name));
  n->size = 1;
  n->depth = 1;
  return Term(std::shared_ptr<const Node>(std::move(n)));
}

Term Term::app(const Term& f, const Term& a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::App;
  n->hash = mix(mix(4, f.hash()), a.hash());
  n->size = f.size() + a.size() + 1;
  n->depth = std::max(f.depth(), a.depth() + 1);
  n->fn = f;
  n->arg = a;
  return Term(std::shared_ptr<const Node>(std::move(n)));
}

Term Term::apply(const Term& head, const std::vector<Term>& args) {
  Term t = head;
  for (const auto& a : args) t = app(t, a);
  return t;
}

Term::Kind Term::kind() const { return n_->kind; }
const std::string& Term::name() const { return n_->name; }
const Term& Term::fn() const {
  if (!is_app()) throw PositionError("fn of non-application");
  return *n_->fn;
}
const Term& Term::arg() const {
  if (!is_app()) throw PositionError("arg of non-application");
  return *n_->arg;
}

Term Term::head() const {
  const Term* t = this;
  while (t->is_app()) t = &*t->n_->fn;
  return *t;
}

std::vector<Term> Term::args() const {
  std::vector<Term> out;
  const Term* t = this;
  while (t->is_app()) {
    out.push_back(*t->n_->arg);
    t = &*t->n_->fn;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t Term::nargs() const {
  std::size_t k = 0;
  const Term* t = this;
  while (t->is_app()) {
    ++k;
    t = &*t->n_->fn;
  }
  return k;
}

std::size_t Term::size() const { return n_->size; }
std::size_t Term::depth() const { return n_->depth; }
std::size_t Term::hash() const { return n_->hash; }

std::string Term::str() const {
  if (!is_app()) return name();
  std::string s = head().str();
  for (const auto& a : args()) s += " " + (a.is_app() ? "(" + a.str() + ")" : a.str());
  return s;
}

bool operator==(const Term& a, const Term& b) { return compare(a, b) == 0; }

int compare(const Term& a, const Term& b) {
  if (a.n_ == b.n_) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  if (!a.is_app()) {
    int c = a.name().compare(b.name());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  if (int c = compare(a.fn(), b.fn()); c != 0) return c;
  return compare(a.arg(), b.arg());
}

// ---------------------------------------------------------------- positions

std::string position_str(const Position& p) {
  std::string s;
  for (Step st : p) s += st == Step::Fn ? 'f' : 'a';
  return s;
}

Position position_from_str(const std::string& s) {
  Position p;
  for (char c : s) {
    if (c == 'f')
      p.push_back(Step::Fn);
    else if (c == 'a')
      p.push_back(Step::Arg);
    else
      throw PositionError("bad position string: " + s);
  }
  return p;
}

std::vector<Position> positions(const Term& t) {
  std::vector<Position> out;
  Position cur;
  std::function<void(const Term&)> go = [&](const Term& u) {
    out.push_back(cur);
    if (!u.is_app()) return;
    cur.push_back(Step::Fn);
    go(u.fn());
    cur.back() = Step::Arg;
    go(u.arg());
    cur.pop_back();
  };
  go(t);
  return out;
}

const Term& subterm_at(const Term& t, const Position& p) {
  const Term* u = &t;
  for (Step s : p) {
    if (!u->is_app()) throw PositionError("invalid position " + position_str(p) + " in " + t.str());
    u = s == Step::Fn ? &u->fn() : &u->arg();
  }
  return *u;
}

namespace {
Term replace_rec(const Term& t, const Position& p, std::size_t i, const Term& s) {
  if (i == p.size()) return s;
  if (!t.is_app()) throw PositionError("invalid position " + position_str(p));
  if (p[i] == Step::Fn) return Term::app(replace_rec(t.fn(), p, i + 1, s), t.arg());
  return Term::app(t.fn(), replace_rec(t.arg(), p, i + 1, s));
}
}  // namespace

Term replace_at(const Term& t, const Position& p, const Term& s) { return replace_rec(t, p, 0, s); }

Context Context::compose(const Context& d) const {
  Context out;
  out.base = replace_at(base, hole, d.base);
  out.hole = hole;
  out.hole.insert(out.hole.end(), d.hole.begin(), d.hole.end());
  return out;
}

std::optional<Context> context_leq(const Context& d, const Context& c) {
  if (d.hole.size() > c.hole.size()) return std::nullopt;
  if (!std::equal(d.hole.begin(), d.hole.end(), c.hole.begin())) return std::nullopt;
  Context e;
  e.base = subterm_at(c.base, d.hole);
  e.hole.assign(c.hole.begin() + static_cast<std::ptrdiff_t>(d.hole.size()), c.hole.end());
  return e;
}

// ---------------------------------------------------------------- substitutions

Term apply_subst(const Term& t, const Substitution& s) {
  if (s.empty()) return t;
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = s.find(t.name());
      return it == s.end() ? t : it->second;
    }
    case Term::Kind::App: {
      Term f = apply_subst(t.fn(), s);
      Term a = apply_subst(t.arg(), s);
      if (f == t.fn() && a == t.arg()) return t;
      return Term::app(f, a);
    }
    default:
      return t;
  }
}

Substitution compose(const Substitution& theta1, const Substitution& theta0) {
  Substitution out;
  for (const auto& [x, t] : theta0) out[x] = apply_subst(t, theta1);
  for (const auto& [x, t] : theta1)
    if (!theta0.count(x)) out[x] = t;
  return out;
}

std::string subst_str(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [x, t] : s) {
    if (!first) out += ", ";
    first = false;
    out += x + " -> " + t.str();
  }
  return out + "}";
}

bool match_into(const Term& pattern, const Term& subject, Substitution& s) {
  switch (pattern.kind()) {
    case Term::Kind::Var: {
      auto [it, inserted] = s.emplace(pattern.name(), subject);
      return inserted || it->second == subject;
    }
    case Term::Kind::App:
      return subject.is_app() && match_into(pattern.fn(), subject.fn(), s) &&
             match_into(pattern.arg(), subject.arg(), s);
    default:
      return subject.kind() == pattern.kind() && subject.name() == pattern.name();
  }
}

std::optional<Substitution> match(const Term& pattern, const Term& subject) {
  Substitution s;
  if (!match_into(pattern, subject, s)) return std::nullopt;
  return s;
}

bool occurs(const std::string& x, const Term& t) {
  if (t.is_var()) return t.name() == x;
  if (t.is_app()) return occurs(x, t.fn()) || occurs(x, t.arg());
  return false;
}

std::optional<Substitution> unify_all(const std::vector<std::pair<Term, Term>>& eqs) {
  Substitution s;
  std::vector<std::pair<Term, Term>> work(eqs.rbegin(), eqs.rend());
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    a = apply_subst(a, s);
    b = apply_subst(b, s);
    if (a == b) continue;
    if (!a.is_var() && b.is_var()) std::swap(a, b);
    if (a.is_var()) {
      if (occurs(a.name(), b)) return std::nullopt;
      Substitution one{{a.name(), b}};
      for (auto& [x, t] : s) t = apply_subst(t, one);
      s[a.name()] = b;
      continue;
    }
    if (a.is_app() && b.is_app()) {
      work.emplace_back(a.arg(), b.arg());
      work.emplace_back(a.fn(), b.fn());
      continue;
    }
    return std::nullopt;
  }
  return s;
}

std::optional<Substitution> unify(const Term& m, const Term& n) { return unify_all({{m, n}}); }

SubtermRel is_subterm(const Term& m, const Term& n) {
  if (m == n) return SubtermRel::Equal;
  std::function<bool(const Term&)> inside = [&](const Term& u) {
    if (u.size() < m.size()) return false;
    if (u == m) return true;
    return u.is_app() && (inside(u.fn()) || inside(u.arg()));
  };
  if (n.is_app() && (inside(n.fn()) || inside(n.arg()))) return SubtermRel::Strict;
  return SubtermRel::Unrelated;
}

std::vector<std::string> free_vars_ordered(const Term& t) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::function<void(const Term&)> go = [&](const Term& u) {
    if (u.is_var()) {
      if (seen.insert(u.name()).second) out.push_back(u.name());
    } else if (u.is_app()) {
      go(u.fn());
      go(u.arg());
    }
  };
  go(t);
  return out;
}

std::set<std::string> free_vars(const Term& t) {
  auto v = free_vars_ordered(t);
  return {v.begin(), v.end()};
}

// ---------------------------------------------------------------- typing

TypeEnv disjoint_union(const TypeEnv& a, const TypeEnv& b) {
  TypeEnv out = a;
  for (const auto& [x, t] : b)
    if (!out.emplace(x, t).second) throw TypeError("environments overlap on " + x);
  return out;
}

namespace {

/// Unification-based inference; meta variables are type variables whose
/// name begins with '?'. Other type variables are rigid.
class Infer {
 public:
  explicit Infer(const Signature& sig) : sig_(sig) {}

  TypeExpr fresh() { return TypeExpr::var("?" + std::to_string(counter_++)); }

  TypeExpr resolve(const TypeExpr& t) const {
    switch (t.kind()) {
      case TypeExpr::Kind::Var: {
        auto it = meta_.find(t.name());
        return it == meta_.end() ? t : resolve(it->second);
      }
      case TypeExpr::Kind::Arrow:
        return TypeExpr::arrow(resolve(t.dom()), resolve(t.cod()));
      case TypeExpr::Kind::Data: {
        if (t.args().empty()) return t;
        std::vector<TypeExpr> as;
        for (const auto& a : t.args()) as.push_back(resolve(a));
        return TypeExpr::data(t.name(), as);
      }
    }
    return t;
  }

  static bool is_meta(const TypeExpr& t) { return t.is_var() && !t.name().empty() && t.name()[0] == '?'; }

  bool occurs_meta(const std::string& m, const TypeExpr& t) const {
    TypeExpr r = resolve(t);
    if (r.is_var()) return r.name() == m;
    for (const auto& a : r.args())
      if (occurs_meta(m, a)) return true;
    return false;
  }

  bool unify(const TypeExpr& a0, const TypeExpr& b0) {
    TypeExpr a = shallow(a0), b = shallow(b0);
    if (is_meta(a) && is_meta(b) && a.name() == b.name()) return true;
    if (is_meta(a)) return bind(a.name(), b);
    if (is_meta(b)) return bind(b.name(), a);
    if (a.kind() != b.kind()) return false;
    if (a.is_var()) return a.name() == b.name();
    if (a.is_data() && (a.name() != b.name() || a.args().size() != b.args().size())) return false;
    for (std::size_t i = 0; i < a.args().size(); ++i)
      if (!unify(a.args()[i], b.args()[i])) return false;
    return true;
  }

  TypeExpr instantiate(const TypeExpr& t) {
    std::map<std::string, TypeExpr> s;
    for (const auto& v : t.type_vars()) s[v] = fresh();
    return t.subst(s);
  }

  TypeExpr infer(TypeEnv& env, const Term& t, bool allow_unknown, const Term* rigid = nullptr) {
    switch (t.kind()) {
      case Term::Kind::Var: {
        auto it = env.find(t.name());
        if (it != env.end()) return it->second;
        if (!allow_unknown) throw TypeError("unbound variable " + t.name());
        TypeExpr m = fresh();
        env[t.name()] = m;
        return m;
      }
      case Term::Kind::Con:
      case Term::Kind::Fun: {
        if (!sig_.has_symbol(t.name())) throw TypeError("unknown symbol " + t.name());
        if (t.is_con() != sig_.is_constructor(t.name()))
          throw TypeError("symbol " + t.name() + " used with the wrong kind");
        if (rigid == &t) return sig_.type_of(t.name());
        return instantiate(sig_.type_of(t.name()));
      }
      case Term::Kind::App: {
        TypeExpr tf = shallow(infer(env, t.fn(), allow_unknown, rigid));
        TypeExpr ta = infer(env, t.arg(), allow_unknown);
        if (is_meta(tf)) {
          TypeExpr r = fresh();
          bind(tf.name(), TypeExpr::arrow(ta, r));
          return r;
        }
        if (!tf.is_arrow())
          throw TypeError("ill-typed application " + t.str() + ": " + t.fn().str() + " has type " +
                          resolve(tf).str());
        if (!unify(tf.dom(), ta))
          throw TypeError("ill-typed application " + t.str() + ": expected argument of type " +
                          resolve(tf.dom()).str() + ", got " + resolve(ta).str());
        return tf.cod();
      }
    }
    throw TypeError("unreachable");
  }

 private:
  TypeExpr shallow(const TypeExpr& t) const {
    TypeExpr r = t;
    while (is_meta(r)) {
      auto it = meta_.find(r.name());
      if (it == meta_.end()) break;
      r = it->second;
    }
    return r;
  }

  bool bind(const std::string& m, const TypeExpr& t) {
    if (occurs_meta(m, t)) return false;
    meta_[m] = t;
    return true;
  }

  const Signature& sig_;
  std::map<std::string, TypeExpr> meta_;
  int counter_ = 0;
};

}  // namespace

TypeExpr typecheck(const Signature& sig, const TypeEnv& env, const Term& t) {
  Infer inf(sig);
  TypeEnv e = env;
  return inf.resolve(inf.infer(e, t, false));
}

bool has_type(const Signature& sig, const TypeEnv& env, const Term& t, const TypeExpr& expected) {
  Infer inf(sig);
  TypeEnv e = env;
  return inf.unify(inf.infer(e, t, false), expected);
}

TypeEnv infer_env(const Signature& sig, const TypeEnv& known, const std::vector<Term>& terms, TypeExpr* common,
                  bool rigid_head) {
  Infer inf(sig);
  TypeEnv e = known;
  std::optional<TypeExpr> ty;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Term& t = terms[i];
    const Term* head = nullptr;
    if (rigid_head && i == 0) {
      head = &t;
      while (head->is_app()) head = &head->fn();
    }
    TypeExpr tt = inf.infer(e, t, true, head);
    if (ty && !inf.unify(*ty, tt))
      throw TypeError("sides have different types: " + inf.resolve(*ty).str() + " and " + inf.resolve(tt).str());
    if (!ty) ty = tt;
  }
  std::set<std::string> vars;
  for (const auto& t : terms)
    for (const auto& v : free_vars(t)) vars.insert(v);
  std::map<std::string, TypeExpr> names;
  auto finish = [&](const TypeExpr& t) {
    TypeExpr r = inf.resolve(t);
    for (const auto& v : r.type_vars())
      if (v[0] == '?' && !names.count(v)) names[v] = TypeExpr::var("_t" + std::to_string(names.size()));
    return r.subst(names);
  };
  TypeEnv out;
  for (const auto& v : vars) out[v] = finish(e.at(v));
  if (common && ty) *common = finish(*ty);
  return out;
}

// ---------------------------------------------------------------- equations

std::pair<Term, Term> Equation::canonical() const {
  if (compare(rhs, lhs) < 0) return {rhs, lhs};
  return {lhs, rhs};
}

std::string Equation::str() const { return lhs.str() + " = " + rhs.str(); }

Equation make_equation(const Signature& sig, const Term& l, const Term& r, const TypeEnv& env) {
  typecheck(sig, env, l);
  typecheck(sig, env, r);
  TypeExpr ty;
  infer_env(sig, env, {l, r}, &ty);
  if (ty.is_arrow()) throw TypeError("equations between functions are not supported: " + ty.str());
  return Equation(l, r, env, ty);
}

TypeEnv trim_env(const TypeEnv& env, const Term& l, const Term& r) {
  TypeEnv out;
  auto keep = [&](const Term& t) {
    for (const auto& v : free_vars(t)) {
      auto it = env.find(v);
      if (it != env.end()) out[v] = it->second;
    }
  };
  keep(l);
  keep(r);
  return out;
}

}  // namespace cycleq
