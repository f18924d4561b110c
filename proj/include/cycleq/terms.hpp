#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cycleq {

/// Base class for every error the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TypeError : public Error {
 public:
  using Error::Error;
};

class PositionError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------- types

/// Simple types over datatypes. A `Var` is a type variable: rigid when it
/// occurs in an environment, schematic when it occurs in a symbol signature.
class TypeExpr {
 public:
  enum class Kind { Data, Var, Arrow };

  TypeExpr();  // the unit-like placeholder `?`
  static TypeExpr data(std::string name, std::vector<TypeExpr> args = {});
  static TypeExpr var(std::string name);
  static TypeExpr arrow(TypeExpr dom, TypeExpr cod);
  /// a -> b -> ... -> result
  static TypeExpr arrows(const std::vector<TypeExpr>& doms, TypeExpr result);

  Kind kind() const;
  const std::string& name() const;
  const std::vector<TypeExpr>& args() const;
  const TypeExpr& dom() const;
  const TypeExpr& cod() const;

  bool is_data() const { return kind() == Kind::Data; }
  bool is_var() const { return kind() == Kind::Var; }
  bool is_arrow() const { return kind() == Kind::Arrow; }

  int order() const;
  /// Domains of the arrow spine, in order.
  std::vector<TypeExpr> domains() const;
  /// Final codomain after stripping all arrows.
  TypeExpr result() const;
  std::set<std::string> type_vars() const;
  TypeExpr subst(const std::map<std::string, TypeExpr>& s) const;

  std::string str() const;

  friend bool operator==(const TypeExpr& a, const TypeExpr& b);
  friend bool operator!=(const TypeExpr& a, const TypeExpr& b) { return !(a == b); }
  friend bool operator<(const TypeExpr& a, const TypeExpr& b);

 private:
  struct Node;
  explicit TypeExpr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

struct DataDecl {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> constructors;  // declaration order
};

class Signature {
 public:
  void add_datatype(const DataDecl& d);
  /// `type` must end in a datatype application of `datatype`.
  void add_constructor(const std::string& name, const TypeExpr& type, const std::string& datatype);
  void add_function(const std::string& name, const TypeExpr& type);

  bool has_datatype(const std::string& d) const { return data_.count(d) != 0; }
  const DataDecl& datatype(const std::string& d) const;
  bool is_constructor(const std::string& s) const { return cons_.count(s) != 0; }
  bool is_defined(const std::string& s) const { return defs_.count(s) != 0; }
  bool has_symbol(const std::string& s) const { return is_constructor(s) || is_defined(s); }
  const TypeExpr& type_of(const std::string& s) const;
  /// Datatype a constructor belongs to.
  const std::string& owner(const std::string& con) const;
  int arity(const std::string& s) const { return static_cast<int>(type_of(s).domains().size()); }

  /// Σ_con(d), in declaration order.
  const std::vector<std::string>& constructors_of(const std::string& d) const;
  /// Argument types of constructor `con` when its datatype is instantiated at `at`.
  std::vector<TypeExpr> constructor_args(const std::string& con, const TypeExpr& at) const;

  const std::vector<std::string>& datatype_order() const { return data_order_; }
  const std::vector<std::string>& constructor_order() const { return con_order_; }
  const std::vector<std::string>& function_order() const { return def_order_; }

 private:
  std::map<std::string, DataDecl> data_;
  std::map<std::string, TypeExpr> cons_;
  std::map<std::string, std::string> owner_;
  std::map<std::string, TypeExpr> defs_;
  std::vector<std::string> data_order_, con_order_, def_order_;
};

// ---------------------------------------------------------------- terms

/// Applicative terms: variables, symbols and binary application.
class Term {
 public:
  enum class Kind : std::uint8_t { Var, Con, Fun, App };

  Term();  // the variable `_`
  static Term var(const std::string& name);
  static Term con(const std::string& name);
  static Term fun(const std::string& name);
  static Term app(const Term& f, const Term& a);
  static Term apply(const Term& head, const std::vector<Term>& args);

  Kind kind() const;
  bool is_var() const { return kind() == Kind::Var; }
  bool is_con() const { return kind() == Kind::Con; }
  bool is_fun() const { return kind() == Kind::Fun; }
  bool is_sym() const { return is_con() || is_fun(); }
  bool is_app() const { return kind() == Kind::App; }

  /// Name of a variable or symbol; empty for applications.
  const std::string& name() const;
  const Term& fn() const;
  const Term& arg() const;

  /// Spine decomposition: head and arguments of a left-nested application.
  Term head() const;
  std::vector<Term> args() const;
  std::size_t nargs() const;

  std::size_t size() const;
  std::size_t depth() const;
  std::size_t hash() const;

  std::string str() const;  // debug form; see pretty_term for the surface form

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  /// Total order used for canonical forms.
  friend int compare(const Term& a, const Term& b);
  friend bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  std::shared_ptr<const Node> n_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

// ---------------------------------------------------------------- positions

enum class Step : std::uint8_t { Fn, Arg };
using Position = std::vector<Step>;

std::string position_str(const Position& p);  // "fa.." ; root is ""
Position position_from_str(const std::string& s);

/// All positions of `t` in pre-order (root, function side, argument side).
std::vector<Position> positions(const Term& t);

const Term& subterm_at(const Term& t, const Position& p);
Term replace_at(const Term& t, const Position& p, const Term& s);

/// One-hole context: a base term with a distinguished position.
struct Context {
  Term base;
  Position hole;

  Term fill(const Term& x) const { return replace_at(base, hole, x); }
  Term removed() const { return subterm_at(base, hole); }
  /// (C ∘ D)[X] = C[D[X]]
  Context compose(const Context& d) const;
};

/// Returns E with C = D ∘ E when D ⊑ C, otherwise nothing.
std::optional<Context> context_leq(const Context& d, const Context& c);

// ---------------------------------------------------------------- substitutions

using Substitution = std::map<std::string, Term>;

Term apply_subst(const Term& t, const Substitution& s);
/// compose(θ1, θ0)(x) = θ0(x)θ1
Substitution compose(const Substitution& theta1, const Substitution& theta0);
std::string subst_str(const Substitution& s);

std::optional<Substitution> match(const Term& pattern, const Term& subject);
/// Extends `s` in place; false on conflict (s is then unspecified).
bool match_into(const Term& pattern, const Term& subject, Substitution& s);
std::optional<Substitution> unify(const Term& m, const Term& n);
std::optional<Substitution> unify_all(const std::vector<std::pair<Term, Term>>& eqs);

enum class SubtermRel { Equal, Strict, Unrelated };
SubtermRel is_subterm(const Term& m, const Term& n);

std::set<std::string> free_vars(const Term& t);
/// Free variables in order of first occurrence (left to right).
std::vector<std::string> free_vars_ordered(const Term& t);
bool occurs(const std::string& x, const Term& t);

// ---------------------------------------------------------------- typing

using TypeEnv = std::map<std::string, TypeExpr>;

TypeEnv disjoint_union(const TypeEnv& a, const TypeEnv& b);

TypeExpr typecheck(const Signature& sig, const TypeEnv& env, const Term& t);
/// Can t be given type `expected` (whose variables are rigid)? Throws
/// TypeError when t is ill-typed on its own.
bool has_type(const Signature& sig, const TypeEnv& env, const Term& t, const TypeExpr& expected);

/// Infers types for the variables of `terms` that are missing from `known`,
/// requiring all terms to share one type. Returns the completed environment
/// restricted to the variables that occur, and writes the common type.
/// With `rigid_head`, the head symbol of the first term keeps its declared
/// type instead of a fresh instance (used for rule left-hand sides).
/// Unsolved type variables are named `_t0`, `_t1`, ...
TypeEnv infer_env(const Signature& sig, const TypeEnv& known, const std::vector<Term>& terms,
                  TypeExpr* common = nullptr, bool rigid_head = false);

// ---------------------------------------------------------------- equations

/// Unordered equation between two terms of a datatype.
struct Equation {
  Term lhs, rhs;
  TypeEnv env;
  TypeExpr type;

  Equation() = default;
  Equation(Term l, Term r, TypeEnv e, TypeExpr ty)
      : lhs(std::move(l)), rhs(std::move(r)), env(std::move(e)), type(std::move(ty)) {}

  const Term& side(int i) const { return i == 0 ? lhs : rhs; }
  Equation swapped() const { return Equation(rhs, lhs, env, type); }
  /// Sides ordered by the total term order.
  std::pair<Term, Term> canonical() const;
  bool sides_equal(const Equation& o) const { return canonical() == o.canonical(); }
  std::string str() const;

  friend bool operator==(const Equation& a, const Equation& b) {
    return a.sides_equal(b) && a.env == b.env;
  }
  friend bool operator!=(const Equation& a, const Equation& b) { return !(a == b); }
};

/// Builds an equation, type-checking both sides under `env`; the result type
/// must be a datatype or a type variable.
Equation make_equation(const Signature& sig, const Term& l, const Term& r, const TypeEnv& env);

/// Restricts env to the free variables of the equation's sides.
TypeEnv trim_env(const TypeEnv& env, const Term& l, const Term& r);

}  // namespace cycleq
