#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cycleq/parser.hpp"
#include "cycleq/proof.hpp"

namespace cycleq {

/// Total order on symbols; earlier entries are greater.
class Precedence {
 public:
  Precedence() = default;
  explicit Precedence(std::vector<std::string> order);
  bool has(const std::string& f) const { return rank_.count(f) != 0; }
  /// Throws Error when either symbol is missing.
  bool greater(const std::string& f, const std::string& g) const;
  const std::vector<std::string>& order() const { return order_; }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::size_t> rank_;
};

/// Defined functions in declaration order, then constructors.
Precedence default_precedence(const Signature& sig);
/// `front` first, then the remaining symbols in default order. Throws Error
/// on unknown or repeated symbols.
Precedence make_precedence(const Signature& sig, const std::vector<std::string>& front);

/// Lexicographic path order on flattened spines. A variable-headed
/// application `f t..` is below s when f occurs in s and s is above every t;
/// stability is only claimed for substitutions of base-type variables.
bool lpo_greater(const Precedence& prec, const Term& m, const Term& n);
/// N (< ∪ ⊲)⁺ M, i.e. M is above N in the decreasing order.
bool decreasing_greater(const Precedence& prec, const Term& m, const Term& n);

struct OrientedEq {
  Term lhs, rhs;
  TypeEnv env;
  TypeExpr type;
  std::string str() const { return lhs.str() + " = " + rhs.str(); }
};

struct ExpandResult {
  OrientedEq eq;
  std::size_t rule = 0;
  Substitution mgu;  // restricted to the expanded equation's variables
};

/// Expand at `hole` of eq.lhs. Throws Error when the subterm is not a fully
/// applied defined function over constructor terms, or when rhs is not below
/// lhs in `prec`.
std::vector<ExpandResult> expand_set(const RuleSet& rs, const OrientedEq& eq, const Position& hole,
                                     const Precedence& prec);

struct RIState {
  std::vector<std::size_t> E;  // equation ids
  std::vector<std::size_t> H;  // ids of equations turned into hypothesis rules
};

struct RIStep {
  enum class Kind { Delete, Simplify, Expand, End };
  Kind kind = Kind::End;
  std::size_t eq = 0;
  // Simplify
  bool by_hyp = false;
  std::size_t hyp = 0;  // equation id of the hypothesis used
  int side = 0;
  Position pos;
  Substitution sigma;
  std::size_t result = 0;
  // Expand
  std::vector<std::size_t> results;
  std::vector<std::size_t> rules;
  std::vector<Substitution> mgus;
  RIState after;
};

struct RIDerivation {
  std::vector<OrientedEq> eqs;  // by id, as stated when created
  std::vector<bool> flipped;    // orientation reversed relative to eqs[id]
  std::vector<std::size_t> goals;
  std::vector<RIStep> steps;

  /// Oriented form: lhs is the greater side.
  OrientedEq oriented(std::size_t id) const;
};

struct RILimits {
  std::size_t max_steps = 2000;
  std::size_t max_equations = 2000;
  long fuel = kDefaultFuel;
  long timeout_ms = 10000;
};

enum class RIVerdict { Proved, Unorientable, Stuck, LimitExceeded };
std::string ri_verdict_str(RIVerdict v);

struct RIResult {
  RIVerdict verdict = RIVerdict::Stuck;
  RIDerivation derivation;
  std::string message;
};

/// Orients each goal, then repeats Delete / Simplify (R, then H) / Expand on
/// the oldest open equation until none remain.
RIResult ri_prove(const Program& prog, const std::vector<Equation>& goals, const Precedence& prec,
                  const RILimits& limits = {});

/// Partial proof with one vertex per equation id (vertex i is equation i)
/// followed by the internal vertices of the Expand trees. Throws Error on a
/// malformed derivation.
Preproof translate(const RuleSet& rs, const RIDerivation& d, long fuel = kDefaultFuel);

}  // namespace cycleq
