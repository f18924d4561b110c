#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cycleq/rewrite.hpp"
#include "cycleq/terms.hpp"

namespace cycleq {

class ProofError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------- rule instances

struct Refl {
  friend bool operator==(const Refl&, const Refl&) { return true; }
};

/// Premise sides are reachable from the conclusion sides. With `swapped`
/// the premise lhs pairs with the conclusion rhs.
struct Reduce {
  bool swapped = false;
  friend bool operator==(const Reduce&, const Reduce&) = default;
};

/// Rewrites goal side `side` at `hole` with the lemma. The lemma's variables
/// are renamed by `renaming` and then instantiated by `theta`. Without `flip`
/// the lemma lhs is the side matched in the goal; with it, the lemma rhs.
struct Subst {
  std::size_t lemma = 0;
  bool flip = false;
  int side = 0;
  Position hole;
  std::map<std::string, std::string> renaming;
  Substitution theta;
  friend bool operator==(const Subst&, const Subst&) = default;
};

struct CaseBranch {
  std::string constructor;
  std::vector<std::string> fresh;
  friend bool operator==(const CaseBranch&, const CaseBranch&) = default;
};

struct Case {
  std::string var;
  TypeExpr type;
  std::vector<CaseBranch> branches;  // constructor declaration order
  friend bool operator==(const Case&, const Case&) = default;
};

struct Cong {
  std::string constructor;
  friend bool operator==(const Cong&, const Cong&) = default;
};

using RuleInstance = std::variant<Refl, Reduce, Subst, Case, Cong>;

std::string rule_name(const RuleInstance& r);

// ---------------------------------------------------------------- preproofs

struct Vertex {
  Equation eq;
  std::optional<RuleInstance> rule;  // empty for open goals and hypotheses
  std::vector<std::size_t> premises;
  bool hypothesis = false;

  friend bool operator==(const Vertex& a, const Vertex& b) {
    return a.eq.lhs == b.eq.lhs && a.eq.rhs == b.eq.rhs && a.eq.env == b.eq.env && a.eq.type == b.eq.type &&
           a.rule == b.rule && a.premises == b.premises && a.hypothesis == b.hypothesis;
  }
};

/// A preproof, or a partial proof when some vertices are hypotheses.
struct Preproof {
  std::vector<Vertex> vertices;
  bool ri_translated = false;

  std::size_t size() const { return vertices.size(); }
  std::size_t add(const Equation& eq);
  std::size_t add_hypothesis(const Equation& eq);
  void set_rule(std::size_t v, RuleInstance r, std::vector<std::size_t> premises);
  const Equation& eq(std::size_t v) const { return vertices.at(v).eq; }
  /// Vertices without a rule that are not hypotheses.
  std::vector<std::size_t> open() const;

  friend bool operator==(const Preproof&, const Preproof&) = default;
};

/// Edge (v, p_i(v)) of the underlying graph.
struct ProofEdge {
  std::size_t source, target, index;
};
std::vector<ProofEdge> edges(const Preproof& pf);

/// Throws ProofError when vertex `v` is not a well-formed rule instance.
void validate_instance(const Preproof& pf, std::size_t v, const RuleSet& rs, long fuel = kDefaultFuel);

/// Returns one message per failing vertex; empty means the preproof is valid.
/// Hypotheses are accepted; open vertices are reported.
std::vector<std::string> validate_preproof(const Preproof& pf, const RuleSet& rs, long fuel = kDefaultFuel);

/// Is the ground instance α of eq satisfied? Throws FuelExhausted.
bool satisfies(const RuleSet& rs, const Substitution& alpha, const Equation& eq, long fuel = kDefaultFuel);

/// Preceding instances (premise index, ground substitution) of α at v.
std::vector<std::pair<std::size_t, Substitution>> preceding_instances(const Preproof& pf, std::size_t v,
                                                                      const Substitution& alpha,
                                                                      const RuleSet& rs, long fuel = kDefaultFuel);

/// The lemma side that Subst rewrites away and its replacement, with the
/// renaming applied but not θ.
std::pair<Term, Term> subst_sides(const Preproof& pf, const Subst& s);

// ---------------------------------------------------------------- serialisation

std::string to_dot(const Preproof& pf);
/// `closure` is an optional pre-rendered JSON value embedded verbatim.
std::string to_json(const Preproof& pf, const Signature& sig, const std::string& closure = "");
/// Throws ProofError on malformed input. Constructor names are read from
/// the certificate's "constructors" list.
Preproof from_json(const std::string& text);

}  // namespace cycleq
