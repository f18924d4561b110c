#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cycleq/rewrite.hpp"
#include "cycleq/terms.hpp"

namespace cycleq {

struct Diagnostic {
  int line = 0, col = 0;
  std::string message;
  std::string str() const;
};

class ParseError : public Error {
 public:
  explicit ParseError(std::vector<Diagnostic> d);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

struct Goal {
  std::string name;
  Equation eq;
  int line = 0;
};

struct Program {
  Signature sig;
  RuleSet rules;
  std::vector<Goal> goals;
  CompletenessReport completeness;
  OrthogonalityReport orthogonality;

  bool assumptions_ok() const { return completeness.complete() && orthogonality.orthogonal(); }
  /// Throws Error when there is no goal with that name.
  const Goal& goal(const std::string& name) const;
};

/// Parses and elaborates a whole program. Throws ParseError.
Program parse_program(const std::string& text);
Program parse_file(const std::string& path);

/// Parses a term against `sig`. Lower-case identifiers that are not defined
/// functions become variables.
Term parse_term(const Signature& sig, const std::string& text);

/// Parses "forall x:T, ... . M = N" (the part after "goal name :").
Equation parse_equation(const Signature& sig, const std::string& text);

/// Surface syntax; parse_term(pretty_term(t)) == t.
std::string pretty_term(const Term& t);
std::string pretty_type(const TypeExpr& t);
/// "M ≐ N"
std::string pretty_equation(const Equation& e);
/// "forall x:T, y:U. M = N"
std::string pretty_goal(const Equation& e);

}  // namespace cycleq
