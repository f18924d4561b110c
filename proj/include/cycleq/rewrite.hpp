#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cycleq/terms.hpp"

namespace cycleq {

class RuleError : public Error {
 public:
  using Error::Error;
};

/// Raised when a normalisation budget runs out.
class FuelExhausted : public Error {
 public:
  using Error::Error;
};

constexpr long kDefaultFuel = 10000;

struct RewriteRule {
  Term lhs, rhs;
  TypeEnv env;
  int line = 0;  // source line, 0 when built programmatically

  const std::string& head() const;
  std::string str() const { return lhs.str() + " = " + rhs.str(); }
};

/// Throws RuleError describing the first violated condition.
void validate_rule(const Signature& sig, const RewriteRule& r);

class RuleSet {
 public:
  RuleSet() = default;
  /// Validates every rule.
  RuleSet(Signature sig, std::vector<RewriteRule> rules);

  const Signature& sig() const { return sig_; }
  const std::vector<RewriteRule>& rules() const { return rules_; }
  /// Indices of the rules whose head is `f`.
  const std::vector<std::size_t>& rules_for(const std::string& f) const;

 private:
  Signature sig_;
  std::vector<RewriteRule> rules_;
  std::map<std::string, std::vector<std::size_t>> by_head_;
};

/// A single rewrite step: rule `rule` fired at `pos`.
struct Redex {
  Position pos;
  std::size_t rule;
  Term result;
};

/// Contracts the redex at the root of `t`, if any (first matching rule).
std::optional<Term> root_step(const RuleSet& rs, const Term& t, std::size_t* rule = nullptr);

/// One leftmost-outermost step.
std::optional<Term> step(const RuleSet& rs, const Term& t);
std::optional<Redex> step_redex(const RuleSet& rs, const Term& t);

/// All one-step reducts, one per redex position.
std::vector<Redex> all_steps(const RuleSet& rs, const Term& t);

/// Iterates `step`; throws FuelExhausted after `fuel` steps.
Term normalize(const RuleSet& rs, const Term& t, long fuel = kDefaultFuel);

/// Like normalize but reports exhaustion instead of throwing.
struct NormalizeOutcome {
  Term term;
  long steps = 0;
  bool exhausted = false;
};
NormalizeOutcome normalize_bounded(const RuleSet& rs, const Term& t, long fuel = kDefaultFuel);

enum class Reach { Yes, No, FuelExhausted };
/// Is N reachable from M in zero or more steps? Breadth-first over redex
/// choices with at most `fuel` node expansions.
Reach reduces_to(const RuleSet& rs, const Term& m, const Term& n, long fuel = kDefaultFuel);

struct CompletenessReport {
  struct Missing {
    std::string function;
    std::vector<Term> patterns;  // uncovered argument tuple; `_` is a wildcard
  };
  std::vector<Missing> missing;
  std::vector<std::string> no_rules;  // defined symbols with no rules at all
  bool complete() const { return missing.empty() && no_rules.empty(); }
  std::string str() const;
};
CompletenessReport check_completeness(const RuleSet& rs);

struct OrthogonalityReport {
  std::vector<std::string> non_linear;  // rule descriptions
  std::vector<std::pair<std::size_t, std::size_t>> overlaps;
  std::vector<std::string> messages;
  bool orthogonal() const { return non_linear.empty() && overlaps.empty(); }
  std::string str() const;
};
OrthogonalityReport check_orthogonality(const RuleSet& rs);

/// Variable whose instantiation would unblock pattern matching, found by
/// walking leftmost-outermost; ties go to the leftmost argument position.
std::optional<std::string> blocking_variable(const RuleSet& rs, const Term& t);

}  // namespace cycleq
