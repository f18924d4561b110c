#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cycleq/parser.hpp"
#include "cycleq/proof.hpp"
#include "cycleq/scg.hpp"

namespace cycleq {

/// Raised when the program fails the completeness or orthogonality checks.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

struct SearchConfig {
  int depth = 16;
  long timeout_ms = 10000;
  long fuel = kDefaultFuel;
  std::size_t max_subst = 32;  // Subst candidates per goal
  bool cong = true;
  bool lemma_filter = true;  // only Case vertices are lemmas
  bool fail_on_fuel = true;  // otherwise the goal is left unreduced
  bool variable_lemma_sides = false;  // allow matching a bare-variable lemma side
  std::size_t max_states = 2000000;

  /// Throws Error on non-positive bounds.
  void validate() const;
};

struct ProofState {
  Preproof pf;
  std::vector<int> depth;             // per vertex
  std::vector<bool> from_root;        // reached without a Subst continuation
  Closure closure;
};

struct SubstCandidate {
  std::size_t lemma = 0;
  int side = 0;
  Position hole;
  bool flip = false;
  std::map<std::string, std::string> renaming;
  Substitution theta;
  Equation continuation;
};

enum class Verdict { Proved, DepthExhausted, Timeout, Refuted, Unorientable };
std::string verdict_str(Verdict v);

struct SearchResult {
  Verdict verdict = Verdict::DepthExhausted;
  std::optional<Preproof> proof;
  double total_ms = 0, edge_ms = 0;
  std::size_t states = 0;
  std::string message;
};

/// Timing sink for the size-change calls, in integer nanoseconds so the sum
/// of nested intervals never exceeds the enclosing one.
struct EdgeTimer {
  std::int64_t ns = 0;
  double ms() const { return static_cast<double>(ns) / 1e6; }
};

ProofState initial_state(const Equation& goal);

/// Closed vertices usable as lemmas.
std::vector<std::size_t> eligible_lemmas(const ProofState& s, const SearchConfig& cfg = {});

/// Ways of rewriting goal `v` with lemma `lemma`, ordered by continuation
/// size, then side and position. Duplicated continuations are dropped.
std::vector<SubstCandidate> subst_candidates(const ProofState& s, const RuleSet& rs, std::size_t v,
                                             std::size_t lemma, const SearchConfig& cfg = {});

/// Case on x at v with fresh variables per constructor. Throws Error when x
/// is not of a datatype with constructors.
ProofState apply_case(const ProofState& s, const RuleSet& rs, std::size_t v, const std::string& x,
                      EdgeTimer* timer = nullptr);

/// Adds the Subst instance and its graphs; nothing if the closure becomes unsound.
std::optional<ProofState> try_close_cycle(const ProofState& s, std::size_t v, const SubstCandidate& c,
                                          EdgeTimer* timer = nullptr);

/// Alternatives for undecided goal v: Subst candidates over all eligible
/// lemmas, then Case on the blocking variable.
std::vector<ProofState> expand_goal(const ProofState& s, const RuleSet& rs, std::size_t v,
                                    const SearchConfig& cfg, EdgeTimer* timer = nullptr);

SearchResult prove(const Program& prog, const Equation& goal, const SearchConfig& cfg = {});

}  // namespace cycleq
