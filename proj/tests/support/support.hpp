#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <random>
#include <string>
#include <vector>

#include "cycleq/cli.hpp"
#include "cycleq/parser.hpp"
#include "cycleq/proof.hpp"
#include "cycleq/ri.hpp"
#include "cycleq/scg.hpp"
#include "cycleq/search.hpp"

namespace testing {

using namespace cycleq;

std::string problem_path(const std::string& file);
/// Parses problems/<file>; cached per process.
const Program& problem(const std::string& file);

Equation equation(const Program& p, const std::string& text);
/// Same, with the equation type fixed (for sides whose type is ambiguous).
Equation equation(const Program& p, const std::string& text, const TypeExpr& type);
Term term(const Program& p, const std::string& text);

// ------------------------------------------------------------ fixtures

/// Two vertices: Cons x xs = Nil rewritten by itself, continuation Nil = Nil.
Preproof unsound_preproof(const Program& list);
/// Hand transcription of the 16-vertex commutativity proof (Reduce vertices
/// made explicit).
Preproof commutativity_preproof(const Program& arith);
/// Hand transcription of the mapE/mapT proof.
Preproof mapE_preproof(const Program& syntax);

// ------------------------------------------------------------ generators

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[below(static_cast<int>(v.size()))]; }
};

/// Random well-typed Nat term over Zero/Succ/add and the given variables.
Term random_nat_term(Rng& r, const std::vector<std::string>& vars, int depth);
/// Random term over symbols of arity ≤ 2 (not necessarily well typed).
Term random_raw_term(Rng& r, int depth);
/// Random Nat constructor term of depth ≤ depth.
Term random_ground_nat(Rng& r, int depth);

/// Random preproof shape for size-change tests: n ≤ max_vertices vertices,
/// environments over ≤ max_vars Nat variables, rules drawn from
/// Reduce / Subst / Case / Cong / Refl. Not locally valid; only the rule data
/// the graphs depend on is meaningful.
Preproof random_shape(Rng& r, int max_vertices, int max_vars);

/// Random size-change graph between two of `n` vertices over `vars` variables.
SizeChangeGraph random_graph(Rng& r, std::size_t n, int vars);

// ------------------------------------------------------------ oracles

/// Fixpoint of pairwise composition, recomputed from scratch each round.
std::set<SizeChangeGraph> batch_closure(const std::vector<SizeChangeGraph>& gs);

/// Simple cycles of the underlying graph as edge sequences, each starting
/// at its least vertex. Parallel edges give distinct cycles.
std::vector<std::vector<ProofEdge>> simple_cycles(const Preproof& pf);

/// Brute force over variable sequences: does the cycle (repeated forever)
/// carry a trace with infinitely many progress points? Trace steps are read
/// directly off the rule data: identity on surviving variables, the Subst
/// lemma step T' with θ(ρ(T')) = T, and the Case step from the scrutinee to
/// its fresh variables (the only progress).
bool cycle_has_progressing_trace(const Preproof& pf, const std::vector<ProofEdge>& cycle);

/// All Nat/Bool/List/... constructor terms of the given type with
/// constructor depth ≤ depth. Type variables are populated by the opaque
/// atoms `a0`, `a1` (represented as variables).
std::vector<Term> ground_terms(const Signature& sig, const TypeExpr& ty, int depth);

/// Every ground substitution for env with values of depth ≤ depth.
std::vector<Substitution> ground_instances(const Signature& sig, const TypeEnv& env, int depth,
                                           std::size_t cap = 20000);

/// Vertices v and instances α with e(v) unsatisfied but no unsatisfied
/// preceding instance. Empty means local soundness held everywhere.
struct LocalViolation {
  std::size_t vertex;
  Substitution alpha;
};
std::vector<LocalViolation> local_soundness_violations(const Preproof& pf, const RuleSet& rs, int depth,
                                                       std::size_t* checked = nullptr);

/// Distinct (source, lemma) Subst lemma edges whose source is reachable from
/// `root` without crossing a lemma edge.
std::size_t lemma_edges_below(const Preproof& pf, std::size_t root);

/// First Case vertex whose equation mentions `symbol` as the head of a side.
std::optional<std::size_t> case_vertex_on(const Preproof& pf, const std::string& symbol);

}  // namespace testing
