#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cycleq/proof.hpp"

namespace cycleq {

/// ≃ (non-increasing) or ≲ (decreasing); Decr is the stronger label.
enum class Label : std::uint8_t { NonIncr = 0, Decr = 1 };

/// Variables are indices into the (ordered) environments of the source and
/// target vertices.
struct Arc {
  std::uint16_t x = 0, y = 0;
  Label label = Label::NonIncr;
  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc& a, const Arc& b) = default;
};

using ArcSet = std::vector<Arc>;  // sorted by (x, y), one arc per pair

struct SizeChangeGraph {
  std::size_t source = 0, target = 0;
  ArcSet arcs;

  /// Adds an arc, keeping the stronger label for an existing pair.
  void add(std::uint16_t x, std::uint16_t y, Label l);
  bool has_decreasing_self_arc() const;
  bool idempotent() const;
  std::string str(const Preproof* pf = nullptr) const;

  friend bool operator==(const SizeChangeGraph&, const SizeChangeGraph&) = default;
  friend auto operator<=>(const SizeChangeGraph& a, const SizeChangeGraph& b) = default;
};

/// Index of variable `x` in `env`, or -1.
int env_index(const TypeEnv& env, const std::string& x);

/// Graph of the edge (v, p_index(v)).
SizeChangeGraph edge_scg(const Preproof& pf, std::size_t v, std::size_t index);
/// Graph of the first edge from v to w. Throws ProofError if there is none.
SizeChangeGraph edge_scg_to(const Preproof& pf, std::size_t v, std::size_t w);

/// G ; G' for G: u -> v and G': v -> w. Throws Error on a vertex mismatch.
SizeChangeGraph compose(const SizeChangeGraph& g, const SizeChangeGraph& h);

class Closure {
 public:
  bool contains(const SizeChangeGraph& g) const;
  std::size_t size() const { return count_; }
  std::vector<SizeChangeGraph> graphs() const;
  const std::map<std::pair<std::size_t, std::size_t>, std::set<ArcSet>>& table() const { return by_pair_; }

  /// Inserts without composing; returns false if already present.
  bool insert(const SizeChangeGraph& g);
  /// Graphs leaving `v`, and graphs entering `v`.
  std::vector<SizeChangeGraph> from(std::size_t v) const;
  std::vector<SizeChangeGraph> into(std::size_t v) const;

  friend bool operator==(const Closure& a, const Closure& b) { return a.by_pair_ == b.by_pair_; }

 private:
  std::map<std::pair<std::size_t, std::size_t>, std::set<ArcSet>> by_pair_;
  std::map<std::size_t, std::set<std::size_t>> sources_of_;  // target -> sources
  std::size_t count_ = 0;
};

/// Adds graphs and restores closure under composition, composing only
/// with pairs that involve a new graph.
void incremental_add(Closure& cl, const std::vector<SizeChangeGraph>& gs);
Closure closure_of(const std::vector<SizeChangeGraph>& gs);
/// Closure of all edge graphs of pf.
Closure closure(const Preproof& pf);
std::vector<SizeChangeGraph> edge_graphs(const Preproof& pf);

struct Soundness {
  bool sound = true;
  std::optional<SizeChangeGraph> witness;  // idempotent self-loop without a decreasing x -> x arc
};
Soundness check_soundness(const Closure& cl);

struct ProofVerdict {
  bool ok = false;
  std::vector<std::string> errors;
  std::optional<SizeChangeGraph> witness;
  std::string str(const Preproof& pf) const;
};
/// Local validation, then the size-change check. Partial proofs are rejected.
ProofVerdict is_proof(const Preproof& pf, const RuleSet& rs, long fuel = kDefaultFuel);

/// JSON array of the closure's graphs with variable names resolved.
std::string closure_json(const Closure& cl, const Preproof& pf);

}  // namespace cycleq
