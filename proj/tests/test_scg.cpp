#include <doctest.h>

#include <cmath>

#include "support/support.hpp"

using namespace testing;

namespace {

const Program& arith() { return problem("arith.cq"); }
const Program& list() { return problem("list.cq"); }
const Program& syntax() { return problem("syntax.cq"); }

struct NamedArc {
  std::string x, y;
  Label l;
};

SizeChangeGraph named(const Preproof& pf, std::size_t s, std::size_t t, const std::vector<NamedArc>& arcs) {
  SizeChangeGraph g;
  g.source = s;
  g.target = t;
  for (const auto& a : arcs) {
    int i = env_index(pf.eq(s).env, a.x), j = env_index(pf.eq(t).env, a.y);
    REQUIRE(i >= 0);
    REQUIRE(j >= 0);
    g.add(static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j), a.l);
  }
  return g;
}

SizeChangeGraph graph(std::size_t s, std::size_t t, const std::vector<Arc>& arcs) {
  SizeChangeGraph g;
  g.source = s;
  g.target = t;
  for (const auto& a : arcs) g.add(a.x, a.y, a.label);
  return g;
}

SizeChangeGraph identity(std::size_t v, int vars) {
  SizeChangeGraph g;
  g.source = g.target = v;
  for (int i = 0; i < vars; ++i) g.add(static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(i), Label::NonIncr);
  return g;
}

// composition straight from the definition, over all arc pairs
SizeChangeGraph compose_oracle(const SizeChangeGraph& g, const SizeChangeGraph& h) {
  SizeChangeGraph out;
  out.source = g.source;
  out.target = h.target;
  for (const auto& a : g.arcs)
    for (const auto& b : h.arcs)
      if (a.y == b.x) out.add(a.x, b.y, (a.label == Label::Decr || b.label == Label::Decr) ? Label::Decr : Label::NonIncr);
  return out;
}

constexpr Label D = Label::Decr, N = Label::NonIncr;

}  // namespace

TEST_CASE("edge graphs of the commutativity proof") {
  Preproof pf = commutativity_preproof(arith());
  // Case on x, S branch
  CHECK(edge_scg(pf, 0, 1) == named(pf, 0, 2, {{"x", "x'", D}, {"y", "y", N}}));
  // Z branch: x leaves scope and there are no fresh variables
  CHECK(edge_scg(pf, 0, 0) == named(pf, 0, 1, {{"y", "y", N}}));
  // back-edge to vertex 0 with θ = {x ↦ x', y ↦ y}
  CHECK(edge_scg(pf, 9, 0) == named(pf, 9, 0, {{"x'", "x", N}, {"y", "y", N}}));
  // Subst continuation: identity
  CHECK(edge_scg(pf, 9, 1) == named(pf, 9, 10, {{"x'", "x'", N}, {"y", "y", N}}));
  // Reduce with env {y}
  CHECK(edge_scg(pf, 1, 0) == named(pf, 1, 3, {{"y", "y", N}}));
  CHECK(edge_scg_to(pf, 9, 0) == edge_scg(pf, 9, 0));
  CHECK_THROWS(edge_scg_to(pf, 0, 9));
}

TEST_CASE("lemma edges need variable images") {
  // θ maps the lemma variable to a non-variable: no arc for it
  Preproof pf;
  pf.add(equation(arith(), "forall x:Nat. add x Z = x"));
  pf.add(equation(arith(), "forall y:Nat. add (S y) Z = S y"));
  pf.add(equation(arith(), "forall y:Nat. S y = S y"));
  Subst s;
  s.lemma = 0;
  s.renaming = {{"x", "x@0"}};
  s.theta = {{"x@0", term(arith(), "S y")}};
  pf.set_rule(1, s, {0, 2});
  pf.set_rule(2, Refl{}, {});
  CHECK(edge_scg(pf, 1, 0).arcs.empty());
}

TEST_CASE("composition examples") {
  CHECK(compose(graph(0, 1, {{0, 0, N}}), graph(1, 2, {{0, 1, D}})) == graph(0, 2, {{0, 1, D}}));
  CHECK(compose(graph(0, 1, {{0, 0, N}}), graph(1, 2, {{1, 1, N}})) == graph(0, 2, {}));
  SizeChangeGraph g = graph(0, 0, {{0, 1, D}, {1, 0, N}});
  CHECK(compose(identity(0, 2), g) == g);
  CHECK(compose(g, identity(0, 2)) == g);
  CHECK_THROWS_AS(compose(graph(0, 1, {}), graph(2, 3, {})), Error);
}

TEST_CASE("stronger label wins per pair") {
  SizeChangeGraph g;
  g.add(0, 0, N);
  g.add(0, 0, D);
  g.add(0, 0, N);
  REQUIRE(g.arcs.size() == 1);
  CHECK(g.arcs[0].label == D);
}

TEST_CASE("composition matches the definition and is associative") {
  Rng r(51);
  for (int i = 0; i < 2000; ++i) {
    SizeChangeGraph a = random_graph(r, 4, 3), b = random_graph(r, 4, 3), c = random_graph(r, 4, 3);
    b.source = a.target;
    c.source = b.target;
    CHECK(compose(a, b) == compose_oracle(a, b));
    CHECK(compose(compose(a, b), c) == compose(a, compose(b, c)));
  }
}

TEST_CASE("closure of the unsound example") {
  Preproof pf = unsound_preproof(list());
  Closure cl = closure(pf);
  SizeChangeGraph loop = named(pf, 0, 0, {{"x", "x", N}, {"xs", "xs", N}});
  CHECK(cl.contains(loop));
  CHECK(loop.idempotent());
  CHECK_FALSE(loop.has_decreasing_self_arc());
  Soundness s = check_soundness(cl);
  CHECK_FALSE(s.sound);
  REQUIRE(s.witness);
  CHECK(*s.witness == loop);
  ProofVerdict v = is_proof(pf, list().rules);
  CHECK_FALSE(v.ok);
  CHECK(v.errors.empty());
  CHECK(v.witness);
  CHECK(v.str(pf).find("0") != std::string::npos);
}

TEST_CASE("acyclic preproofs have no self-graphs") {
  Preproof pf;
  pf.add(equation(arith(), "forall x:Nat. add Z x = x"));
  pf.add(equation(arith(), "forall x:Nat. x = x"));
  pf.set_rule(0, Reduce{}, {1});
  pf.set_rule(1, Refl{}, {});
  Closure cl = closure(pf);
  for (const auto& g : cl.graphs()) CHECK(g.source != g.target);
  CHECK(check_soundness(cl).sound);
  CHECK(is_proof(pf, arith().rules).ok);
}

TEST_CASE("the commutativity proof passes the global check") {
  Preproof pf = commutativity_preproof(arith());
  Closure cl = closure(pf);
  int loops = 0;
  for (const auto& g : cl.graphs()) {
    if (g.source != g.target || compose(g, g) != g) continue;
    ++loops;
    CHECK(g.has_decreasing_self_arc());
  }
  CHECK(loops >= 3);  // one per cyclic component at least
  CHECK(check_soundness(cl).sound);
  ProofVerdict v = is_proof(pf, arith().rules);
  CHECK(v.ok);
}

TEST_CASE("the mapE/mapT proof is accepted") {
  Preproof pf = mapE_preproof(syntax());
  ProofVerdict v = is_proof(pf, syntax().rules);
  if (!v.ok) MESSAGE(v.str(pf));
  CHECK(v.ok);
}

TEST_CASE("partial proofs are not proofs") {
  Preproof pf;
  pf.add(equation(arith(), "forall x:Nat. add Z x = x"));
  pf.add_hypothesis(equation(arith(), "forall x:Nat. x = x"));
  pf.set_rule(0, Reduce{}, {1});
  CHECK_FALSE(is_proof(pf, arith().rules).ok);
}

TEST_CASE("empty closure is sound") { CHECK(check_soundness(Closure{}).sound); }

TEST_CASE("incremental closure examples") {
  Closure cl;
  SizeChangeGraph g = graph(0, 1, {{0, 0, D}});
  incremental_add(cl, {g});
  CHECK(cl.size() == 1);
  CHECK(cl.contains(g));
  SizeChangeGraph h = graph(2, 3, {{0, 0, N}});
  incremental_add(cl, {h});
  CHECK(cl.size() == 2);
  CHECK(cl == closure_of({g, h}));
  // closing a loop composes with existing graphs
  incremental_add(cl, {graph(1, 0, {{0, 0, N}})});
  CHECK(cl.contains(graph(0, 0, {{0, 0, D}})));
}

TEST_CASE("incremental closure equals batch closure") {
  Rng r(52);
  for (int i = 0; i < 300; ++i) {
    std::vector<SizeChangeGraph> gs;
    int n = 1 + r.below(6);
    for (int k = 0; k < n; ++k) gs.push_back(random_graph(r, 4, 3));
    Closure inc;
    std::size_t cut = static_cast<std::size_t>(r.below(n + 1));
    incremental_add(inc, {gs.begin(), gs.begin() + static_cast<long>(cut)});
    incremental_add(inc, {gs.begin() + static_cast<long>(cut), gs.end()});
    auto graphs = inc.graphs();
    CHECK(std::set<SizeChangeGraph>(graphs.begin(), graphs.end()) == batch_closure(gs));
  }
}

TEST_CASE("closure is finite and bounded by the graph universe") {
  Rng r(53);
  for (int i = 0; i < 200; ++i) {
    Preproof pf = random_shape(r, 8, 4);
    Closure cl = closure(pf);
    double bound = 0;
    for (const auto& [pair, sets] : cl.table()) {
      double k = static_cast<double>(pf.eq(pair.first).env.size() * pf.eq(pair.second).env.size());
      bound += std::pow(3.0, k);
      CHECK(sets.size() <= std::pow(3.0, k));
    }
    CHECK(static_cast<double>(cl.size()) <= bound);
  }
}

TEST_CASE("accepted random preproofs have progressing traces on every simple cycle") {
  Rng r(54);
  int accepted = 0, cyclic = 0;
  for (int i = 0; i < 600; ++i) {
    Preproof pf = random_shape(r, 8, 4);
    if (!check_soundness(closure(pf)).sound) continue;
    ++accepted;
    auto cycles = simple_cycles(pf);
    if (!cycles.empty()) ++cyclic;
    for (const auto& c : cycles) CHECK(cycle_has_progressing_trace(pf, c));
  }
  CHECK(accepted > 50);
  CHECK(cyclic > 10);
}

TEST_CASE("closure JSON names variables") {
  Preproof pf = unsound_preproof(list());
  std::string j = closure_json(closure(pf), pf);
  CHECK(j.find("\"xs\"") != std::string::npos);
}
