#include <doctest.h>

#include <algorithm>

#include "support/support.hpp"

using namespace testing;

namespace {

const Program& arith() { return problem("arith.cq"); }
const Program& list() { return problem("list.cq"); }
const Program& syntax() { return problem("syntax.cq"); }

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + needle.size())) ++n;
  return n;
}

bool valid_upto(const RuleSet& rs, const Signature& sig, const Equation& e, int depth) {
  for (const auto& a : ground_instances(sig, e.env, depth))
    if (!satisfies(rs, a, e)) return false;
  return true;
}

}  // namespace

TEST_CASE("Refl instances") {
  Preproof pf;
  TypeExpr list_nat = TypeExpr::data("List", {TypeExpr::data("Nat")});
  pf.add(equation(list(), "Nil = Nil", list_nat));
  pf.set_rule(0, Refl{}, {});
  CHECK(validate_preproof(pf, list().rules).empty());

  Preproof bad;
  bad.add(equation(list(), "forall x:Nat, xs:List Nat. Cons x xs = Nil"));
  bad.set_rule(0, Refl{}, {});
  CHECK_THROWS_AS(validate_instance(bad, 0, list().rules), ProofError);
}

TEST_CASE("the unsound example is a locally valid preproof") {
  Preproof pf = unsound_preproof(list());
  CHECK(validate_preproof(pf, list().rules).empty());
  CHECK(edges(pf).size() == 2);
}

TEST_CASE("the commutativity transcription validates") {
  Preproof pf = commutativity_preproof(arith());
  CHECK(pf.size() == 16);
  auto errs = validate_preproof(pf, arith().rules);
  if (!errs.empty()) MESSAGE(errs.front());
  CHECK(errs.empty());
  CHECK(pf.open().empty());
}

TEST_CASE("the mapE transcription validates") {
  Preproof pf = mapE_preproof(syntax());
  auto errs = validate_preproof(pf, syntax().rules);
  if (!errs.empty()) MESSAGE(errs.front());
  CHECK(errs.empty());
}

TEST_CASE("corrupted certificates are rejected") {
  Preproof pf = commutativity_preproof(arith());
  SUBCASE("premise out of range") {
    pf.vertices[1].premises[0] = 99;
    CHECK_FALSE(validate_preproof(pf, arith().rules).empty());
  }
  SUBCASE("premise pointing at the wrong vertex") {
    pf.vertices[2].premises[0] = 10;
    CHECK_FALSE(validate_preproof(pf, arith().rules).empty());
  }
  SUBCASE("Case premises swapped") {
    std::swap(pf.vertices[0].premises[0], pf.vertices[0].premises[1]);
    CHECK_FALSE(validate_preproof(pf, arith().rules).empty());
  }
  SUBCASE("wrong Subst position") {
    std::get<Subst>(*pf.vertices[9].rule).hole = {};
    CHECK_FALSE(validate_preproof(pf, arith().rules).empty());
  }
  SUBCASE("Subst theta omits a lemma variable") {
    auto& s = std::get<Subst>(*pf.vertices[9].rule);
    s.theta.erase(s.theta.begin());
    CHECK_FALSE(validate_preproof(pf, arith().rules).empty());
  }
  SUBCASE("open vertex") {
    pf.vertices[15].rule.reset();
    CHECK_FALSE(validate_preproof(pf, arith().rules).empty());
  }
}

TEST_CASE("empty preproof is valid") { CHECK(validate_preproof(Preproof{}, arith().rules).empty()); }

TEST_CASE("hypotheses are accepted but never expanded") {
  Preproof pf;
  pf.add(equation(arith(), "forall x:Nat. add Z x = x"));
  pf.add_hypothesis(equation(arith(), "forall x:Nat. x = x"));
  pf.set_rule(0, Reduce{}, {1});
  CHECK(validate_preproof(pf, arith().rules).empty());
  CHECK(pf.open().empty());
}

TEST_CASE("Cong instances") {
  Preproof pf;
  pf.add(equation(arith(), "forall x:Nat, y:Nat. S x = S y"));
  pf.add(equation(arith(), "forall x:Nat, y:Nat. x = y"));
  pf.set_rule(0, Cong{"S"}, {1});
  CHECK_NOTHROW(validate_instance(pf, 0, arith().rules));
  pf.set_rule(0, Cong{"Z"}, {1});
  CHECK_THROWS_AS(validate_instance(pf, 0, arith().rules), ProofError);
}

TEST_CASE("satisfies examples") {
  Term z = term(arith(), "Z"), one = term(arith(), "S Z");
  Equation comm = equation(arith(), "forall x:Nat, y:Nat. add x y = add y x");
  CHECK(satisfies(arith().rules, {{"x", z}, {"y", one}}, comm));
  Equation bad = equation(list(), "forall x:Nat, xs:List Nat. Cons x xs = Nil");
  CHECK_FALSE(satisfies(list().rules, {{"x", term(list(), "Zero")}, {"xs", term(list(), "Nil")}}, bad));
  Equation refl = equation(arith(), "forall x:Nat. add x x = add x x");
  Rng r(41);
  for (int i = 0; i < 20; ++i) CHECK(satisfies(arith().rules, {{"x", random_ground_nat(r, 5)}}, refl));
}

TEST_CASE("preceding_instances examples") {
  Preproof pf = commutativity_preproof(arith());
  const RuleSet& rs = arith().rules;
  Term z = term(arith(), "Z"), one = term(arith(), "S Z");
  // Case on x with α(x) = S Z selects the S branch, x' = Z
  auto c = preceding_instances(pf, 0, {{"x", one}, {"y", z}}, rs);
  REQUIRE(c.size() == 1);
  CHECK(c[0].first == 1);
  CHECK(c[0].second.at("x'") == z);
  CHECK(c[0].second.at("y") == z);
  // Case argument that is not yet a constructor gets normalised first
  auto c2 = preceding_instances(pf, 0, {{"x", term(arith(), "add Z Z")}, {"y", z}}, rs);
  REQUIRE(c2.size() == 1);
  CHECK(c2[0].first == 0);
  // Subst: lemma instance through θ = {x ↦ x', y ↦ y}, continuation keeps α
  auto s = preceding_instances(pf, 9, {{"x'", z}, {"y", one}}, rs);
  REQUIRE(s.size() == 2);
  CHECK(s[0].first == 0);
  CHECK(s[0].second == Substitution{{"x", z}, {"y", one}});
  CHECK(s[1].first == 1);
  CHECK(s[1].second == Substitution{{"x'", z}, {"y", one}});
  // Reduce: the unique premise
  Substitution a{{"y", one}};
  auto red = preceding_instances(pf, 1, a, rs);
  REQUIRE(red.size() == 1);
  CHECK(red[0] == std::make_pair(std::size_t{0}, a));
}

TEST_CASE("local soundness on the transcriptions") {
  std::size_t checked = 0;
  CHECK(local_soundness_violations(commutativity_preproof(arith()), arith().rules, 3, &checked).empty());
  CHECK(checked > 0);
  CHECK(local_soundness_violations(mapE_preproof(syntax()), syntax().rules, 3).empty());
  // local soundness holds even though the example is globally unsound
  CHECK(local_soundness_violations(unsound_preproof(list()), list().rules, 3).empty());
}

TEST_CASE("valid premises give a valid conclusion") {
  // random Case and Reduce vertices over add; whenever every premise holds
  // on all small instances, so does the conclusion
  Rng r(42);
  const RuleSet& rs = arith().rules;
  const Signature& sig = arith().sig;
  TypeExpr nat = TypeExpr::data("Nat");
  int exercised = 0;
  for (int i = 0; i < 300; ++i) {
    Term l = random_nat_term(r, {"x", "y"}, 3), rt = random_nat_term(r, {"x", "y"}, 3);
    TypeEnv env{{"x", nat}, {"y", nat}};
    Equation e = make_equation(sig, l, rt, env);
    ProofState s = initial_state(e);
    std::vector<std::size_t> premises;
    if (r.coin()) {
      s = apply_case(s, rs, 0, r.coin() ? "x" : "y");
      premises = s.pf.vertices[0].premises;
    } else {
      Equation n = make_equation(sig, normalize(rs, l), normalize(rs, rt), env);
      std::size_t w = s.pf.add(n);
      s.pf.set_rule(0, Reduce{}, {w});
      premises = {w};
    }
    REQUIRE_NOTHROW(validate_instance(s.pf, 0, rs));
    bool all = std::all_of(premises.begin(), premises.end(),
                           [&](std::size_t w) { return valid_upto(rs, sig, s.pf.eq(w), 3); });
    if (!all) continue;
    ++exercised;
    CHECK(valid_upto(rs, sig, e, 3));
  }
  CHECK(exercised > 10);
}

TEST_CASE("DOT output of the unsound example") {
  std::string dot = to_dot(unsound_preproof(list()));
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(count(dot, "->") == 2);
  CHECK(count(dot, "label=") >= 2);
  CHECK(count(dot, "style=dashed") == 1);  // the lemma back-edge
  CHECK(dot.find("Cons x xs ≐ Nil") != std::string::npos);
}

TEST_CASE("JSON round-trips") {
  for (auto [pf, sig] : {std::make_pair(commutativity_preproof(arith()), &arith().sig),
                         std::make_pair(mapE_preproof(syntax()), &syntax().sig),
                         std::make_pair(unsound_preproof(list()), &list().sig)}) {
    Preproof back = from_json(to_json(pf, *sig));
    CHECK(back == pf);
    CHECK(to_json(back, *sig) == to_json(pf, *sig));
  }
  Rng r(43);
  for (int i = 0; i < 300; ++i) {
    Preproof pf = random_shape(r, 8, 4);
    CHECK(from_json(to_json(pf, arith().sig)) == pf);
  }
}

TEST_CASE("malformed JSON is rejected") {
  CHECK_THROWS_AS(from_json("{"), ProofError);
  CHECK_THROWS_AS(from_json("[]"), ProofError);
  CHECK_THROWS_AS(from_json(R"({"constructors":[],"vertices":[{"rule":"bogus"}]})"), ProofError);
}
