#include "support.hpp"

#include <functional>
#include <map>

namespace testing {

std::string problem_path(const std::string& file) { return std::string(CYCLEQ_PROBLEMS_DIR) + "/" + file; }

const Program& problem(const std::string& file) {
  static std::map<std::string, Program> cache;
  auto it = cache.find(file);
  if (it == cache.end()) it = cache.emplace(file, parse_file(problem_path(file))).first;
  return it->second;
}

Equation equation(const Program& p, const std::string& text) { return parse_equation(p.sig, text); }

Equation equation(const Program& p, const std::string& text, const TypeExpr& type) {
  Equation e = parse_equation(p.sig, text);
  e.type = type;
  return e;
}
Term term(const Program& p, const std::string& text) { return parse_term(p.sig, text); }

// ------------------------------------------------------------ fixtures

namespace {

Position arg1() { return {Step::Arg}; }

Subst lemma_subst(const Preproof& pf, std::size_t lemma, bool flip, int side, Position hole,
                  const std::map<std::string, std::string>& theta) {
  Subst s;
  s.lemma = lemma;
  s.flip = flip;
  s.side = side;
  s.hole = std::move(hole);
  for (const auto& [x, ty] : pf.eq(lemma).env) {
    std::string y = x + "@" + std::to_string(lemma);
    s.renaming[x] = y;
    s.theta[y] = Term::var(theta.at(x));
  }
  return s;
}

}  // namespace

Preproof unsound_preproof(const Program& list) {
  Preproof pf;
  TypeExpr list_nat = TypeExpr::data("List", {TypeExpr::data("Nat")});
  pf.add(equation(list, "forall x:Nat, xs:List Nat. Cons x xs = Nil"));
  pf.add(equation(list, "Nil = Nil", list_nat));
  pf.set_rule(0, lemma_subst(pf, 0, false, 0, {}, {{"x", "x"}, {"xs", "xs"}}), {0, 1});
  pf.set_rule(1, Refl{}, {});
  return pf;
}

Preproof commutativity_preproof(const Program& p) {
  Preproof pf;
  auto add = [&](const std::string& s) { return pf.add(equation(p, s)); };
  add("forall x:Nat, y:Nat. add x y = add y x");             // 0
  add("forall y:Nat. add Z y = add y Z");                     // 1
  add("forall x':Nat, y:Nat. add (S x') y = add y (S x')");   // 2
  add("forall y:Nat. y = add y Z");                           // 3
  add("forall . Z = add Z Z");                                // 4
  add("forall y':Nat. S y' = add (S y') Z");                  // 5
  add("forall . Z = Z");                                      // 6
  add("forall y':Nat. S y' = S (add y' Z)");                  // 7
  add("forall y':Nat. S y' = S y'");                          // 8
  add("forall x':Nat, y:Nat. S (add x' y) = add y (S x')");   // 9
  add("forall x':Nat, y:Nat. S (add y x') = add y (S x')");   // 10
  add("forall x':Nat. S (add Z x') = add Z (S x')");          // 11
  add("forall x':Nat, y':Nat. S (add (S y') x') = add (S y') (S x')");  // 12
  add("forall x':Nat. S x' = S x'");                          // 13
  add("forall x':Nat, y':Nat. S (S (add y' x')) = S (add y' (S x'))");  // 14
  add("forall x':Nat, y':Nat. S (add y' (S x')) = S (add y' (S x'))");  // 15
  TypeExpr nat = TypeExpr::data("Nat");
  pf.set_rule(0, Case{"x", nat, {{"Z", {}}, {"S", {"x'"}}}}, {1, 2});
  pf.set_rule(1, Reduce{}, {3});
  pf.set_rule(3, Case{"y", nat, {{"Z", {}}, {"S", {"y'"}}}}, {4, 5});
  pf.set_rule(4, Reduce{}, {6});
  pf.set_rule(6, Refl{}, {});
  pf.set_rule(5, Reduce{}, {7});
  pf.set_rule(7, lemma_subst(pf, 3, true, 1, arg1(), {{"y", "y'"}}), {3, 8});
  pf.set_rule(8, Refl{}, {});
  pf.set_rule(2, Reduce{}, {9});
  pf.set_rule(9, lemma_subst(pf, 0, false, 0, arg1(), {{"x", "x'"}, {"y", "y"}}), {0, 10});
  pf.set_rule(10, Case{"y", nat, {{"Z", {}}, {"S", {"y'"}}}}, {11, 12});
  pf.set_rule(11, Reduce{}, {13});
  pf.set_rule(13, Refl{}, {});
  pf.set_rule(12, Reduce{}, {14});
  pf.set_rule(14, lemma_subst(pf, 10, false, 0, arg1(), {{"x'", "x'"}, {"y", "y'"}}), {10, 15});
  pf.set_rule(15, Refl{}, {});
  return pf;
}

Preproof mapE_preproof(const Program& p) {
  Preproof pf;
  auto add = [&](const std::string& s) { return pf.add(equation(p, s)); };
  add("forall e:Expr a. mapE id e = e");                                   // 0
  add("forall t:Term a, n:Nat. mapE id (MkE t n) = MkE t n");              // 1
  add("forall t:Term a, n:Nat. MkE (mapT id t) n = MkE t n");              // 2
  add("forall t:Term a. mapT id t = t");                                   // 3
  add("forall n:Nat. n = n");                                              // 4
  add("forall v:a. mapT id (Var v) = Var v");                              // 5
  TypeExpr term_a = TypeExpr::data("Term", {TypeExpr::var("a")});
  pf.add(equation(p, "forall c:Nat. mapT id (Cst c) = Cst c", term_a));    // 6
  add("forall e1:Expr a, e2:Expr a. mapT id (App e1 e2) = App e1 e2");     // 7
  add("forall v:a. Var v = Var v");                                        // 8
  pf.add(equation(p, "forall c:Nat. Cst c = Cst c", term_a));              // 9
  add("forall e1:Expr a, e2:Expr a. App (mapE id e1) (mapE id e2) = App e1 e2");  // 10
  add("forall e1:Expr a. mapE id e1 = e1");                                // 11
  add("forall e2:Expr a. mapE id e2 = e2");                                // 12
  add("forall e1:Expr a. e1 = e1");                                        // 13
  add("forall e2:Expr a. e2 = e2");                                        // 14
  TypeExpr a = TypeExpr::var("a");
  pf.set_rule(0, Case{"e", TypeExpr::data("Expr", {a}), {{"MkE", {"t", "n"}}}}, {1});
  pf.set_rule(1, Reduce{}, {2});
  pf.set_rule(2, Cong{"MkE"}, {3, 4});
  pf.set_rule(3, Case{"t", TypeExpr::data("Term", {a}), {{"Var", {"v"}}, {"Cst", {"c"}}, {"App", {"e1", "e2"}}}},
              {5, 6, 7});
  pf.set_rule(4, Refl{}, {});
  pf.set_rule(5, Reduce{}, {8});
  pf.set_rule(6, Reduce{}, {9});
  pf.set_rule(7, Reduce{}, {10});
  pf.set_rule(8, Refl{}, {});
  pf.set_rule(9, Refl{}, {});
  pf.set_rule(10, Cong{"App"}, {11, 12});
  pf.set_rule(11, lemma_subst(pf, 0, false, 0, {}, {{"e", "e1"}}), {0, 13});
  pf.set_rule(12, lemma_subst(pf, 0, false, 0, {}, {{"e", "e2"}}), {0, 14});
  pf.set_rule(13, Refl{}, {});
  pf.set_rule(14, Refl{}, {});
  return pf;
}

// ------------------------------------------------------------ generators

Term random_nat_term(Rng& r, const std::vector<std::string>& vars, int depth) {
  int choice = depth <= 0 ? r.below(2) : r.below(4);
  if (choice == 0 && !vars.empty()) return Term::var(r.pick(vars));
  if (choice <= 1) return Term::con("Z");
  if (choice == 2) return Term::app(Term::con("S"), random_nat_term(r, vars, depth - 1));
  return Term::apply(Term::fun("add"), {random_nat_term(r, vars, depth - 1), random_nat_term(r, vars, depth - 1)});
}

Term random_raw_term(Rng& r, int depth) {
  static const std::vector<std::string> vars{"x", "y", "z"};
  int choice = depth <= 0 ? r.below(3) : r.below(7);
  switch (choice) {
    case 0: return Term::var(r.pick(vars));
    case 1: return Term::con("Z");
    case 2: return Term::con("True");
    case 3: return Term::app(Term::con("S"), random_raw_term(r, depth - 1));
    case 4: return Term::apply(Term::fun("add"), {random_raw_term(r, depth - 1), random_raw_term(r, depth - 1)});
    case 5: return Term::apply(Term::fun("lt"), {random_raw_term(r, depth - 1), random_raw_term(r, depth - 1)});
    default: return Term::var(r.pick(vars));
  }
}

Term random_ground_nat(Rng& r, int depth) {
  Term t = Term::con("Z");
  for (int n = r.below(depth); n > 0; --n) t = Term::app(Term::con("S"), t);
  return t;
}

Preproof random_shape(Rng& r, int max_vertices, int max_vars) {
  Preproof pf;
  int n = 1 + r.below(max_vertices);
  TypeExpr nat = TypeExpr::data("Nat");
  for (int v = 0; v < n; ++v) {
    TypeEnv env;
    for (int i = 0; i < max_vars; ++i)
      if (r.coin(0.6)) env["v" + std::to_string(i)] = nat;
    pf.add(Equation(Term::con("Z"), Term::con("Z"), env, nat));
  }
  auto any = [&] { return static_cast<std::size_t>(r.below(n)); };
  for (int v = 0; v < n; ++v) {
    const TypeEnv& env = pf.eq(v).env;
    std::vector<std::string> names;
    for (const auto& [x, ty] : env) names.push_back(x);
    int kind = r.below(env.empty() ? 4 : 5);
    if (kind == 0) {
      pf.set_rule(v, Refl{}, {});
    } else if (kind == 1) {
      pf.set_rule(v, Reduce{}, {any()});
    } else if (kind == 2) {
      std::vector<std::size_t> ps{any()};
      if (r.coin()) ps.push_back(any());
      pf.set_rule(v, Cong{"S"}, ps);
    } else if (kind == 3) {
      std::size_t lemma = any(), cont = any();
      Subst s;
      s.lemma = lemma;
      for (const auto& [y, ty] : pf.eq(lemma).env) {
        std::string ry = y + "@" + std::to_string(lemma);
        s.renaming[y] = ry;
        if (!names.empty() && r.coin(0.7)) s.theta[ry] = Term::var(r.pick(names));
        else if (!names.empty() && r.coin()) s.theta[ry] = Term::app(Term::con("S"), Term::var(r.pick(names)));
        else s.theta[ry] = Term::con("Z");
      }
      pf.set_rule(v, s, {lemma, cont});
    } else {
      std::string x = r.pick(names);
      int branches = 1 + r.below(2);
      Case k{x, nat, {}};
      std::vector<std::size_t> ps;
      for (int b = 0; b < branches; ++b) {
        std::size_t w = any();
        std::vector<std::string> fresh;
        for (const auto& [y, ty] : pf.eq(w).env)
          if ((y == x || !env.count(y)) && r.coin(0.7)) fresh.push_back(y);
        k.branches.push_back({"S", fresh});
        ps.push_back(w);
      }
      pf.set_rule(v, k, ps);
    }
  }
  return pf;
}

SizeChangeGraph random_graph(Rng& r, std::size_t n, int vars) {
  SizeChangeGraph g{static_cast<std::size_t>(r.below(static_cast<int>(n))),
                    static_cast<std::size_t>(r.below(static_cast<int>(n))), {}};
  for (int x = 0; x < vars; ++x)
    for (int y = 0; y < vars; ++y)
      if (r.coin(0.3)) g.add(x, y, r.coin(0.4) ? Label::Decr : Label::NonIncr);
  return g;
}

// ------------------------------------------------------------ oracles

std::set<SizeChangeGraph> batch_closure(const std::vector<SizeChangeGraph>& gs) {
  std::set<SizeChangeGraph> cl(gs.begin(), gs.end());
  for (;;) {
    std::set<SizeChangeGraph> next = cl;
    for (const auto& g : cl)
      for (const auto& h : cl)
        if (g.target == h.source) next.insert(compose(g, h));
    if (next.size() == cl.size()) return cl;
    cl = std::move(next);
  }
}

std::vector<std::vector<ProofEdge>> simple_cycles(const Preproof& pf) {
  std::vector<std::vector<ProofEdge>> out;
  std::vector<ProofEdge> path;
  std::vector<bool> on(pf.size(), false);
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t start, std::size_t v) {
    const Vertex& x = pf.vertices[v];
    for (std::size_t i = 0; i < x.premises.size(); ++i) {
      std::size_t w = x.premises[i];
      if (w < start) continue;
      path.push_back({v, w, i});
      if (w == start) out.push_back(path);
      else if (!on[w]) {
        on[w] = true;
        go(start, w);
        on[w] = false;
      }
      path.pop_back();
    }
  };
  for (std::size_t s = 0; s < pf.size(); ++s) {
    on[s] = true;
    go(s, s);
    on[s] = false;
  }
  return out;
}

namespace {

// Trace steps (T at source, T' at target, progress) along one edge.
std::vector<std::tuple<std::string, std::string, bool>> trace_steps(const Preproof& pf, const ProofEdge& e) {
  std::vector<std::tuple<std::string, std::string, bool>> out;
  const Vertex& v = pf.vertices[e.source];
  const TypeEnv& src = v.eq.env;
  const TypeEnv& tgt = pf.eq(e.target).env;
  auto identity = [&](const std::set<std::string>& skip) {
    for (const auto& [z, ty] : src)
      if (!skip.count(z) && tgt.count(z)) out.emplace_back(z, z, false);
  };
  if (const auto* s = v.rule ? std::get_if<Subst>(&*v.rule) : nullptr; s && e.index == 0) {
    for (const auto& [y, ty] : tgt) {
      const Term& image = s->theta.at(s->renaming.at(y));
      if (image.is_var() && src.count(image.name())) out.emplace_back(image.name(), y, false);
    }
    return out;
  }
  if (const auto* k = v.rule ? std::get_if<Case>(&*v.rule) : nullptr) {
    const auto& fresh = k->branches[e.index].fresh;
    std::set<std::string> skip(fresh.begin(), fresh.end());
    skip.insert(k->var);
    for (const auto& f : fresh)
      if (tgt.count(f)) out.emplace_back(k->var, f, true);
    identity(skip);
    return out;
  }
  identity({});
  return out;
}

}  // namespace

bool cycle_has_progressing_trace(const Preproof& pf, const std::vector<ProofEdge>& cycle) {
  const TypeEnv& start_env = pf.eq(cycle.front().source).env;
  std::size_t rounds = std::max<std::size_t>(1, start_env.size());
  std::vector<std::vector<std::tuple<std::string, std::string, bool>>> steps;
  for (const auto& e : cycle) steps.push_back(trace_steps(pf, e));
  for (const auto& [x0, ty] : start_env) {
    std::set<std::pair<std::string, bool>> cur{{x0, false}};
    for (std::size_t round = 0; round < rounds && !cur.empty(); ++round) {
      for (const auto& st : steps) {
        std::set<std::pair<std::string, bool>> next;
        for (const auto& [z, prog] : cur)
          for (const auto& [a, b, p] : st)
            if (a == z) next.insert({b, prog || p});
        cur = std::move(next);
      }
      if (cur.count({x0, true})) return true;
    }
  }
  return false;
}

std::vector<Term> ground_terms(const Signature& sig, const TypeExpr& ty, int depth) {
  static std::map<std::pair<std::string, int>, std::vector<Term>> memo;
  if (depth <= 0) return {};
  auto key = std::make_pair(ty.str(), depth);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::vector<Term> out;
  if (ty.is_var()) {
    out = {Term::var("a0"), Term::var("a1")};
  } else if (ty.is_data()) {
    for (const auto& k : sig.constructors_of(ty.name())) {
      std::vector<std::vector<Term>> choices;
      for (const auto& at : sig.constructor_args(k, ty)) choices.push_back(ground_terms(sig, at, depth - 1));
      std::vector<std::vector<Term>> combos{{}};
      for (const auto& c : choices) {
        std::vector<std::vector<Term>> next;
        for (const auto& prefix : combos)
          for (const auto& t : c) {
            auto p = prefix;
            p.push_back(t);
            next.push_back(std::move(p));
          }
        combos = std::move(next);
      }
      for (const auto& args : combos) out.push_back(Term::apply(Term::con(k), args));
    }
  }
  memo[key] = out;
  return out;
}

std::vector<Substitution> ground_instances(const Signature& sig, const TypeEnv& env, int depth, std::size_t cap) {
  std::vector<Substitution> out{{}};
  for (const auto& [x, ty] : env) {
    std::vector<Term> values = ground_terms(sig, ty, depth);
    std::vector<Substitution> next;
    for (const auto& s : out)
      for (const auto& t : values) {
        if (next.size() >= cap) break;
        auto s2 = s;
        s2[x] = t;
        next.push_back(std::move(s2));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<LocalViolation> local_soundness_violations(const Preproof& pf, const RuleSet& rs, int depth,
                                                       std::size_t* checked) {
  std::vector<LocalViolation> out;
  std::size_t count = 0;
  for (std::size_t v = 0; v < pf.size(); ++v) {
    if (!pf.vertices[v].rule) continue;
    for (const auto& alpha : ground_instances(rs.sig(), pf.eq(v).env, depth)) {
      ++count;
      if (satisfies(rs, alpha, pf.eq(v))) continue;
      bool found = false;
      for (const auto& [i, beta] : preceding_instances(pf, v, alpha, rs))
        if (!satisfies(rs, beta, pf.eq(pf.vertices[v].premises[i]))) {
          found = true;
          break;
        }
      if (!found) out.push_back({v, alpha});
    }
  }
  if (checked) *checked = count;
  return out;
}

std::size_t lemma_edges_below(const Preproof& pf, std::size_t root) {
  std::set<std::size_t> seen;
  std::set<std::pair<std::size_t, std::size_t>> lemma_edges;
  std::vector<std::size_t> work{root};
  while (!work.empty()) {
    std::size_t v = work.back();
    work.pop_back();
    if (!seen.insert(v).second) continue;
    const Vertex& x = pf.vertices[v];
    bool subst = x.rule && std::holds_alternative<Subst>(*x.rule);
    for (std::size_t i = 0; i < x.premises.size(); ++i) {
      if (subst && i == 0) lemma_edges.insert({v, x.premises[0]});
      else work.push_back(x.premises[i]);
    }
  }
  return lemma_edges.size();
}

std::optional<std::size_t> case_vertex_on(const Preproof& pf, const std::string& symbol) {
  for (std::size_t v = 0; v < pf.size(); ++v) {
    const Vertex& x = pf.vertices[v];
    if (!x.rule || !std::holds_alternative<Case>(*x.rule)) continue;
    if (x.eq.lhs.head().name() == symbol || x.eq.rhs.head().name() == symbol) return v;
  }
  return std::nullopt;
}

}  // namespace testing
