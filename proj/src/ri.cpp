#include "cycleq/ri.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <set>

#include "cycleq/search.hpp"

namespace cycleq {

// ---------------------------------------------------------------- precedence

Precedence::Precedence(std::vector<std::string> order) : order_(std::move(order)) {
  for (std::size_t i = 0; i < order_.size(); ++i)
    if (!rank_.emplace(order_[i], i).second) throw Error("symbol " + order_[i] + " listed twice in precedence");
}

bool Precedence::greater(const std::string& f, const std::string& g) const {
  auto a = rank_.find(f), b = rank_.find(g);
  if (a == rank_.end()) throw Error("symbol " + f + " missing from precedence");
  if (b == rank_.end()) throw Error("symbol " + g + " missing from precedence");
  return a->second < b->second;
}

Precedence default_precedence(const Signature& sig) {
  std::vector<std::string> order = sig.function_order();
  for (const auto& c : sig.constructor_order()) order.push_back(c);
  return Precedence(order);
}

Precedence make_precedence(const Signature& sig, const std::vector<std::string>& front) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& f : front) {
    if (!sig.has_symbol(f)) throw Error("unknown symbol " + f + " in precedence");
    if (!seen.insert(f).second) throw Error("symbol " + f + " listed twice in precedence");
    order.push_back(f);
  }
  Precedence def = default_precedence(sig);
  for (const auto& f : def.order())
    if (!seen.count(f)) order.push_back(f);
  return Precedence(order);
}

// ---------------------------------------------------------------- path order

bool lpo_greater(const Precedence& prec, const Term& s, const Term& t) {
  if (s.is_var()) return false;
  if (t.is_var()) return s != t && occurs(t.name(), s);
  std::vector<Term> ss = s.args(), ts = t.args();
  for (const auto& si : ss)
    if (si == t || lpo_greater(prec, si, t)) return true;
  Term f = s.head(), g = t.head();
  if (!f.is_sym()) return false;
  auto dominates_args = [&] {
    return std::all_of(ts.begin(), ts.end(), [&](const Term& tj) { return lpo_greater(prec, s, tj); });
  };
  // A variable head acts as a symbol below everything in s that contains it.
  if (g.is_var()) return occurs(g.name(), s) && dominates_args();
  if (f.name() != g.name()) return prec.greater(f.name(), g.name()) && dominates_args();
  if (!dominates_args()) return false;
  for (std::size_t i = 0; i < std::min(ss.size(), ts.size()); ++i)
    if (ss[i] != ts[i]) return lpo_greater(prec, ss[i], ts[i]);
  return ss.size() > ts.size();
}

bool decreasing_greater(const Precedence& prec, const Term& m, const Term& n) {
  return lpo_greater(prec, m, n) || is_subterm(n, m) == SubtermRel::Strict;
}

// ---------------------------------------------------------------- expand

namespace {

std::string fresh_name(std::string base, const std::set<std::string>& taken) {
  while (taken.count(base)) base += "'";
  return base;
}

bool constructor_term(const Term& t) {
  if (t.is_var() || t.is_con()) return true;
  if (t.is_fun()) return false;
  return constructor_term(t.fn()) && constructor_term(t.arg());
}

// Fully applied defined function over constructor terms.
bool basic(const Signature& sig, const Term& t) {
  Term h = t.head();
  if (!h.is_fun() || static_cast<int>(t.nargs()) != sig.arity(h.name())) return false;
  for (const auto& a : t.args())
    if (!constructor_term(a)) return false;
  return true;
}

// Leftmost-innermost basic position; post-order so inner subterms come first.
std::optional<Position> innermost_basic(const Signature& sig, const Term& t) {
  std::optional<Position> found;
  Position cur;
  std::function<void(const Term&)> go = [&](const Term& u) {
    if (found) return;
    if (u.is_app()) {
      cur.push_back(Step::Fn);
      go(u.fn());
      cur.back() = Step::Arg;
      go(u.arg());
      cur.pop_back();
    }
    if (!found && basic(sig, u)) found = cur;
  };
  go(t);
  return found;
}

}  // namespace

std::vector<ExpandResult> expand_set(const RuleSet& rs, const OrientedEq& eq, const Position& hole,
                                     const Precedence& prec) {
  const Signature& sig = rs.sig();
  const Term& sub = subterm_at(eq.lhs, hole);
  if (!basic(sig, sub)) throw Error("cannot expand " + sub.str() + ": not a basic term");
  if (!lpo_greater(prec, eq.lhs, eq.rhs)) throw Error("cannot expand " + eq.str() + ": not oriented");
  std::vector<ExpandResult> out;
  std::set<std::string> eq_vars;
  for (const auto& [x, ty] : eq.env) eq_vars.insert(x);
  std::vector<Term> sargs = sub.args();
  for (std::size_t ri : rs.rules_for(sub.head().name())) {
    const RewriteRule& r = rs.rules()[ri];
    std::set<std::string> taken = eq_vars;
    Substitution ren;
    for (const auto& [y, ty] : r.env) {
      std::string n = fresh_name(y, taken);
      taken.insert(n);
      ren[y] = Term::var(n);
    }
    std::vector<Term> rargs = apply_subst(r.lhs, ren).args();
    std::vector<std::pair<Term, Term>> pairs;
    for (std::size_t i = 0; i < rargs.size(); ++i) pairs.emplace_back(rargs[i], sargs[i]);
    auto theta = unify_all(pairs);
    if (!theta) continue;
    Term l = apply_subst(replace_at(eq.lhs, hole, apply_subst(r.rhs, ren)), *theta);
    Term rr = apply_subst(eq.rhs, *theta);
    TypeEnv known;
    for (const auto& [x, ty] : eq.env)
      if (!theta->count(x)) known[x] = ty;
    ExpandResult res;
    res.eq.lhs = l;
    res.eq.rhs = rr;
    res.eq.env = infer_env(sig, known, {l, rr}, &res.eq.type);
    res.eq.type = eq.type;
    res.rule = ri;
    for (const auto& x : eq_vars) {
      auto it = theta->find(x);
      if (it != theta->end()) res.mgu[x] = it->second;
    }
    out.push_back(std::move(res));
  }
  return out;
}

// ---------------------------------------------------------------- derivations

OrientedEq RIDerivation::oriented(std::size_t id) const {
  OrientedEq e = eqs.at(id);
  if (flipped.at(id)) std::swap(e.lhs, e.rhs);
  return e;
}

std::string ri_verdict_str(RIVerdict v) {
  switch (v) {
    case RIVerdict::Proved: return "proved";
    case RIVerdict::Unorientable: return "unorientable";
    case RIVerdict::Stuck: return "stuck";
    case RIVerdict::LimitExceeded: return "limit-exceeded";
  }
  return "?";
}

RIResult ri_prove(const Program& prog, const std::vector<Equation>& goals, const Precedence& prec,
                  const RILimits& limits) {
  if (!prog.assumptions_ok()) throw AssumptionError("program is not complete and orthogonal");
  const RuleSet& rs = prog.rules;
  RIResult res;
  RIDerivation& d = res.derivation;
  RIState st;
  auto t0 = std::chrono::steady_clock::now();

  auto add = [&](OrientedEq e) {
    e.env = trim_env(e.env, e.lhs, e.rhs);
    d.eqs.push_back(std::move(e));
    d.flipped.push_back(false);
    return d.eqs.size() - 1;
  };
  auto replace = [&](std::size_t old, std::size_t now) {
    std::replace(st.E.begin(), st.E.end(), old, now);
  };
  auto finish = [&](RIVerdict v, std::string msg) {
    res.verdict = v;
    res.message = std::move(msg);
    return res;
  };

  for (const auto& g : goals) {
    std::size_t id = add(OrientedEq{g.lhs, g.rhs, g.env, g.type});
    d.goals.push_back(id);
    st.E.push_back(id);
  }

  while (!st.E.empty()) {
    if (d.steps.size() >= limits.max_steps) return finish(RIVerdict::LimitExceeded, "step limit reached");
    if (d.eqs.size() > limits.max_equations) return finish(RIVerdict::LimitExceeded, "equation limit reached");
    if (std::chrono::steady_clock::now() - t0 > std::chrono::milliseconds(limits.timeout_ms))
      return finish(RIVerdict::LimitExceeded, "timeout");
    std::size_t id = st.E.front();
    OrientedEq e = d.oriented(id);
    RIStep s;
    s.eq = id;

    if (e.lhs == e.rhs) {
      s.kind = RIStep::Kind::Delete;
      st.E.erase(st.E.begin());
      s.after = st;
      d.steps.push_back(std::move(s));
      continue;
    }

    bool simplified = false;
    for (int side = 0; side < 2 && !simplified; ++side) {
      const Term& t = side == 0 ? e.lhs : e.rhs;
      Term n;
      try {
        n = normalize(rs, t, limits.fuel);
      } catch (const FuelExhausted&) {
        return finish(RIVerdict::LimitExceeded, "normalisation of " + t.str() + " ran out of fuel");
      }
      if (n == t) continue;
      OrientedEq ne = e;
      (side == 0 ? ne.lhs : ne.rhs) = n;
      s.kind = RIStep::Kind::Simplify;
      s.side = side;
      s.result = add(ne);
      replace(id, s.result);
      simplified = true;
    }

    for (int side = 0; side < 2 && !simplified; ++side) {
      const Term& t = side == 0 ? e.lhs : e.rhs;
      for (const auto& p : positions(t)) {
        const Term& u = subterm_at(t, p);
        for (std::size_t h : st.H) {
          OrientedEq he = d.oriented(h);
          auto sigma = match(he.lhs, u);
          if (!sigma) continue;
          OrientedEq ne = e;
          (side == 0 ? ne.lhs : ne.rhs) = replace_at(t, p, apply_subst(he.rhs, *sigma));
          s.kind = RIStep::Kind::Simplify;
          s.by_hyp = true;
          s.hyp = h;
          s.side = side;
          s.pos = p;
          s.sigma = *sigma;
          s.result = add(ne);
          replace(id, s.result);
          simplified = true;
          break;
        }
        if (simplified) break;
      }
    }
    if (simplified) {
      s.after = st;
      d.steps.push_back(std::move(s));
      continue;
    }

    if (!lpo_greater(prec, e.lhs, e.rhs)) {
      if (!lpo_greater(prec, e.rhs, e.lhs))
        return finish(RIVerdict::Unorientable, "cannot orient " + e.str());
      d.flipped[id] = !d.flipped[id];
      e = d.oriented(id);
    }
    auto hole = innermost_basic(rs.sig(), e.lhs);
    if (!hole) return finish(RIVerdict::Stuck, "no basic subterm to expand in " + e.lhs.str());
    s.kind = RIStep::Kind::Expand;
    s.pos = *hole;
    st.E.erase(st.E.begin());
    st.H.push_back(id);
    for (auto& r : expand_set(rs, e, *hole, prec)) {
      std::size_t j = add(r.eq);
      s.results.push_back(j);
      s.rules.push_back(r.rule);
      s.mgus.push_back(std::move(r.mgu));
      st.E.push_back(j);
    }
    s.after = st;
    d.steps.push_back(std::move(s));
  }
  RIStep end;
  end.kind = RIStep::Kind::End;
  end.after = st;
  d.steps.push_back(std::move(end));
  return finish(RIVerdict::Proved, "");
}

// ---------------------------------------------------------------- translation

namespace {

bool pairs_with(const Equation& a, const Term& l, const Term& r, bool* swapped) {
  if (a.lhs == l && a.rhs == r) {
    *swapped = false;
    return true;
  }
  if (a.lhs == r && a.rhs == l) {
    *swapped = true;
    return true;
  }
  return false;
}

bool env_within(const TypeEnv& small, const TypeEnv& big) {
  for (const auto& [x, ty] : small) {
    auto it = big.find(x);
    if (it == big.end() || it->second != ty) return false;
  }
  return true;
}

Equation as_equation(const OrientedEq& e) { return Equation(e.lhs, e.rhs, e.env, e.type); }

struct Translator {
  const RuleSet& rs;
  const RIDerivation& d;
  long fuel;
  Preproof pf;

  Subst subst_from(std::size_t lemma_id, const Substitution& tau) {
    Subst s;
    s.lemma = lemma_id;
    for (const auto& [x, ty] : d.eqs[lemma_id].env) {
      std::string y = x + "@" + std::to_string(lemma_id);
      s.renaming[x] = y;
      auto it = tau.find(x);
      if (it == tau.end()) throw Error("malformed derivation: lemma variable " + x + " is not instantiated");
      s.theta[y] = it->second;
    }
    return s;
  }

  void simplify(const RIStep& st) {
    std::size_t v = st.eq, r = st.result;
    if (!st.by_hyp) {
      const Equation& a = pf.eq(v);
      const Equation& b = pf.eq(r);
      bool sw = !(reduces_to(rs, a.lhs, b.lhs, fuel) == Reach::Yes && reduces_to(rs, a.rhs, b.rhs, fuel) == Reach::Yes);
      pf.set_rule(v, Reduce{sw}, {r});
      return;
    }
    Subst s = subst_from(st.hyp, st.sigma);
    s.flip = d.flipped[st.hyp];
    s.side = d.flipped[v] ? 1 - st.side : st.side;
    s.hole = st.pos;
    pf.set_rule(v, s, {st.hyp, r});
  }

  // Leaf where the expanded subterm reduces at the root with `rule`.
  void close_leaf(std::size_t w, int side, const Position& hole, const Term& reduct, std::size_t rule,
                  const RIStep& st) {
    const Equation e = pf.eq(w);
    Term l = e.lhs, r = e.rhs;
    (side == 0 ? l : r) = replace_at(e.side(side), hole, reduct);
    auto it = std::find(st.rules.begin(), st.rules.end(), rule);
    if (it == st.rules.end()) throw Error("malformed derivation: no expansion result for rule " + std::to_string(rule));
    std::size_t j = st.results[it - st.rules.begin()];
    const Equation phi = pf.eq(j);
    bool sw = false;
    if (pairs_with(phi, l, r, &sw) && env_within(phi.env, e.env)) {
      pf.set_rule(w, Reduce{sw}, {j});
      return;
    }
    Equation ue(l, r, trim_env(e.env, l, r), e.type);
    std::size_t u = pf.add(ue);
    pf.set_rule(w, Reduce{false}, {u});
    Substitution tau;
    int sub_side = 0;
    if (match_into(phi.lhs, l, tau) && match_into(phi.rhs, r, tau)) {
      sub_side = 0;
    } else {
      tau.clear();
      if (!(match_into(phi.lhs, r, tau) && match_into(phi.rhs, l, tau)))
        throw Error("malformed derivation: leaf " + ue.str() + " is not an instance of " + phi.str());
      sub_side = 1;
    }
    Subst s = subst_from(j, tau);
    s.side = sub_side;
    const Term& other = sub_side == 0 ? r : l;
    std::size_t refl = pf.add(Equation(other, other, trim_env(e.env, other, other), e.type));
    pf.set_rule(refl, Refl{}, {});
    pf.set_rule(u, s, {j, refl});
  }

  std::vector<std::string> branch_names(const std::string& z, const std::string& con, std::size_t n,
                                        const TypeEnv& env, const Substitution& rho, const RIStep& st,
                                        const TypeEnv& eq_env) {
    std::set<std::string> taken;
    for (const auto& [x, ty] : env)
      if (x != z) taken.insert(x);
    for (const auto& mgu : st.mgus) {
      Substitution tau;
      bool ok = true;
      for (const auto& [x, ty] : eq_env) {
        auto m = mgu.find(x);
        Term target = m == mgu.end() ? Term::var(x) : m->second;
        if (!match_into(rho.at(x), target, tau)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      auto t = tau.find(z);
      if (t == tau.end() || t->second.head() != Term::con(con) || t->second.nargs() != n) continue;
      std::vector<std::string> names;
      std::set<std::string> seen = taken;
      for (const auto& a : t->second.args()) {
        if (!a.is_var() || !seen.insert(a.name()).second) break;
        names.push_back(a.name());
      }
      if (names.size() == n) return names;
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
      std::string nm = fresh_name(n == 1 ? z + "'" : z + std::to_string(i + 1), taken);
      taken.insert(nm);
      names.push_back(nm);
    }
    return names;
  }

  void expand_tree(std::size_t w, int side, const Position& hole, const Substitution& rho, const RIStep& st,
                   int guard) {
    if (guard > 64) throw Error("malformed derivation: expansion tree too deep");
    const Equation e = pf.eq(w);
    const Term& sub = subterm_at(e.side(side), hole);
    std::size_t rule = 0;
    if (auto reduct = root_step(rs, sub, &rule)) {
      close_leaf(w, side, hole, *reduct, rule, st);
      return;
    }
    auto z = blocking_variable(rs, sub);
    if (!z || !e.env.count(*z)) throw Error("malformed derivation: " + sub.str() + " neither reduces nor splits");
    const TypeExpr& ty = e.env.at(*z);
    if (!ty.is_data()) throw Error("malformed derivation: cannot split " + *z);
    const Signature& sig = rs.sig();
    Case k{*z, ty, {}};
    std::vector<std::size_t> kids;
    std::vector<Substitution> rhos;
    for (const auto& con : sig.constructors_of(ty.name())) {
      std::vector<TypeExpr> args = sig.constructor_args(con, ty);
      std::vector<std::string> names = branch_names(*z, con, args.size(), e.env, rho, st, d.eqs[st.eq].env);
      TypeEnv env = e.env;
      env.erase(*z);
      std::vector<Term> vs;
      for (std::size_t i = 0; i < args.size(); ++i) {
        env[names[i]] = args[i];
        vs.push_back(Term::var(names[i]));
      }
      Substitution one{{*z, Term::apply(Term::con(con), vs)}};
      kids.push_back(pf.add(Equation(apply_subst(e.lhs, one), apply_subst(e.rhs, one), env, e.type)));
      Substitution r2;
      for (const auto& [x, t] : rho) r2[x] = apply_subst(t, one);
      rhos.push_back(std::move(r2));
      k.branches.push_back({con, names});
    }
    pf.set_rule(w, k, kids);
    for (std::size_t i = 0; i < kids.size(); ++i) expand_tree(kids[i], side, hole, rhos[i], st, guard + 1);
  }

  void expand(const RIStep& st) {
    Substitution rho;
    for (const auto& [x, ty] : d.eqs[st.eq].env) rho[x] = Term::var(x);
    int side = d.flipped[st.eq] ? 1 : 0;
    expand_tree(st.eq, side, st.pos, rho, st, 0);
  }
};

}  // namespace

Preproof translate(const RuleSet& rs, const RIDerivation& d, long fuel) {
  Translator tr{rs, d, fuel, {}};
  for (const auto& e : d.eqs) tr.pf.add(as_equation(e));
  for (const auto& st : d.steps) {
    if (st.eq >= d.eqs.size() && st.kind != RIStep::Kind::End) throw Error("malformed derivation: bad equation id");
    switch (st.kind) {
      case RIStep::Kind::Delete: tr.pf.set_rule(st.eq, Refl{}, {}); break;
      case RIStep::Kind::Simplify: tr.simplify(st); break;
      case RIStep::Kind::Expand: tr.expand(st); break;
      case RIStep::Kind::End: break;
    }
  }
  for (auto& v : tr.pf.vertices)
    if (!v.rule) v.hypothesis = true;
  tr.pf.ri_translated = true;
  return tr.pf;
}

}  // namespace cycleq
