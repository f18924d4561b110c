#include "cycleq/search.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <queue>

namespace cycleq {

using Clock = std::chrono::steady_clock;

static double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

static std::int64_t ns_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
}

void SearchConfig::validate() const {
  if (depth <= 0) throw Error("depth bound must be positive");
  if (timeout_ms <= 0) throw Error("timeout must be positive");
  if (fuel <= 0) throw Error("fuel must be positive");
  if (max_subst == 0) throw Error("candidate cap must be positive");
}

std::string verdict_str(Verdict v) {
  switch (v) {
    case Verdict::Proved: return "proved";
    case Verdict::DepthExhausted: return "depth-exhausted";
    case Verdict::Timeout: return "timeout";
    case Verdict::Refuted: return "refuted";
    case Verdict::Unorientable: return "unorientable";
  }
  return "?";
}

namespace {

std::size_t add_vertex(ProofState& s, const Equation& eq, int depth, bool from_root) {
  std::size_t w = s.pf.add(eq);
  s.depth.push_back(depth);
  s.from_root.push_back(from_root);
  return w;
}

void add_graphs(ProofState& s, std::size_t v, EdgeTimer* timer, bool check, bool* sound = nullptr) {
  std::vector<SizeChangeGraph> gs;
  for (std::size_t i = 0; i < s.pf.vertices[v].premises.size(); ++i) gs.push_back(edge_scg(s.pf, v, i));
  auto t0 = Clock::now();
  incremental_add(s.closure, gs);
  if (check) *sound = check_soundness(s.closure).sound;
  if (timer) timer->ns += ns_since(t0);
}

Equation trimmed(const Equation& e, const Term& l, const Term& r) {
  return Equation(l, r, trim_env(e.env, l, r), e.type);
}

bool constructor_headed(const Term& t) { return t.head().is_con(); }

enum class Sat { Ok, Dead, Refuted };

struct Saturation {
  Sat status = Sat::Ok;
  bool depth_hit = false;
  std::string why;
};

// Applies Reduce, Refl, clash detection and Cong to every open goal.
Saturation saturate(ProofState& s, std::vector<bool>& stuck, const RuleSet& rs, const SearchConfig& cfg,
                    EdgeTimer* timer) {
  Saturation out;
  for (std::size_t v = 0; v < s.pf.size(); ++v) {
    if (stuck.size() < s.pf.size()) stuck.resize(s.pf.size(), false);
    const Vertex& vx = s.pf.vertices[v];
    if (vx.rule || vx.hypothesis || stuck[v]) continue;
    std::size_t g = v;
    Equation e = vx.eq;
    NormalizeOutcome l = normalize_bounded(rs, e.lhs, cfg.fuel), r = normalize_bounded(rs, e.rhs, cfg.fuel);
    if (l.exhausted || r.exhausted) {
      if (cfg.fail_on_fuel) {
        out.status = Sat::Dead;
        out.why = "normalisation fuel exhausted on " + e.str();
        return out;
      }
    } else if (l.term != e.lhs || r.term != e.rhs) {
      Equation n = trimmed(e, l.term, r.term);
      std::size_t w = add_vertex(s, n, s.depth[g], s.from_root[g]);
      s.pf.set_rule(g, Reduce{false}, {w});
      add_graphs(s, g, timer, false);
      g = w;
      e = n;
    }
    stuck.resize(s.pf.size(), false);
    if (e.lhs == e.rhs) {
      s.pf.set_rule(g, Refl{}, {});
      continue;
    }
    if (constructor_headed(e.lhs) && constructor_headed(e.rhs)) {
      if (e.lhs.head() != e.rhs.head()) {
        out.status = s.from_root[g] ? Sat::Refuted : Sat::Dead;
        out.why = "constructor clash in " + e.str();
        return out;
      }
      if (cfg.cong) {
        if (s.depth[g] >= cfg.depth) {
          out.status = Sat::Dead;
          out.depth_hit = true;
          return out;
        }
        std::vector<Term> la = e.lhs.args(), ra = e.rhs.args();
        std::vector<TypeExpr> tys = rs.sig().constructor_args(e.lhs.head().name(), e.type);
        std::vector<std::size_t> prem;
        for (std::size_t i = 0; i < la.size(); ++i) {
          Equation p(la[i], ra[i], trim_env(e.env, la[i], ra[i]), tys.at(i));
          prem.push_back(add_vertex(s, p, s.depth[g] + 1, s.from_root[g]));
        }
        s.pf.set_rule(g, Cong{e.lhs.head().name()}, prem);
        add_graphs(s, g, timer, false);
        stuck.resize(s.pf.size(), false);
        continue;
      }
    }
    stuck[g] = true;
  }
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
  std::string n = base;
  while (taken.count(n)) n += "'";
  return n;
}

int position_cmp(const Position& a, const Position& b) {
  if (a.size() != b.size()) return a.size() > b.size() ? -1 : 1;  // innermost first
  return a < b ? -1 : (b < a ? 1 : 0);
}

}  // namespace

ProofState initial_state(const Equation& goal) {
  ProofState s;
  s.pf.add(goal);
  s.depth.push_back(0);
  s.from_root.push_back(true);
  return s;
}

std::vector<std::size_t> eligible_lemmas(const ProofState& s, const SearchConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < s.pf.size(); ++v) {
    const Vertex& x = s.pf.vertices[v];
    if (!x.rule) continue;
    if (cfg.lemma_filter && !std::holds_alternative<Case>(*x.rule)) continue;
    out.push_back(v);
  }
  return out;
}

std::vector<SubstCandidate> subst_candidates(const ProofState& s, const RuleSet&, std::size_t v,
                                             std::size_t lemma, const SearchConfig& cfg) {
  std::vector<SubstCandidate> out;
  const Equation& goal = s.pf.eq(v);
  const Equation& lem = s.pf.eq(lemma);
  std::map<std::string, std::string> ren;
  Substitution rsub;
  for (const auto& [x, ty] : lem.env) {
    ren[x] = x + "@" + std::to_string(lemma);
    rsub[x] = Term::var(ren[x]);
  }
  std::set<std::string> all_vars;
  for (const auto& [x, y] : ren) all_vars.insert(y);
  std::set<std::pair<Term, Term>> seen;
  for (int flip = 0; flip < 2; ++flip) {
    Term m = apply_subst(flip ? lem.rhs : lem.lhs, rsub);
    Term n = apply_subst(flip ? lem.lhs : lem.rhs, rsub);
    if (m.is_var() && !cfg.variable_lemma_sides) continue;
    if (free_vars(m) != all_vars) continue;  // θ must be determined by matching
    for (int side = 0; side < 2; ++side) {
      const Term& gs = goal.side(side);
      for (const auto& p : positions(gs)) {
        auto theta = match(m, subterm_at(gs, p));
        if (!theta) continue;
        Term rewritten = replace_at(gs, p, apply_subst(n, *theta));
        const Term& other = goal.side(1 - side);
        Term l = side == 0 ? rewritten : other, r = side == 0 ? other : rewritten;
        Equation c(l, r, trim_env(goal.env, l, r), goal.type);
        if (c.sides_equal(goal)) continue;
        if (!seen.insert(c.canonical()).second) continue;
        out.push_back({lemma, side, p, flip != 0, ren, *theta, c});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const SubstCandidate& a, const SubstCandidate& b) {
    std::size_t sa = a.continuation.lhs.size() + a.continuation.rhs.size();
    std::size_t sb = b.continuation.lhs.size() + b.continuation.rhs.size();
    if (sa != sb) return sa < sb;
    if (a.side != b.side) return a.side < b.side;
    return position_cmp(a.hole, b.hole) < 0;
  });
  return out;
}

ProofState apply_case(const ProofState& s, const RuleSet& rs, std::size_t v, const std::string& x,
                      EdgeTimer* timer) {
  const Signature& sig = rs.sig();
  const Equation& e = s.pf.eq(v);
  auto it = e.env.find(x);
  if (it == e.env.end()) throw Error("case variable " + x + " not in scope");
  const TypeExpr& ty = it->second;
  if (!ty.is_data() || sig.constructors_of(ty.name()).empty())
    throw Error("cannot case on " + x + " of type " + ty.str());
  ProofState out = s;
  Case c{x, ty, {}};
  std::vector<std::size_t> prem;
  TypeEnv base = e.env;
  base.erase(x);
  for (const auto& k : sig.constructors_of(ty.name())) {
    std::vector<TypeExpr> args = sig.constructor_args(k, ty);
    std::set<std::string> taken;
    for (const auto& [y, t] : base) taken.insert(y);
    CaseBranch b{k, {}};
    TypeEnv env = base;
    std::vector<Term> fv;
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string n = fresh_name(args.size() == 1 ? x + "'" : x + std::to_string(i + 1), taken);
      taken.insert(n);
      b.fresh.push_back(n);
      env[n] = args[i];
      fv.push_back(Term::var(n));
    }
    Substitution sub{{x, Term::apply(Term::con(k), fv)}};
    Equation p(apply_subst(e.lhs, sub), apply_subst(e.rhs, sub), env, e.type);
    prem.push_back(add_vertex(out, p, s.depth[v] + 1, s.from_root[v]));
    c.branches.push_back(std::move(b));
  }
  out.pf.set_rule(v, c, prem);
  add_graphs(out, v, timer, false);
  return out;
}

std::optional<ProofState> try_close_cycle(const ProofState& s, std::size_t v, const SubstCandidate& c,
                                          EdgeTimer* timer) {
  ProofState out = s;
  std::size_t w = add_vertex(out, c.continuation, s.depth[v] + 1, false);
  out.pf.set_rule(v, Subst{c.lemma, c.flip, c.side, c.hole, c.renaming, c.theta}, {c.lemma, w});
  bool sound = true;
  add_graphs(out, v, timer, true, &sound);
  if (!sound) return std::nullopt;
  return out;
}

static std::optional<std::string> case_variable(const RuleSet& rs, const Equation& e) {
  for (int side = 0; side < 2; ++side) {
    auto x = blocking_variable(rs, e.side(side));
    if (!x) continue;
    auto it = e.env.find(*x);
    if (it == e.env.end() || !it->second.is_data()) continue;
    if (rs.sig().constructors_of(it->second.name()).empty()) continue;
    return x;
  }
  return std::nullopt;
}

std::vector<ProofState> expand_goal(const ProofState& s, const RuleSet& rs, std::size_t v,
                                    const SearchConfig& cfg, EdgeTimer* timer) {
  std::vector<SubstCandidate> cands;
  for (std::size_t lemma : eligible_lemmas(s, cfg)) {
    if (lemma == v) continue;
    auto cs = subst_candidates(s, rs, v, lemma, cfg);
    cands.insert(cands.end(), cs.begin(), cs.end());
  }
  std::stable_sort(cands.begin(), cands.end(), [](const SubstCandidate& a, const SubstCandidate& b) {
    std::size_t sa = a.continuation.lhs.size() + a.continuation.rhs.size();
    std::size_t sb = b.continuation.lhs.size() + b.continuation.rhs.size();
    if (sa != sb) return sa < sb;
    if (a.side != b.side) return a.side < b.side;
    if (int c = position_cmp(a.hole, b.hole); c != 0) return c < 0;
    return a.lemma < b.lemma;
  });
  if (cands.size() > cfg.max_subst) cands.resize(cfg.max_subst);
  std::vector<ProofState> out;
  for (const auto& c : cands)
    if (auto st = try_close_cycle(s, v, c, timer)) out.push_back(std::move(*st));
  if (auto x = case_variable(rs, s.pf.eq(v))) out.push_back(apply_case(s, rs, v, *x, timer));
  return out;
}

namespace {

struct Entry {
  std::size_t size, seq;
  std::shared_ptr<ProofState> state;
  std::shared_ptr<std::vector<bool>> stuck;
  bool operator<(const Entry& o) const {  // min-heap on (size, seq)
    return std::tie(size, seq) > std::tie(o.size, o.seq);
  }
};

}  // namespace

SearchResult prove(const Program& prog, const Equation& goal, const SearchConfig& cfg) {
  cfg.validate();
  if (!prog.assumptions_ok())
    throw AssumptionError("program violates the assumptions:\n" + prog.completeness.str() + prog.orthogonality.str());
  const RuleSet& rs = prog.rules;
  SearchResult res;
  EdgeTimer timer;
  auto t0 = Clock::now();
  auto finish = [&](Verdict v, std::string msg) {
    res.verdict = v;
    res.message = std::move(msg);
    res.total_ms = static_cast<double>(ns_since(t0)) / 1e6;
    res.edge_ms = timer.ms();
    return res;
  };

  std::priority_queue<Entry> queue;
  std::size_t seq = 0;
  bool depth_hit = false;
  std::string last_dead;

  // saturates and enqueues; returns false on refutation
  auto push = [&](ProofState st, std::vector<bool> stuck) -> std::optional<std::string> {
    Saturation sat = saturate(st, stuck, rs, cfg, &timer);
    if (sat.depth_hit) depth_hit = true;
    if (sat.status == Sat::Refuted) return sat.why;
    if (sat.status == Sat::Dead) {
      if (!sat.why.empty()) last_dead = sat.why;
      return std::nullopt;
    }
    std::size_t n = st.pf.size();
    queue.push({n, seq++, std::make_shared<ProofState>(std::move(st)), std::make_shared<std::vector<bool>>(std::move(stuck))});
    return std::nullopt;
  };

  if (auto why = push(initial_state(goal), {})) return finish(Verdict::Refuted, *why);
  while (!queue.empty()) {
    if (ms_since(t0) > static_cast<double>(cfg.timeout_ms)) return finish(Verdict::Timeout, "timeout");
    if (res.states >= cfg.max_states) return finish(Verdict::DepthExhausted, "state limit reached");
    Entry top = queue.top();
    queue.pop();
    ++res.states;
    const ProofState& st = *top.state;
    std::optional<std::size_t> g;
    for (std::size_t v : st.pf.open()) {
      g = v;
      break;
    }
    if (!g) {
      ProofVerdict pv = is_proof(st.pf, rs, cfg.fuel);
      if (!pv.ok) throw Error("internal error: search produced a rejected certificate:\n" + pv.str(st.pf));
      res.proof = st.pf;
      return finish(Verdict::Proved, "proved");
    }
    if (st.depth[*g] >= cfg.depth) {
      depth_hit = true;
      continue;
    }
    for (auto& alt : expand_goal(st, rs, *g, cfg, &timer)) {
      if (ms_since(t0) > static_cast<double>(cfg.timeout_ms)) return finish(Verdict::Timeout, "timeout");
      std::vector<bool> stuck = *top.stuck;
      if (auto why = push(std::move(alt), std::move(stuck))) {
        // a clash reached only through Reduce, Case and Cong refutes the goal
        return finish(Verdict::Refuted, *why);
      }
    }
  }
  return finish(Verdict::DepthExhausted, depth_hit ? "depth bound reached" : "search space exhausted");
}

}  // namespace cycleq
