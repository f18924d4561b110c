#include "cycleq/rewrite.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_set>

namespace cycleq {

const std::string& RewriteRule::head() const { return lhs.head().name(); }

namespace {

bool is_pattern(const Term& p) {
  if (p.is_var()) return true;
  Term h = p.head();
  if (!h.is_con()) return false;
  for (const auto& a : p.args())
    if (!is_pattern(a)) return false;
  return true;
}

std::string where(const RewriteRule& r) {
  std::string s = "rule '" + r.str() + "'";
  if (r.line > 0) s += " (line " + std::to_string(r.line) + ")";
  return s;
}

void collect_vars(const Term& t, std::vector<std::string>& out) {
  if (t.is_var())
    out.push_back(t.name());
  else if (t.is_app()) {
    collect_vars(t.fn(), out);
    collect_vars(t.arg(), out);
  }
}

std::optional<std::string> repeated_var(const Term& t) {
  std::vector<std::string> vs;
  collect_vars(t, vs);
  std::set<std::string> seen;
  for (const auto& v : vs)
    if (!seen.insert(v).second) return v;
  return std::nullopt;
}

}  // namespace

void validate_rule(const Signature& sig, const RewriteRule& r) {
  Term h = r.lhs.head();
  if (!h.is_fun() || !sig.is_defined(h.name()))
    throw RuleError(where(r) + ": left-hand side must be headed by a defined function");
  for (const auto& a : r.lhs.args())
    if (!is_pattern(a))
      throw RuleError(where(r) + ": argument '" + a.str() + "' is not a constructor pattern");
  if (auto v = repeated_var(r.lhs)) throw RuleError(where(r) + ": variable " + *v + " repeated in left-hand side");
  auto lv = free_vars(r.lhs);
  for (const auto& v : free_vars(r.rhs))
    if (!lv.count(v)) throw RuleError(where(r) + ": variable " + v + " not bound by the left-hand side");
  for (const auto& v : lv)
    if (!r.env.count(v)) throw RuleError(where(r) + ": variable " + v + " has no type");
  try {
    typecheck(sig, r.env, r.lhs);
    // sides are typed together so that polymorphic constructors unify
    TypeExpr common;
    infer_env(sig, r.env, {r.lhs, r.rhs}, &common, true);
    if (common.is_arrow()) throw TypeError("rules must produce data, not " + common.str());
  } catch (const TypeError& e) {
    throw RuleError(where(r) + ": " + e.what());
  }
}

RuleSet::RuleSet(Signature sig, std::vector<RewriteRule> rules) : sig_(std::move(sig)), rules_(std::move(rules)) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    validate_rule(sig_, rules_[i]);
    by_head_[rules_[i].head()].push_back(i);
  }
}

const std::vector<std::size_t>& RuleSet::rules_for(const std::string& f) const {
  static const std::vector<std::size_t> none;
  auto it = by_head_.find(f);
  return it == by_head_.end() ? none : it->second;
}

// ---------------------------------------------------------------- reduction

std::optional<Term> root_step(const RuleSet& rs, const Term& t, std::size_t* rule) {
  Term h = t.head();
  if (!h.is_fun()) return std::nullopt;
  for (std::size_t i : rs.rules_for(h.name())) {
    const RewriteRule& r = rs.rules()[i];
    if (auto s = match(r.lhs, t)) {
      if (rule) *rule = i;
      return apply_subst(r.rhs, *s);
    }
  }
  return std::nullopt;
}

namespace {

bool lo_step(const RuleSet& rs, const Term& t, Position& pos, std::size_t& rule, Term& out) {
  if (auto r = root_step(rs, t, &rule)) {
    out = *r;
    return true;
  }
  if (!t.is_app()) return false;
  pos.push_back(Step::Fn);
  Term sub;
  if (lo_step(rs, t.fn(), pos, rule, sub)) {
    out = Term::app(sub, t.arg());
    return true;
  }
  pos.back() = Step::Arg;
  if (lo_step(rs, t.arg(), pos, rule, sub)) {
    out = Term::app(t.fn(), sub);
    return true;
  }
  pos.pop_back();
  return false;
}

}  // namespace

std::optional<Redex> step_redex(const RuleSet& rs, const Term& t) {
  Redex r;
  if (!lo_step(rs, t, r.pos, r.rule, r.result)) return std::nullopt;
  return r;
}

std::optional<Term> step(const RuleSet& rs, const Term& t) {
  if (auto r = step_redex(rs, t)) return r->result;
  return std::nullopt;
}

std::vector<Redex> all_steps(const RuleSet& rs, const Term& t) {
  std::vector<Redex> out;
  for (const auto& p : positions(t)) {
    std::size_t rule = 0;
    if (auto r = root_step(rs, subterm_at(t, p), &rule)) out.push_back(Redex{p, rule, replace_at(t, p, *r)});
  }
  return out;
}

NormalizeOutcome normalize_bounded(const RuleSet& rs, const Term& t, long fuel) {
  NormalizeOutcome out{t, 0, false};
  while (true) {
    auto s = step(rs, out.term);
    if (!s) return out;
    if (out.steps >= fuel) {
      out.exhausted = true;
      return out;
    }
    out.term = *s;
    ++out.steps;
  }
}

Term normalize(const RuleSet& rs, const Term& t, long fuel) {
  auto r = normalize_bounded(rs, t, fuel);
  if (r.exhausted) throw FuelExhausted("normalisation of " + t.str() + " exceeded " + std::to_string(fuel) + " steps");
  return r.term;
}

Reach reduces_to(const RuleSet& rs, const Term& m, const Term& n, long fuel) {
  if (m == n) return Reach::Yes;
  auto nf = normalize_bounded(rs, m, fuel);
  if (!nf.exhausted && nf.term == n) return Reach::Yes;
  std::unordered_set<Term, TermHash> seen{m};
  std::deque<Term> q{m};
  long expansions = 0;
  while (!q.empty()) {
    if (expansions >= fuel) return Reach::FuelExhausted;
    Term t = q.front();
    q.pop_front();
    ++expansions;
    for (auto& r : all_steps(rs, t)) {
      if (r.result == n) return Reach::Yes;
      if (seen.insert(r.result).second) q.push_back(r.result);
    }
  }
  return Reach::No;
}

// ---------------------------------------------------------------- completeness

namespace {

const Term kWild = Term::var("_");

std::vector<std::vector<Term>> uncovered(const Signature& sig, const std::vector<std::vector<Term>>& rows,
                                         const std::vector<TypeExpr>& types, std::size_t limit) {
  if (types.empty()) {
    if (rows.empty()) return {{}};
    return {};
  }
  const TypeExpr& t0 = types[0];
  std::vector<TypeExpr> rest_types(types.begin() + 1, types.end());
  bool splits = false;
  for (const auto& r : rows)
    if (!r[0].is_var()) splits = true;
  std::vector<std::vector<Term>> out;
  if (splits && t0.is_data() && sig.has_datatype(t0.name())) {
    for (const auto& k : sig.constructors_of(t0.name())) {
      std::vector<TypeExpr> kargs = sig.constructor_args(k, t0);
      std::vector<std::vector<Term>> spec;
      for (const auto& r : rows) {
        std::vector<Term> row;
        if (r[0].is_var()) {
          row.assign(kargs.size(), kWild);
        } else if (r[0].head().name() == k) {
          row = r[0].args();
        } else {
          continue;
        }
        row.insert(row.end(), r.begin() + 1, r.end());
        spec.push_back(std::move(row));
      }
      std::vector<TypeExpr> sub_types = kargs;
      sub_types.insert(sub_types.end(), rest_types.begin(), rest_types.end());
      for (auto& u : uncovered(sig, spec, sub_types, limit)) {
        std::vector<Term> kas(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(kargs.size()));
        std::vector<Term> row{Term::apply(Term::con(k), kas)};
        row.insert(row.end(), u.begin() + static_cast<std::ptrdiff_t>(kargs.size()), u.end());
        out.push_back(std::move(row));
        if (out.size() >= limit) return out;
      }
    }
    return out;
  }
  std::vector<std::vector<Term>> def;
  for (const auto& r : rows)
    if (r[0].is_var()) def.emplace_back(r.begin() + 1, r.end());
  for (auto& u : uncovered(sig, def, rest_types, limit)) {
    u.insert(u.begin(), kWild);
    out.push_back(std::move(u));
    if (out.size() >= limit) return out;
  }
  return out;
}

}  // namespace

CompletenessReport check_completeness(const RuleSet& rs) {
  CompletenessReport rep;
  const Signature& sig = rs.sig();
  for (const auto& f : sig.function_order()) {
    const auto& idx = rs.rules_for(f);
    if (idx.empty()) {
      rep.no_rules.push_back(f);
      continue;
    }
    std::size_t n = rs.rules()[idx[0]].lhs.nargs();
    std::vector<std::vector<Term>> rows;
    for (std::size_t i : idx) {
      auto as = rs.rules()[i].lhs.args();
      if (as.size() != n) {
        rep.missing.push_back({f, {}});
        rows.clear();
        break;
      }
      rows.push_back(as);
    }
    if (rows.empty()) continue;
    auto doms = sig.type_of(f).domains();
    std::vector<TypeExpr> types;
    for (std::size_t i = 0; i < n; ++i) types.push_back(i < doms.size() ? doms[i] : TypeExpr::var("?"));
    for (auto& u : uncovered(sig, rows, types, 8)) rep.missing.push_back({f, u});
  }
  return rep;
}

std::string CompletenessReport::str() const {
  if (complete()) return "complete";
  std::string s;
  for (const auto& f : no_rules) s += "function " + f + " has no rules\n";
  for (const auto& m : missing) {
    s += "function " + m.function + " misses case";
    if (m.patterns.empty()) s += " (rules disagree on arity)";
    for (const auto& p : m.patterns) s += " " + (p.is_app() ? "(" + p.str() + ")" : p.str());
    s += "\n";
  }
  return s;
}

// ---------------------------------------------------------------- orthogonality

namespace {

Term rename_vars(const Term& t, const std::string& suffix) {
  Substitution s;
  for (const auto& v : free_vars(t)) s[v] = Term::var(v + suffix);
  return apply_subst(t, s);
}

}  // namespace

OrthogonalityReport check_orthogonality(const RuleSet& rs) {
  OrthogonalityReport rep;
  const auto& rules = rs.rules();
  for (std::size_t i = 0; i < rules.size(); ++i)
    if (repeated_var(rules[i].lhs)) {
      rep.non_linear.push_back(rules[i].str());
      rep.messages.push_back("non-left-linear rule: " + rules[i].str());
    }
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = i + 1; j < rules.size(); ++j) {
      if (rules[i].head() != rules[j].head()) continue;
      Term a = rename_vars(rules[i].lhs, "#1");
      Term b = rename_vars(rules[j].lhs, "#2");
      // Rules of different arity overlap on the shorter prefix.
      while (a.nargs() > b.nargs()) a = a.fn();
      while (b.nargs() > a.nargs()) b = b.fn();
      if (unify(a, b)) {
        rep.overlaps.emplace_back(i, j);
        rep.messages.push_back("overlapping rules: " + rules[i].str() + " and " + rules[j].str());
      }
    }
  }
  return rep;
}

std::string OrthogonalityReport::str() const {
  if (orthogonal()) return "orthogonal";
  std::string s;
  for (const auto& m : messages) s += m + "\n";
  return s;
}

// ---------------------------------------------------------------- blocking variable

namespace {

struct Block {
  enum Kind { Ok, Clash, Var, Stuck } kind = Ok;
  std::vector<std::size_t> key;  // argument path, for leftmost comparison
  Term at;                       // the blocking variable or stuck subterm
};

Block classify(const Term& p, const Term& t, std::vector<std::size_t>& path) {
  if (p.is_var()) return {};
  if (t.is_var()) return {Block::Var, path, t};
  Term th = t.head();
  if (!th.is_con()) return {Block::Stuck, path, t};
  Term ph = p.head();
  if (ph.name() != th.name() || p.nargs() != t.nargs()) return {Block::Clash, {}, {}};
  auto ps = p.args();
  auto ts = t.args();
  std::optional<Block> first;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    path.push_back(i);
    Block b = classify(ps[i], ts[i], path);
    path.pop_back();
    if (b.kind == Block::Clash) return b;
    if (b.kind != Block::Ok && !first) first = b;
  }
  return first ? *first : Block{};
}

std::optional<std::string> visit(const RuleSet& rs, const Term& t) {
  Term h = t.head();
  auto args = t.args();
  if (h.is_fun()) {
    std::optional<Block> best;
    for (std::size_t ri : rs.rules_for(h.name())) {
      const RewriteRule& r = rs.rules()[ri];
      auto ps = r.lhs.args();
      if (ps.size() > args.size()) continue;
      std::optional<Block> first;
      bool clash = false;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        std::vector<std::size_t> path{i};
        Block b = classify(ps[i], args[i], path);
        if (b.kind == Block::Clash) {
          clash = true;
          break;
        }
        if (b.kind != Block::Ok && !first) first = b;
      }
      if (clash || !first) continue;
      if (!best || first->key < best->key) best = first;
    }
    if (best) {
      if (best->kind == Block::Var) return best->at.name();
      if (auto v = visit(rs, best->at)) return v;
    }
  }
  for (const auto& a : args)
    if (auto v = visit(rs, a)) return v;
  return std::nullopt;
}

}  // namespace

std::optional<std::string> blocking_variable(const RuleSet& rs, const Term& t) { return visit(rs, t); }

}  // namespace cycleq
