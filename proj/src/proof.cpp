#include "cycleq/proof.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "cycleq/parser.hpp"

namespace cycleq {

using nlohmann::json;

std::string rule_name(const RuleInstance& r) {
  static const char* names[] = {"refl", "reduce", "subst", "case", "cong"};
  return names[r.index()];
}

std::size_t Preproof::add(const Equation& eq) {
  vertices.push_back({eq, std::nullopt, {}, false});
  return vertices.size() - 1;
}

std::size_t Preproof::add_hypothesis(const Equation& eq) {
  vertices.push_back({eq, std::nullopt, {}, true});
  return vertices.size() - 1;
}

void Preproof::set_rule(std::size_t v, RuleInstance r, std::vector<std::size_t> premises) {
  vertices.at(v).rule = std::move(r);
  vertices.at(v).premises = std::move(premises);
}

std::vector<std::size_t> Preproof::open() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (!vertices[v].rule && !vertices[v].hypothesis) out.push_back(v);
  return out;
}

std::vector<ProofEdge> edges(const Preproof& pf) {
  std::vector<ProofEdge> out;
  for (std::size_t v = 0; v < pf.size(); ++v)
    for (std::size_t i = 0; i < pf.vertices[v].premises.size(); ++i) out.push_back({v, pf.vertices[v].premises[i], i});
  return out;
}

std::pair<Term, Term> subst_sides(const Preproof& pf, const Subst& s) {
  const Equation& lemma = pf.eq(s.lemma);
  Substitution ren;
  for (const auto& [x, y] : s.renaming) ren[x] = Term::var(y);
  Term m = apply_subst(s.flip ? lemma.rhs : lemma.lhs, ren);
  Term n = apply_subst(s.flip ? lemma.lhs : lemma.rhs, ren);
  return {m, n};
}

// ---------------------------------------------------------------- validation

namespace {

[[noreturn]] void bad(std::size_t v, const std::string& msg) {
  throw ProofError("vertex " + std::to_string(v) + ": " + msg);
}

// Type-level matching: type variables of `pat` are bound consistently.
bool match_type(const TypeExpr& pat, const TypeExpr& t, std::map<std::string, TypeExpr>& s) {
  if (pat.is_var()) {
    auto [it, fresh] = s.emplace(pat.name(), t);
    return fresh || it->second == t;
  }
  if (pat.kind() != t.kind()) return false;
  if (pat.is_arrow()) return match_type(pat.dom(), t.dom(), s) && match_type(pat.cod(), t.cod(), s);
  if (pat.name() != t.name() || pat.args().size() != t.args().size()) return false;
  for (std::size_t i = 0; i < pat.args().size(); ++i)
    if (!match_type(pat.args()[i], t.args()[i], s)) return false;
  return true;
}

// Premise equations must be well-typed in their own env, which may only
// forget variables of the conclusion.
void check_sub_env(std::size_t v, const Equation& concl, const Equation& prem) {
  for (const auto& [x, ty] : prem.env) {
    auto it = concl.env.find(x);
    if (it == concl.env.end() || it->second != ty) bad(v, "premise binds " + x + " differently from the conclusion");
  }
}

void check_typed(std::size_t v, const Signature& sig, const Equation& e) {
  try {
    if (!has_type(sig, e.env, e.lhs, e.type) || !has_type(sig, e.env, e.rhs, e.type))
      bad(v, "equation " + e.str() + " is not of type " + e.type.str());
  } catch (const TypeError& err) {
    bad(v, std::string("ill-typed equation: ") + err.what());
  }
}

bool same_sides(const Term& a, const Term& b, const Equation& e) {
  return (a == e.lhs && b == e.rhs) || (a == e.rhs && b == e.lhs);
}

}  // namespace

void validate_instance(const Preproof& pf, std::size_t v, const RuleSet& rs, long fuel) {
  if (v >= pf.size()) throw ProofError("vertex " + std::to_string(v) + " out of range");
  const Vertex& vx = pf.vertices[v];
  const Signature& sig = rs.sig();
  check_typed(v, sig, vx.eq);
  if (vx.hypothesis) {
    if (vx.rule || !vx.premises.empty()) bad(v, "hypotheses carry no rule");
    return;
  }
  if (!vx.rule) bad(v, "open goal");
  for (std::size_t p : vx.premises)
    if (p >= pf.size()) bad(v, "premise " + std::to_string(p) + " out of range");
  const Equation& e = vx.eq;
  auto prem = [&](std::size_t i) -> const Equation& { return pf.eq(vx.premises[i]); };
  auto arity = [&](std::size_t n) {
    if (vx.premises.size() != n)
      bad(v, rule_name(*vx.rule) + " needs " + std::to_string(n) + " premises, has " +
                 std::to_string(vx.premises.size()));
  };

  if (std::holds_alternative<Refl>(*vx.rule)) {
    arity(0);
    if (e.lhs != e.rhs) bad(v, "refl on distinct sides " + e.str());
  } else if (auto* r = std::get_if<Reduce>(&*vx.rule)) {
    arity(1);
    const Equation& p = prem(0);
    check_sub_env(v, e, p);
    const Term& pl = r->swapped ? p.rhs : p.lhs;
    const Term& pr = r->swapped ? p.lhs : p.rhs;
    Reach a = reduces_to(rs, e.lhs, pl, fuel), b = reduces_to(rs, e.rhs, pr, fuel);
    if (a == Reach::FuelExhausted || b == Reach::FuelExhausted) bad(v, "reduce check ran out of fuel");
    if (a != Reach::Yes) bad(v, "left side " + e.lhs.str() + " does not reduce to " + pl.str());
    if (b != Reach::Yes) bad(v, "right side " + e.rhs.str() + " does not reduce to " + pr.str());
  } else if (auto* s = std::get_if<Subst>(&*vx.rule)) {
    arity(2);
    if (vx.premises[0] != s->lemma) bad(v, "first premise must be the lemma");
    if (s->lemma >= pf.size()) bad(v, "lemma out of range");
    if (s->side != 0 && s->side != 1) bad(v, "side must be 0 or 1");
    const Equation& lemma = pf.eq(s->lemma);
    std::set<std::string> image;
    for (const auto& [x, y] : s->renaming) {
      if (!lemma.env.count(x)) bad(v, "renaming of unknown lemma variable " + x);
      if (e.env.count(y)) bad(v, "renamed variable " + y + " clashes with the goal");
      if (!image.insert(y).second) bad(v, "renaming is not injective");
    }
    for (const auto& [x, ty] : lemma.env)
      if (!s->renaming.count(x)) bad(v, "lemma variable " + x + " is not renamed");
    std::map<std::string, TypeExpr> tys;
    for (const auto& [x, y] : s->renaming) {
      auto it = s->theta.find(y);
      if (it == s->theta.end()) bad(v, "substitution misses " + y);
      TypeExpr ty;
      try {
        ty = typecheck(sig, e.env, it->second);
      } catch (const TypeError& err) {
        bad(v, std::string("ill-typed substitution: ") + err.what());
      }
      if (!match_type(lemma.env.at(x), ty, tys)) bad(v, "substitution for " + y + " has the wrong type");
      for (const auto& tv : ty.type_vars())
        if (tv[0] == '?') bad(v, "substitution for " + y + " has an ambiguous type");
    }
    for (const auto& [y, t] : s->theta)
      if (!image.count(y)) bad(v, "substitution binds " + y + " outside the renamed lemma");
    auto [m, n] = subst_sides(pf, *s);
    const Term& goal_side = e.side(s->side);
    Term found;
    try {
      found = subterm_at(goal_side, s->hole);
    } catch (const PositionError& err) {
      bad(v, err.what());
    }
    if (found != apply_subst(m, s->theta))
      bad(v, "lemma side does not match " + found.str() + " at " + position_str(s->hole));
    Term rewritten = replace_at(goal_side, s->hole, apply_subst(n, s->theta));
    const Equation& c = prem(1);
    check_sub_env(v, e, c);
    if (!same_sides(rewritten, e.side(1 - s->side), c))
      bad(v, "continuation " + c.str() + " is not the rewritten goal");
  } else if (auto* k = std::get_if<Case>(&*vx.rule)) {
    auto it = e.env.find(k->var);
    if (it == e.env.end()) bad(v, "case variable " + k->var + " not in scope");
    if (it->second != k->type) bad(v, "case variable type mismatch");
    if (!k->type.is_data()) bad(v, "cannot case on " + k->var + " of type " + k->type.str());
    const auto& cons = sig.constructors_of(k->type.name());
    arity(cons.size());
    if (k->branches.size() != cons.size()) bad(v, "branch count differs from constructor count");
    for (std::size_t i = 0; i < cons.size(); ++i) {
      const CaseBranch& b = k->branches[i];
      if (b.constructor != cons[i]) bad(v, "branch " + std::to_string(i) + " should be " + cons[i]);
      std::vector<TypeExpr> args = sig.constructor_args(b.constructor, k->type);
      if (args.size() != b.fresh.size()) bad(v, "wrong number of fresh variables for " + b.constructor);
      TypeEnv env = e.env;
      env.erase(k->var);
      std::vector<Term> fv;
      for (std::size_t j = 0; j < args.size(); ++j) {
        if (env.count(b.fresh[j])) bad(v, "variable " + b.fresh[j] + " is not fresh");
        env[b.fresh[j]] = args[j];
        fv.push_back(Term::var(b.fresh[j]));
      }
      Substitution sub{{k->var, Term::apply(Term::con(b.constructor), fv)}};
      const Equation& p = prem(i);
      if (p.env != env) bad(v, "branch " + b.constructor + " has the wrong environment");
      if (!same_sides(apply_subst(e.lhs, sub), apply_subst(e.rhs, sub), p))
        bad(v, "branch " + b.constructor + " is not the instantiated goal");
    }
  } else if (auto* g = std::get_if<Cong>(&*vx.rule)) {
    Term hl = e.lhs.head(), hr = e.rhs.head();
    if (!hl.is_con() || hl != hr || hl.name() != g->constructor) bad(v, "cong needs matching constructor heads");
    std::vector<Term> la = e.lhs.args(), ra = e.rhs.args();
    if (la.size() != ra.size()) bad(v, "cong on partial applications");
    arity(la.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
      check_sub_env(v, e, prem(i));
      if (!same_sides(la[i], ra[i], prem(i))) bad(v, "cong premise " + std::to_string(i) + " mismatch");
    }
  }
}

std::vector<std::string> validate_preproof(const Preproof& pf, const RuleSet& rs, long fuel) {
  std::vector<std::string> errs;
  for (std::size_t v = 0; v < pf.size(); ++v) {
    try {
      validate_instance(pf, v, rs, fuel);
    } catch (const Error& e) {
      errs.push_back(e.what());
    }
  }
  return errs;
}

// ---------------------------------------------------------------- semantics

bool satisfies(const RuleSet& rs, const Substitution& alpha, const Equation& eq, long fuel) {
  return normalize(rs, apply_subst(eq.lhs, alpha), fuel) == normalize(rs, apply_subst(eq.rhs, alpha), fuel);
}

static Substitution restrict_to(const Substitution& a, const TypeEnv& env) {
  Substitution out;
  for (const auto& [x, t] : a)
    if (env.count(x)) out[x] = t;
  return out;
}

std::vector<std::pair<std::size_t, Substitution>> preceding_instances(const Preproof& pf, std::size_t v,
                                                                      const Substitution& alpha,
                                                                      const RuleSet& rs, long fuel) {
  const Vertex& vx = pf.vertices.at(v);
  std::vector<std::pair<std::size_t, Substitution>> out;
  if (!vx.rule) return out;
  if (auto* k = std::get_if<Case>(&*vx.rule)) {
    Term val = normalize(rs, alpha.at(k->var), fuel);
    std::vector<Term> args = val.args();
    for (std::size_t i = 0; i < k->branches.size(); ++i) {
      const CaseBranch& b = k->branches[i];
      if (!val.head().is_con() || val.head().name() != b.constructor) continue;
      Substitution beta = alpha;
      beta.erase(k->var);
      for (std::size_t j = 0; j < b.fresh.size(); ++j) beta[b.fresh[j]] = args.at(j);
      out.emplace_back(i, restrict_to(beta, pf.eq(vx.premises[i]).env));
    }
    return out;
  }
  if (auto* s = std::get_if<Subst>(&*vx.rule)) {
    Substitution beta;
    for (const auto& [x, y] : s->renaming) beta[x] = apply_subst(s->theta.at(y), alpha);
    out.emplace_back(0, beta);
    out.emplace_back(1, restrict_to(alpha, pf.eq(vx.premises[1]).env));
    return out;
  }
  for (std::size_t i = 0; i < vx.premises.size(); ++i)
    out.emplace_back(i, restrict_to(alpha, pf.eq(vx.premises[i]).env));
  return out;
}

// ---------------------------------------------------------------- DOT

static std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string to_dot(const Preproof& pf) {
  std::ostringstream o;
  o << "digraph proof {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t v = 0; v < pf.size(); ++v) {
    const Vertex& x = pf.vertices[v];
    std::string rule = x.hypothesis ? "hyp" : x.rule ? rule_name(*x.rule) : "open";
    if (x.rule)
      if (auto* k = std::get_if<Case>(&*x.rule)) rule += " " + k->var;
    o << "  v" << v << " [label=\"" << v << ": " << dot_escape(pretty_equation(x.eq)) << "\\n(" << rule << ")\"";
    if (x.hypothesis) o << ", style=dashed";
    o << "];\n";
  }
  for (std::size_t v = 0; v < pf.size(); ++v) {
    const Vertex& x = pf.vertices[v];
    for (std::size_t i = 0; i < x.premises.size(); ++i) {
      bool lemma = x.rule && std::holds_alternative<Subst>(*x.rule) && i == 0;
      o << "  v" << v << " -> v" << x.premises[i];
      if (lemma) o << " [style=dashed, color=blue, label=\"lemma\"]";
      o << ";\n";
    }
  }
  o << "}\n";
  return o.str();
}

// ---------------------------------------------------------------- JSON

namespace {

json term_json(const Term& t) {
  if (t.is_var()) return "?" + t.name();
  if (t.is_sym()) return t.name();
  json a = json::array();
  a.push_back(t.head().name());
  if (t.head().is_var()) a[0] = "?" + t.head().name();
  for (const auto& x : t.args()) a.push_back(term_json(x));
  return a;
}

Term term_from(const json& j, const std::set<std::string>& cons) {
  auto atom = [&](const std::string& s) {
    if (s.empty()) throw ProofError("empty term name");
    if (s[0] == '?') return Term::var(s.substr(1));
    return cons.count(s) ? Term::con(s) : Term::fun(s);
  };
  if (j.is_string()) return atom(j.get<std::string>());
  if (!j.is_array() || j.size() < 2 || !j[0].is_string()) throw ProofError("malformed term");
  Term t = atom(j[0].get<std::string>());
  for (std::size_t i = 1; i < j.size(); ++i) t = Term::app(t, term_from(j[i], cons));
  return t;
}

json type_json(const TypeExpr& t) {
  if (t.is_var()) return {{"var", t.name()}};
  if (t.is_arrow()) return {{"arrow", {type_json(t.dom()), type_json(t.cod())}}};
  json args = json::array();
  for (const auto& a : t.args()) args.push_back(type_json(a));
  return {{"data", t.name()}, {"args", args}};
}

TypeExpr type_from(const json& j) {
  if (!j.is_object()) throw ProofError("malformed type");
  if (j.contains("var")) return TypeExpr::var(j.at("var").get<std::string>());
  if (j.contains("arrow")) return TypeExpr::arrow(type_from(j.at("arrow").at(0)), type_from(j.at("arrow").at(1)));
  std::vector<TypeExpr> args;
  for (const auto& a : j.at("args")) args.push_back(type_from(a));
  return TypeExpr::data(j.at("data").get<std::string>(), args);
}

json rule_json(const RuleInstance& r) {
  json j;
  j["rule"] = rule_name(r);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Reduce>) {
          j["swapped"] = x.swapped;
        } else if constexpr (std::is_same_v<T, Subst>) {
          j["lemma"] = x.lemma;
          j["flip"] = x.flip;
          j["side"] = x.side;
          j["hole"] = position_str(x.hole);
          j["renaming"] = x.renaming;
          json th = json::object();
          for (const auto& [y, t] : x.theta) th[y] = term_json(t);
          j["theta"] = th;
        } else if constexpr (std::is_same_v<T, Case>) {
          j["var"] = x.var;
          j["type"] = type_json(x.type);
          json bs = json::array();
          for (const auto& b : x.branches) bs.push_back({{"constructor", b.constructor}, {"fresh", b.fresh}});
          j["branches"] = bs;
        } else if constexpr (std::is_same_v<T, Cong>) {
          j["constructor"] = x.constructor;
        }
      },
      r);
  return j;
}

RuleInstance rule_from(const json& j, const std::set<std::string>& cons) {
  std::string tag = j.at("rule").get<std::string>();
  if (tag == "refl") return Refl{};
  if (tag == "reduce") return Reduce{j.value("swapped", false)};
  if (tag == "subst") {
    Subst s;
    s.lemma = j.at("lemma").get<std::size_t>();
    s.flip = j.at("flip").get<bool>();
    s.side = j.at("side").get<int>();
    s.hole = position_from_str(j.at("hole").get<std::string>());
    s.renaming = j.at("renaming").get<std::map<std::string, std::string>>();
    for (const auto& [y, t] : j.at("theta").items()) s.theta[y] = term_from(t, cons);
    return s;
  }
  if (tag == "case") {
    Case c;
    c.var = j.at("var").get<std::string>();
    c.type = type_from(j.at("type"));
    for (const auto& b : j.at("branches"))
      c.branches.push_back({b.at("constructor").get<std::string>(), b.at("fresh").get<std::vector<std::string>>()});
    return c;
  }
  if (tag == "cong") return Cong{j.at("constructor").get<std::string>()};
  throw ProofError("unknown rule tag " + tag);
}

}  // namespace

std::string to_json(const Preproof& pf, const Signature& sig, const std::string& closure) {
  json root;
  root["format"] = "cycleq-proof";
  root["version"] = 1;
  root["ri-translated"] = pf.ri_translated;
  root["constructors"] = sig.constructor_order();
  json vs = json::array();
  for (std::size_t v = 0; v < pf.size(); ++v) {
    const Vertex& x = pf.vertices[v];
    json env = json::object();
    for (const auto& [name, ty] : x.eq.env) env[name] = type_json(ty);
    json jv = {{"id", v},
               {"env", env},
               {"lhs", term_json(x.eq.lhs)},
               {"rhs", term_json(x.eq.rhs)},
               {"type", type_json(x.eq.type)},
               {"premises", x.premises},
               {"hypothesis", x.hypothesis}};
    jv["rule"] = x.rule ? rule_json(*x.rule) : json(nullptr);
    vs.push_back(jv);
  }
  root["vertices"] = vs;
  if (!closure.empty()) root["closure"] = json::parse(closure);
  return root.dump(2) + "\n";
}

Preproof from_json(const std::string& text) {
  try {
    json root = json::parse(text);
    if (root.value("format", "") != "cycleq-proof") throw ProofError("not a cycleq certificate");
    std::set<std::string> cons;
    for (const auto& c : root.at("constructors")) cons.insert(c.get<std::string>());
    Preproof pf;
    pf.ri_translated = root.value("ri-translated", false);
    std::size_t idx = 0;
    for (const auto& jv : root.at("vertices")) {
      if (jv.at("id").get<std::size_t>() != idx++) throw ProofError("vertex ids must be 0..n-1 in order");
      Vertex x;
      for (const auto& [name, ty] : jv.at("env").items()) x.eq.env[name] = type_from(ty);
      x.eq.lhs = term_from(jv.at("lhs"), cons);
      x.eq.rhs = term_from(jv.at("rhs"), cons);
      x.eq.type = type_from(jv.at("type"));
      x.premises = jv.at("premises").get<std::vector<std::size_t>>();
      x.hypothesis = jv.value("hypothesis", false);
      if (!jv.at("rule").is_null()) x.rule = rule_from(jv.at("rule"), cons);
      pf.vertices.push_back(std::move(x));
    }
    return pf;
  } catch (const json::exception& e) {
    throw ProofError(std::string("malformed certificate: ") + e.what());
  }
}

}  // namespace cycleq
