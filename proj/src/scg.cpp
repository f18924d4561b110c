#include "cycleq/scg.hpp"

#include <algorithm>
#include <deque>
#include <json.hpp>

namespace cycleq {

void SizeChangeGraph::add(std::uint16_t x, std::uint16_t y, Label l) {
  auto it = std::lower_bound(arcs.begin(), arcs.end(), Arc{x, y, Label::NonIncr},
                             [](const Arc& a, const Arc& b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });
  if (it != arcs.end() && it->x == x && it->y == y) {
    if (l > it->label) it->label = l;
    return;
  }
  arcs.insert(it, Arc{x, y, l});
}

bool SizeChangeGraph::has_decreasing_self_arc() const {
  for (const auto& a : arcs)
    if (a.x == a.y && a.label == Label::Decr) return true;
  return false;
}

bool SizeChangeGraph::idempotent() const { return source == target && compose(*this, *this) == *this; }

static std::string var_name(const Preproof* pf, std::size_t v, std::uint16_t i) {
  if (!pf) return "#" + std::to_string(i);
  auto it = pf->eq(v).env.begin();
  std::advance(it, i);
  return it->first;
}

std::string SizeChangeGraph::str(const Preproof* pf) const {
  std::string s = std::to_string(source) + " -> " + std::to_string(target) + " {";
  bool first = true;
  for (const auto& a : arcs) {
    s += (first ? "" : ", ") + var_name(pf, source, a.x) + (a.label == Label::Decr ? " > " : " >= ") +
         var_name(pf, target, a.y);
    first = false;
  }
  return s + "}";
}

int env_index(const TypeEnv& env, const std::string& x) {
  int i = 0;
  for (const auto& [name, ty] : env) {
    if (name == x) return i;
    ++i;
  }
  return -1;
}

SizeChangeGraph edge_scg(const Preproof& pf, std::size_t v, std::size_t index) {
  const Vertex& vx = pf.vertices.at(v);
  if (index >= vx.premises.size()) throw ProofError("vertex " + std::to_string(v) + " has no premise " + std::to_string(index));
  std::size_t w = vx.premises[index];
  SizeChangeGraph g{v, w, {}};
  const TypeEnv& src = vx.eq.env;
  const TypeEnv& tgt = pf.eq(w).env;
  auto idx = [](const TypeEnv& env, const std::string& x) { return static_cast<std::uint16_t>(env_index(env, x)); };

  if (vx.rule && index == 0)
    if (auto* s = std::get_if<Subst>(&*vx.rule)) {
      for (const auto& [y, renamed] : s->renaming) {
        auto it = s->theta.find(renamed);
        if (it == s->theta.end() || !it->second.is_var()) continue;
        int xi = env_index(src, it->second.name()), yi = env_index(tgt, y);
        if (xi >= 0 && yi >= 0) g.add(xi, yi, Label::NonIncr);
      }
      return g;
    }
  if (vx.rule)
    if (auto* k = std::get_if<Case>(&*vx.rule)) {
      int xi = env_index(src, k->var);
      for (const auto& y : k->branches.at(index).fresh) {
        int yi = env_index(tgt, y);
        if (xi >= 0 && yi >= 0) g.add(xi, yi, Label::Decr);
      }
      const auto& fresh = k->branches.at(index).fresh;
      for (const auto& [z, ty] : src) {
        if (z == k->var || std::find(fresh.begin(), fresh.end(), z) != fresh.end()) continue;
        if (tgt.count(z)) g.add(idx(src, z), idx(tgt, z), Label::NonIncr);
      }
      return g;
    }
  for (const auto& [z, ty] : src)
    if (tgt.count(z)) g.add(idx(src, z), idx(tgt, z), Label::NonIncr);
  return g;
}

SizeChangeGraph edge_scg_to(const Preproof& pf, std::size_t v, std::size_t w) {
  const Vertex& vx = pf.vertices.at(v);
  for (std::size_t i = 0; i < vx.premises.size(); ++i)
    if (vx.premises[i] == w) return edge_scg(pf, v, i);
  throw ProofError("no edge from " + std::to_string(v) + " to " + std::to_string(w));
}

SizeChangeGraph compose(const SizeChangeGraph& g, const SizeChangeGraph& h) {
  if (g.target != h.source) throw Error("cannot compose graphs through different vertices");
  SizeChangeGraph r{g.source, h.target, {}};
  for (const auto& a : g.arcs)
    for (const auto& b : h.arcs)
      if (a.y == b.x) r.add(a.x, b.y, std::max(a.label, b.label));
  return r;
}

// ---------------------------------------------------------------- closure

bool Closure::contains(const SizeChangeGraph& g) const {
  auto it = by_pair_.find({g.source, g.target});
  return it != by_pair_.end() && it->second.count(g.arcs);
}

bool Closure::insert(const SizeChangeGraph& g) {
  if (!by_pair_[{g.source, g.target}].insert(g.arcs).second) return false;
  sources_of_[g.target].insert(g.source);
  ++count_;
  return true;
}

std::vector<SizeChangeGraph> Closure::graphs() const {
  std::vector<SizeChangeGraph> out;
  for (const auto& [k, set] : by_pair_)
    for (const auto& arcs : set) out.push_back({k.first, k.second, arcs});
  return out;
}

std::vector<SizeChangeGraph> Closure::from(std::size_t v) const {
  std::vector<SizeChangeGraph> out;
  for (auto it = by_pair_.lower_bound({v, 0}); it != by_pair_.end() && it->first.first == v; ++it)
    for (const auto& arcs : it->second) out.push_back({v, it->first.second, arcs});
  return out;
}

std::vector<SizeChangeGraph> Closure::into(std::size_t v) const {
  std::vector<SizeChangeGraph> out;
  auto s = sources_of_.find(v);
  if (s == sources_of_.end()) return out;
  for (std::size_t u : s->second)
    for (const auto& arcs : by_pair_.at({u, v})) out.push_back({u, v, arcs});
  return out;
}

void incremental_add(Closure& cl, const std::vector<SizeChangeGraph>& gs) {
  std::deque<SizeChangeGraph> work(gs.begin(), gs.end());
  while (!work.empty()) {
    SizeChangeGraph g = std::move(work.front());
    work.pop_front();
    if (!cl.insert(g)) continue;
    for (const auto& h : cl.from(g.target)) work.push_back(compose(g, h));
    for (const auto& h : cl.into(g.source)) work.push_back(compose(h, g));
  }
}

Closure closure_of(const std::vector<SizeChangeGraph>& gs) {
  Closure cl;
  incremental_add(cl, gs);
  return cl;
}

std::vector<SizeChangeGraph> edge_graphs(const Preproof& pf) {
  std::vector<SizeChangeGraph> out;
  for (const auto& e : edges(pf)) out.push_back(edge_scg(pf, e.source, e.index));
  return out;
}

Closure closure(const Preproof& pf) { return closure_of(edge_graphs(pf)); }

Soundness check_soundness(const Closure& cl) {
  for (const auto& [k, set] : cl.table()) {
    if (k.first != k.second) continue;
    for (const auto& arcs : set) {
      SizeChangeGraph g{k.first, k.second, arcs};
      if (g.has_decreasing_self_arc()) continue;
      if (compose(g, g) == g) return {false, g};
    }
  }
  return {true, std::nullopt};
}

ProofVerdict is_proof(const Preproof& pf, const RuleSet& rs, long fuel) {
  ProofVerdict v;
  v.errors = validate_preproof(pf, rs, fuel);
  for (std::size_t i = 0; i < pf.size(); ++i)
    if (pf.vertices[i].hypothesis) v.errors.push_back("vertex " + std::to_string(i) + ": unproven hypothesis");
  if (!v.errors.empty()) return v;
  Soundness s = check_soundness(closure(pf));
  v.witness = s.witness;
  v.ok = s.sound;
  return v;
}

std::string ProofVerdict::str(const Preproof& pf) const {
  if (ok) return "proof accepted";
  std::string s;
  for (const auto& e : errors) s += "invalid: " + e + "\n";
  if (witness) s += "unsound: idempotent loop without decrease: " + witness->str(&pf) + "\n";
  return s;
}

std::string closure_json(const Closure& cl, const Preproof& pf) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : cl.graphs()) {
    nlohmann::json arcs = nlohmann::json::array();
    for (const auto& a : g.arcs)
      arcs.push_back({var_name(&pf, g.source, a.x), a.label == Label::Decr ? "<" : "=", var_name(&pf, g.target, a.y)});
    out.push_back({{"source", g.source}, {"target", g.target}, {"arcs", arcs}});
  }
  return out.dump();
}

}  // namespace cycleq
