#include "cycleq/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cycleq/scg.hpp"

namespace fs = std::filesystem;

namespace cycleq {

namespace {

std::string fixed(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(workers, static_cast<int>(n)); ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct Options {
  SearchConfig search;
  std::string dot_dir, json_dir, csv_path, prec, goal;
  int runs = 10, workers = 1;
  bool verbose_closure = false, ri = false;
};

// Loads a program, turning failures into exit codes.
struct Loaded {
  std::optional<Program> prog;
  int code = 0;
};

Loaded load(const std::string& path, std::ostream& err, bool need_assumptions = true) {
  Loaded l;
  try {
    l.prog = parse_file(path);
  } catch (const ParseError& e) {
    for (const auto& d : e.diagnostics()) err << path << ":" << d.str() << "\n";
    l.code = 2;
    return l;
  } catch (const Error& e) {
    err << path << ": " << e.what() << "\n";
    l.code = 2;
    return l;
  }
  if (need_assumptions && !l.prog->assumptions_ok()) {
    err << path << ": program violates the assumptions\n"
        << l.prog->completeness.str() << l.prog->orthogonality.str();
    l.code = 3;
  }
  return l;
}

std::string cert_stem(const std::string& file, const std::string& goal) {
  return fs::path(file).stem().string() + "." + goal;
}

struct GoalOutcome {
  RunResult result;
  std::string report;
};

GoalOutcome prove_goal(const Program& prog, const Goal& g, const std::string& file, const Options& opt) {
  GoalOutcome o;
  o.result.problem = g.name;
  SearchResult r = prove(prog, g.eq, opt.search);
  o.result.verdict = verdict_str(r.verdict);
  o.result.total_ms = r.total_ms;
  o.result.edge_ms = r.edge_ms;
  std::ostringstream rep;
  rep << g.name << ": " << o.result.verdict;
  if (r.proof) rep << " (" << r.proof->size() << " vertices";
  else rep << " (" << r.states << " states";
  rep << ", " << fixed(r.total_ms, 1) << " ms, edge " << fixed(r.edge_ms, 1) << " ms)";
  if (!r.proof && !r.message.empty() && r.message != o.result.verdict) rep << ": " << r.message;
  rep << "\n";
  if (r.proof) {
    const Preproof& pf = *r.proof;
    for (std::size_t v = 0; v < pf.size(); ++v) {
      const Vertex& x = pf.vertices[v];
      rep << "  " << v << ": " << pretty_equation(x.eq) << "  [" << (x.rule ? rule_name(*x.rule) : "open") << "]";
      for (auto p : x.premises) rep << " " << p;
      rep << "\n";
    }
    Closure cl = closure(pf);
    if (opt.verbose_closure) {
      rep << "  closure (" << cl.size() << " graphs):\n";
      for (const auto& gr : cl.graphs()) rep << "    " << gr.str(&pf) << "\n";
    }
    std::string stem = cert_stem(file, g.name);
    if (!opt.dot_dir.empty()) write_file(fs::path(opt.dot_dir) / (stem + ".dot"), to_dot(pf));
    if (!opt.json_dir.empty()) {
      fs::path p = fs::path(opt.json_dir) / (stem + ".json");
      write_file(p, to_json(pf, prog.sig, closure_json(cl, pf)));
      o.result.certificate = p.string();
    }
  }
  o.report = rep.str();
  return o;
}

GoalOutcome ri_goal(const Program& prog, const Goal& g, const std::string& file, const Options& opt) {
  GoalOutcome o;
  o.result.problem = g.name;
  std::ostringstream rep;
  auto t0 = std::chrono::steady_clock::now();
  Precedence prec = make_precedence(prog.sig, split_commas(opt.prec));
  RILimits lim;
  lim.fuel = opt.search.fuel;
  lim.timeout_ms = opt.search.timeout_ms;
  RIResult r = ri_prove(prog, {g.eq}, prec, lim);
  std::optional<Preproof> pf;
  std::vector<std::string> errors;
  if (r.verdict == RIVerdict::Proved) {
    pf = translate(prog.rules, r.derivation, opt.search.fuel);
    errors = validate_preproof(*pf, prog.rules, opt.search.fuel);
  }
  o.result.total_ms = ms_since(t0);
  o.result.verdict = errors.empty() ? run_verdict(r.verdict) : "error";
  rep << g.name << ": " << ri_verdict_str(r.verdict) << " (" << r.derivation.steps.size() << " steps";
  if (pf) rep << ", " << pf->size() << " vertices";
  rep << ", " << fixed(o.result.total_ms, 1) << " ms)";
  if (!r.message.empty()) rep << ": " << r.message;
  rep << "\n";
  for (const auto& e : errors) rep << "  invalid translation: " << e << "\n";
  if (pf) {
    std::string stem = cert_stem(file, g.name);
    if (!opt.dot_dir.empty()) write_file(fs::path(opt.dot_dir) / (stem + ".dot"), to_dot(*pf));
    if (!opt.json_dir.empty()) {
      fs::path p = fs::path(opt.json_dir) / (stem + ".json");
      write_file(p, to_json(*pf, prog.sig));
      o.result.certificate = p.string();
    }
  }
  o.report = rep.str();
  return o;
}

std::string solved_line(std::size_t k, std::size_t n) {
  double pct = n ? 100.0 * static_cast<double>(k) / static_cast<double>(n) : 0.0;
  return "solved " + std::to_string(k) + "/" + std::to_string(n) + " (" + fixed(pct, 1) + "%)";
}

int cmd_goals(const std::vector<std::string>& files, const Options& opt, std::ostream& out, std::ostream& err) {
  std::size_t solved = 0, total = 0;
  for (const auto& file : files) {
    Loaded l = load(file, err);
    if (l.code) return l.code;
    std::vector<const Goal*> goals;
    for (const auto& g : l.prog->goals)
      if (opt.goal.empty() || g.name == opt.goal) goals.push_back(&g);
    if (!opt.goal.empty() && goals.empty()) {
      err << file << ": no goal named " << opt.goal << "\n";
      return 2;
    }
    std::vector<GoalOutcome> outs(goals.size());
    try {
      parallel_for(goals.size(), opt.workers, [&](std::size_t i) {
        outs[i] = opt.ri ? ri_goal(*l.prog, *goals[i], file, opt) : prove_goal(*l.prog, *goals[i], file, opt);
      });
    } catch (const Error& e) {
      err << file << ": " << e.what() << "\n";
      return 2;
    }
    for (const auto& o : outs) {
      out << o.report;
      ++total;
      if (o.result.proved()) ++solved;
    }
  }
  out << solved_line(solved, total) << "\n";
  return solved == total ? 0 : 1;
}

int cmd_check(const std::string& cert_path, const std::string& prog_path, const Options& opt, std::ostream& out,
              std::ostream& err) {
  Loaded l = load(prog_path, err);
  if (l.code) return l.code;
  Preproof pf;
  try {
    pf = from_json(read_file(cert_path));
  } catch (const Error& e) {
    err << cert_path << ": " << e.what() << "\n";
    return 2;
  }
  if (pf.ri_translated) {
    auto errors = validate_preproof(pf, l.prog->rules, opt.search.fuel);
    for (const auto& e : errors) out << "invalid: " << e << "\n";
    if (!errors.empty()) return 1;
    out << "accepted (ri-translated, structural check only)\n";
    return 0;
  }
  ProofVerdict v = is_proof(pf, l.prog->rules, opt.search.fuel);
  out << v.str(pf);
  if (v.ok) out << "\n";
  if (opt.verbose_closure && v.errors.empty())
    for (const auto& g : closure(pf).graphs()) out << "  " << g.str(&pf) << "\n";
  return v.ok ? 0 : 1;
}

}  // namespace

// ---------------------------------------------------------------- bench

std::string csv_header() { return "problem,total_ms,edge_ms,edge_pct,verdict"; }

std::string csv_row(const RunResult& r) {
  return r.problem + "," + fixed(r.total_ms) + "," + fixed(r.edge_ms) + "," + fixed(r.edge_pct(), 2) + "," + r.verdict;
}

std::string run_verdict(RIVerdict v) {
  switch (v) {
    case RIVerdict::Proved: return "proved";
    case RIVerdict::Unorientable: return "unorientable";
    default: return "depth-exhausted";
  }
}

std::size_t BenchReport::solved() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const RunResult& r) { return r.proved(); }));
}

std::string BenchReport::summary() const { return solved_line(solved(), rows.size()); }

std::string BenchReport::csv() const {
  std::string s = csv_header() + "\n";
  for (const auto& r : rows) s += csv_row(r) + "\n";
  return s;
}

BenchReport bench(const std::string& dir, const BenchConfig& cfg) {
  if (cfg.runs < 1) throw Error("runs must be positive");
  if (!fs::is_directory(dir)) throw Error(dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".cq") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  struct Job {
    std::string problem;
    std::shared_ptr<Program> prog;
    const Goal* goal = nullptr;
    std::string error;
  };
  std::vector<Job> jobs;
  for (const auto& f : files) {
    std::string stem = f.stem().string();
    auto prog = std::make_shared<Program>();
    try {
      *prog = parse_file(f.string());
    } catch (const Error& e) {
      jobs.push_back({stem, nullptr, nullptr, e.what()});
      continue;
    }
    if (!prog->assumptions_ok()) {
      jobs.push_back({stem, nullptr, nullptr, "assumptions"});
      continue;
    }
    for (const auto& g : prog->goals) jobs.push_back({stem + "/" + g.name, prog, &g, ""});
  }

  BenchReport rep;
  rep.rows.resize(jobs.size());
  Options opt;
  opt.search = cfg.search;
  opt.prec = "";
  for (std::size_t i = 0; i < cfg.prec.size(); ++i) opt.prec += (i ? "," : "") + cfg.prec[i];
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const Job& j = jobs[i];
    RunResult& row = rep.rows[i];
    row.problem = j.problem;
    if (!j.goal) {
      row.verdict = "error";
      return;
    }
    double total = 0, edge = 0;
    try {
      for (int k = 0; k < cfg.runs; ++k) {
        GoalOutcome o = cfg.ri ? ri_goal(*j.prog, *j.goal, j.problem, opt) : prove_goal(*j.prog, *j.goal, j.problem, opt);
        total += o.result.total_ms;
        edge += o.result.edge_ms;
        row.verdict = o.result.verdict;
      }
    } catch (const Error&) {
      row.verdict = "error";
    }
    row.total_ms = total / cfg.runs;
    row.edge_ms = edge / cfg.runs;
  });
  return rep;
}

// ---------------------------------------------------------------- entry

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cyclic equational prover for functional programs", "cycleq"};
  app.require_subcommand(1);
  Options opt;
  std::vector<std::string> files;
  std::string cert, program, suite;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--depth", opt.search.depth, "depth bound")->capture_default_str();
    sub->add_option("--timeout", opt.search.timeout_ms, "per-goal timeout in ms")->capture_default_str();
    sub->add_option("--fuel", opt.search.fuel, "normalisation step budget")->capture_default_str();
    sub->add_option("--dot", opt.dot_dir, "write DOT graphs into DIR");
    sub->add_option("--json", opt.json_dir, "write JSON certificates into DIR");
    sub->add_option("--prec", opt.prec, "LPO precedence prefix, greatest first: f,g,...");
    sub->add_option("--workers", opt.workers, "goals run in parallel")->capture_default_str();
    sub->add_flag("--verbose-closure", opt.verbose_closure, "print the size-change closure");
  };

  auto* prove_cmd = app.add_subcommand("prove", "search for cyclic proofs of every goal");
  common(prove_cmd);
  prove_cmd->add_option("--goal", opt.goal, "only this goal");
  prove_cmd->add_option("files", files, "program files")->required();

  auto* ri_cmd = app.add_subcommand("ri", "rewriting induction on every goal");
  common(ri_cmd);
  ri_cmd->add_option("--goal", opt.goal, "only this goal");
  ri_cmd->add_option("files", files, "program files")->required();

  auto* check_cmd = app.add_subcommand("check", "check a JSON certificate against a program");
  common(check_cmd);
  check_cmd->add_option("certificate", cert)->required();
  check_cmd->add_option("program", program)->required();

  auto* bench_cmd = app.add_subcommand("bench", "time every goal of a suite directory");
  common(bench_cmd);
  bench_cmd->add_option("suite", suite)->required();
  bench_cmd->add_option("--csv", opt.csv_path, "write the CSV here instead of stdout");
  bench_cmd->add_option("--runs", opt.runs, "runs per goal")->capture_default_str();
  bench_cmd->add_flag("--ri", opt.ri, "use rewriting induction");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    opt.search.validate();
    if (opt.workers < 1) throw Error("workers must be positive");
    if (*prove_cmd) return cmd_goals(files, opt, out, err);
    if (*ri_cmd) {
      opt.ri = true;
      return cmd_goals(files, opt, out, err);
    }
    if (*check_cmd) return cmd_check(cert, program, opt, out, err);
    BenchConfig cfg;
    cfg.search = opt.search;
    cfg.runs = opt.runs;
    cfg.workers = opt.workers;
    cfg.ri = opt.ri;
    cfg.prec = split_commas(opt.prec);
    BenchReport rep = bench(suite, cfg);
    if (opt.csv_path.empty()) out << rep.csv();
    else write_file(fs::absolute(opt.csv_path), rep.csv());
    for (const auto& r : rep.rows)
      if (!r.proved()) out << r.problem << ": " << r.verdict << "\n";
    out << rep.summary() << "\n";
    return rep.solved() == rep.rows.size() ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cycleq
