#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cycleq/ri.hpp"
#include "cycleq/search.hpp"

namespace cycleq {

/// One timed goal. `verdict` is a search verdict name, or "error" when the
/// problem could not be run at all.
struct RunResult {
  std::string problem;
  std::string verdict;
  double total_ms = 0, edge_ms = 0;
  std::string certificate;  // path, when written

  double edge_pct() const { return total_ms > 0 ? 100.0 * edge_ms / total_ms : 0.0; }
  bool proved() const { return verdict == "proved"; }
};

std::string csv_header();
std::string csv_row(const RunResult& r);

/// RI verdicts outside the shared vocabulary count as depth-exhausted.
std::string run_verdict(RIVerdict v);

struct BenchConfig {
  SearchConfig search;
  int runs = 10;
  int workers = 1;
  bool ri = false;  // rewriting induction instead of cyclic search
  std::vector<std::string> prec;
};

struct BenchReport {
  std::vector<RunResult> rows;
  std::size_t solved() const;
  /// "solved k/n (p%)"
  std::string summary() const;
  std::string csv() const;
};

/// Every `.cq` file of `dir` in name order, every goal in file order. Each
/// goal is timed over cfg.runs runs and the means are reported. Failures are
/// recorded per problem.
BenchReport bench(const std::string& dir, const BenchConfig& cfg);

/// Command-line entry point; args exclude the program name. Returns the
/// process exit code: 0 all proved, 1 some unproved, 2 parse or type error,
/// 3 assumption failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cycleq
