#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ocsim/experiment.hpp"
#include "ocsim/metrics.hpp"

namespace ocsim {

// One (circuit mode, rule mode, seed) simulation cell of an experiment.
// `index` is the cell's position in the deterministic enumeration order
// (circuit mode outermost, then rule mode, then seed).
struct CellSpec {
  size_t index = 0;
  CircuitMode circuit_mode = CircuitMode::Shared;
  RuleMode rule_mode = RuleMode::CShare;
  uint64_t seed = 1;

  // e.g. "shared_cshare_s7"; used for output file names.
  std::string label() const;
};

// Expands the mode/seed cartesian product.  Circuit mode `none` runs only
// once per seed (rule modes are indistinguishable without circuits).
std::vector<CellSpec> experiment_cells(const ExperimentConfig& cfg);

struct RunOptions {
  uint32_t jobs = 0;      // 0 = take from cfg.run.jobs
  std::string debug_dir;  // when set, write per-cell event/demand CSV logs here
  std::function<void(const CellSpec&)> progress;  // called as each cell finishes
};

// Runs every cell and hands each finished report to `sink` (called under a
// lock, possibly out of order when jobs > 1; use CellSpec::index to restore
// order).  The per-seed trace is generated once and shared by all mode cells
// so comparisons see identical workloads.
void run_experiment(const ExperimentConfig& cfg, const RunOptions& opts,
                    const std::function<void(const CellSpec&, MetricsReport&&)>& sink);

// Convenience wrapper that keeps all reports in memory, in cell order.
struct CellResult {
  CellSpec spec;
  MetricsReport report;
};
std::vector<CellResult> run_experiment_collect(const ExperimentConfig& cfg,
                                               const RunOptions& opts = {});

}  // namespace ocsim
