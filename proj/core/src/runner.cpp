#include "ocsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "ocsim/errors.hpp"

namespace ocsim {

std::string CellSpec::label() const {
  std::string s = circuit_mode_name(circuit_mode);
  if (circuit_mode != CircuitMode::None) {
    s += "_";
    s += rule_mode_name(rule_mode);
  }
  s += "_s" + std::to_string(seed);
  return s;
}

std::vector<CellSpec> experiment_cells(const ExperimentConfig& cfg) {
  std::vector<CellSpec> cells;
  for (CircuitMode cm : cfg.modes.circuits) {
    size_t n_rules = cm == CircuitMode::None ? 1 : cfg.modes.rules.size();
    for (size_t r = 0; r < n_rules; ++r) {
      for (uint64_t seed : cfg.run.seeds) {
        CellSpec spec;
        spec.index = cells.size();
        spec.circuit_mode = cm;
        spec.rule_mode = cfg.modes.rules[r];
        spec.seed = seed;
        cells.push_back(spec);
      }
    }
  }
  return cells;
}

void run_experiment(const ExperimentConfig& cfg, const RunOptions& opts,
                    const std::function<void(const CellSpec&, MetricsReport&&)>& sink) {
  const Topology topo = cfg.build_topology();

  // One trace per seed, shared by every mode cell.
  std::vector<Trace> traces;
  traces.reserve(cfg.run.seeds.size());
  for (uint64_t seed : cfg.run.seeds) traces.push_back(cfg.make_trace(topo, seed));

  const std::vector<CellSpec> cells = experiment_cells(cfg);
  if (!opts.debug_dir.empty()) std::filesystem::create_directories(opts.debug_dir);

  uint32_t jobs = opts.jobs ? opts.jobs : cfg.run.jobs;
  jobs = std::min<uint32_t>(std::max<uint32_t>(jobs, 1), static_cast<uint32_t>(cells.size()));

  std::atomic<size_t> next{0};
  std::mutex sink_mu;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const CellSpec& spec = cells[i];
      try {
        SimConfig sc = cfg.sim_config(spec.circuit_mode, spec.rule_mode, spec.seed);
        std::ofstream event_log, demand_log;
        if (!opts.debug_dir.empty()) {
          std::string base = opts.debug_dir + "/" + cfg.name + "_" + spec.label();
          event_log.open(base + ".events.csv");
          demand_log.open(base + ".demand.csv");
          sc.event_log_stream = &event_log;
          sc.demand_log_stream = &demand_log;
        }
        size_t seed_idx = spec.index % cfg.run.seeds.size();
        MetricsReport report = run_simulation(topo, traces[seed_idx], sc);
        std::lock_guard<std::mutex> lock(sink_mu);
        if (opts.progress) opts.progress(spec);
        sink(spec, std::move(report));
      } catch (...) {
        std::lock_guard<std::mutex> lock(sink_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(cells.size());  // stop handing out work
        return;
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (uint32_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<CellResult> run_experiment_collect(const ExperimentConfig& cfg,
                                               const RunOptions& opts) {
  std::vector<CellResult> results(experiment_cells(cfg).size());
  run_experiment(cfg, opts, [&](const CellSpec& spec, MetricsReport&& report) {
    results[spec.index].spec = spec;
    results[spec.index].report = std::move(report);
  });
  return results;
}

}  // namespace ocsim
