// ocsim: experiment driver for the circuit-sharing simulator.
// Subcommands: generate (traces), run (seed x mode sweeps), report
// (comparison tables from report JSONs), validate (trace checks), presets.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ocsim/errors.hpp"
#include "ocsim/experiment.hpp"
#include "ocsim/metrics.hpp"
#include "ocsim/presets.hpp"
#include "ocsim/runner.hpp"
#include "ocsim/traffic.hpp"
#include "ocsim/util.hpp"

namespace fs = std::filesystem;
using namespace ocsim;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string seeds;
  std::string out;
  std::string modes;
  std::string rules;
  uint32_t jobs = 0;
  bool debug_logs = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("-c,--config", o.config_path, "Experiment config file (INI)");
  cmd->add_option("-p,--preset", o.preset, "Built-in preset name (see `ocsim presets`)");
  cmd->add_option("-s,--seed,--seeds", o.seeds, "Seed list: `7`, `1-30`, or `1,3,9`");
  cmd->add_option("-o,--out", o.out, "Output directory (overrides config)");
  cmd->add_option("-j,--jobs", o.jobs, "Parallel simulation jobs");
  cmd->add_option("--modes", o.modes, "Circuit modes to run: none,private,shared");
  cmd->add_option("--rules", o.rules, "Rule modes to run: cshare,per_flow");
  cmd->add_flag("--debug-logs", o.debug_logs, "Write per-cell event/demand logs");
}

ExperimentConfig load_config(const CommonOpts& o) {
  if (!o.preset.empty() && !o.config_path.empty())
    throw ConfigError("give either --preset or --config, not both");
  ExperimentConfig cfg;
  if (!o.preset.empty())
    cfg = preset_config(o.preset);
  else if (!o.config_path.empty())
    cfg = ExperimentConfig::from_file(o.config_path);
  else
    throw ConfigError("need --preset or --config");
  if (!o.seeds.empty()) cfg.run.seeds = parse_seed_list(o.seeds);
  if (!o.out.empty()) cfg.run.out_dir = o.out;
  if (o.jobs) cfg.run.jobs = o.jobs;
  if (o.debug_logs) cfg.run.debug_logs = true;
  if (!o.modes.empty()) cfg.modes.circuits = parse_circuit_modes(o.modes);
  if (!o.rules.empty()) cfg.modes.rules = parse_rule_modes(o.rules);
  return cfg;
}

std::string mode_string(CircuitMode cm, RuleMode rm) {
  if (cm == CircuitMode::None) return "none";
  return std::string(circuit_mode_name(cm)) + "/" + rule_mode_name(rm);
}

int cmd_generate(const ExperimentConfig& cfg) {
  Topology topo = cfg.build_topology();
  fs::create_directories(cfg.run.out_dir);
  for (uint64_t seed : cfg.run.seeds) {
    Trace t = cfg.make_trace(topo, seed);
    TraceValidation val = validate_trace(t, topo);
    std::string base = cfg.run.out_dir + "/trace_s" + std::to_string(seed);
    {
      std::ofstream os(base + ".csv");
      if (!os) throw SimulationError("cannot write " + base + ".csv");
      write_trace_csv(t, os);
    }
    nlohmann::json meta;
    meta["seed"] = t.meta.seed;
    meta["source"] = t.meta.source;
    meta["horizon_us"] = t.meta.horizon_us;
    meta["n_flows"] = val.n_flows;
    meta["n_coflows"] = val.n_coflows;
    meta["n_elephants"] = val.n_elephants;
    meta["total_bytes"] = val.total_bytes;
    meta["elephant_count_share"] = val.elephant_count_share;
    meta["elephant_demand_share"] = val.elephant_demand_share;
    meta["params"]["n_flows"] = t.meta.params.n_flows;
    meta["params"]["elephant_count_fraction"] = t.meta.params.elephant_count_fraction;
    meta["params"]["elephant_demand_fraction"] = t.meta.params.elephant_demand_fraction;
    meta["params"]["mice_min_bytes"] = t.meta.params.mice_min_bytes;
    meta["params"]["mice_max_bytes"] = t.meta.params.mice_max_bytes;
    meta["params"]["elephant_min_bytes"] = t.meta.params.elephant_min_bytes;
    meta["params"]["elephant_max_bytes"] = t.meta.params.elephant_max_bytes;
    meta["params"]["coflow_min_width"] = t.meta.params.coflow_min_width;
    meta["params"]["coflow_max_width"] = t.meta.params.coflow_max_width;
    meta["params"]["load_factor"] = t.meta.params.load_factor;
    {
      std::ofstream os(base + ".meta.json");
      os << meta.dump(2) << "\n";
    }
    std::cout << "seed " << seed << ": " << val.n_flows << " flows, " << val.n_coflows
              << " coflows, " << val.total_bytes << " bytes, elephant demand share "
              << format_double(val.elephant_demand_share) << " -> " << base << ".csv\n";
    if (!val.ok) {
      for (const std::string& p : val.problems) std::cerr << "problem: " << p << "\n";
      throw SimulationError("generated trace failed validation");
    }
  }
  return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.run.out_dir);
  {
    // Persist the resolved config so reruns and reports are reproducible.
    std::ofstream os(cfg.run.out_dir + "/config.ini");
    os << cfg.serialize();
  }
  const std::vector<CellSpec> cells = experiment_cells(cfg);

  struct CellSummary {
    CellSpec spec;
    std::string topology;
    std::vector<MetricValue> metrics;
  };
  std::vector<CellSummary> summaries(cells.size());

  RunOptions opts;
  if (cfg.run.debug_logs) opts.debug_dir = cfg.run.out_dir + "/logs";
  size_t n_done = 0;
  opts.progress = [&](const CellSpec& spec) {
    ++n_done;
    std::cerr << "[" << n_done << "/" << cells.size() << "] " << spec.label() << "\n";
  };

  run_experiment(cfg, opts, [&](const CellSpec& spec, MetricsReport&& report) {
    std::string path = cfg.run.out_dir + "/report_" + spec.label() + ".json";
    std::ofstream os(path);
    if (!os) throw SimulationError("cannot write " + path);
    os << report_to_json(report, cfg.run.debug_logs) << "\n";
    summaries[spec.index] = {spec, report.run.topology, standard_metrics(report)};
  });

  // Aggregate each mode cell over its seeds into results.csv.
  std::vector<ResultRow> rows;
  for (size_t base = 0; base < cells.size(); base += cfg.run.seeds.size()) {
    const CellSummary& head = summaries[base];
    std::string mode = mode_string(head.spec.circuit_mode, head.spec.rule_mode);
    for (size_t m = 0; m < head.metrics.size(); ++m) {
      std::vector<double> values;
      for (size_t s = 0; s < cfg.run.seeds.size(); ++s)
        values.push_back(summaries[base + s].metrics[m].value);
      rows.push_back(aggregate_result(head.metrics[m].metric, head.metrics[m].klass, mode,
                                      head.topology, values));
    }
  }
  {
    std::ofstream os(cfg.run.out_dir + "/results.csv");
    write_results_csv(rows, os);
  }

  for (size_t base = 0; base < cells.size(); base += cfg.run.seeds.size()) {
    const CellSummary& head = summaries[base];
    std::cout << mode_string(head.spec.circuit_mode, head.spec.rule_mode) << " ("
              << cfg.run.seeds.size() << " seeds):";
    for (size_t m = 0; m < head.metrics.size(); ++m) {
      double sum = 0;
      for (size_t s = 0; s < cfg.run.seeds.size(); ++s)
        sum += summaries[base + s].metrics[m].value;
      const MetricValue& mv = head.metrics[m];
      if (mv.metric == "fct_mean_us" || mv.metric == "coflow_ct_mean_us" ||
          mv.metric == "rule_installs_per_min")
        std::cout << " " << mv.klass << " " << mv.metric << " "
                  << format_double(sum / static_cast<double>(cfg.run.seeds.size()));
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << cells.size() << " reports + results.csv to " << cfg.run.out_dir
            << "\n";
  return 0;
}

// Reduced view of one report file, enough for comparisons and footprint rows.
struct RptSummary {
  RunInfo run;
  int64_t trace_bytes = 0;
  size_t n_flows = 0;
  std::vector<MetricValue> metrics;
  double installs_per_min = 0.0;
  uint32_t peak_concurrent_max = 0;
  uint32_t peak_cshare_max = 0;
  uint64_t occupancy_overflows = 0;
  uint32_t budget_overflow_switches = 0;
  bool cshare_invariant_ok = true;
  uint32_t circuits_requested = 0;
};

RptSummary summarize_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open report file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  MetricsReport r = report_from_json(ss.str());
  RptSummary s;
  s.run = r.run;
  s.trace_bytes = r.trace_bytes;
  s.n_flows = r.flows.size();
  s.metrics = standard_metrics(r);
  s.installs_per_min = network_installs_per_minute(r.footprint);
  for (const SwitchFootprint& f : r.footprint) {
    s.peak_concurrent_max = std::max(s.peak_concurrent_max, f.peak_concurrent);
    s.peak_cshare_max = std::max(s.peak_cshare_max, f.peak_concurrent_cshare);
    if (f.budget_overflow) ++s.budget_overflow_switches;
  }
  s.occupancy_overflows = r.occupancy_overflows;
  s.cshare_invariant_ok = r.cshare_invariant_ok;
  s.circuits_requested = r.circuits_requested;
  return s;
}

// Improvement of `other` over `baseline` for one metric, sign-normalized so
// positive is always better.
double improvement_pct(const MetricValue& baseline, const MetricValue& other) {
  if (baseline.value == 0.0) return 0.0;
  double delta = (other.value - baseline.value) / baseline.value * 100.0;
  return baseline.higher_is_better ? delta : -delta;
}

int cmd_report(const std::vector<std::string>& inputs, std::string out_dir) {
  std::vector<std::string> files;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("report_", 0) == 0 && name.size() > 5 &&
            name.substr(name.size() - 5) == ".json")
          found.push_back(entry.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
      if (out_dir.empty()) out_dir = in;
    } else {
      files.push_back(in);
    }
  }
  if (files.empty()) throw ConfigError("no report files found");
  if (out_dir.empty()) out_dir = ".";
  fs::create_directories(out_dir);

  // Group by mode cell, then by seed inside each group.
  using GroupKey = std::pair<CircuitMode, RuleMode>;
  std::map<GroupKey, std::map<uint64_t, RptSummary>> groups;
  for (const std::string& f : files) {
    RptSummary s = summarize_report_file(f);
    GroupKey key{s.run.circuit_mode,
                 s.run.circuit_mode == CircuitMode::None ? RuleMode::CShare : s.run.rule_mode};
    groups[key][s.run.seed] = std::move(s);
  }

  struct PairDef {
    std::string name;
    GroupKey baseline, other;
  };
  std::vector<PairDef> pairs;
  for (RuleMode rm : {RuleMode::CShare, RuleMode::PerFlow}) {
    GroupKey priv{CircuitMode::Private, rm}, shared{CircuitMode::Shared, rm};
    GroupKey none{CircuitMode::None, RuleMode::CShare};
    std::string suffix = std::string("_") + rule_mode_name(rm);
    if (groups.count(priv) && groups.count(shared))
      pairs.push_back({"shared_vs_private" + suffix, priv, shared});
    if (groups.count(none) && groups.count(priv))
      pairs.push_back({"private_vs_none" + suffix, none, priv});
    if (groups.count(none) && groups.count(shared))
      pairs.push_back({"shared_vs_none" + suffix, none, shared});
  }
  for (CircuitMode cm : {CircuitMode::Private, CircuitMode::Shared}) {
    GroupKey pf{cm, RuleMode::PerFlow}, cs{cm, RuleMode::CShare};
    if (groups.count(pf) && groups.count(cs))
      pairs.push_back({std::string("cshare_vs_per_flow_") + circuit_mode_name(cm), pf, cs});
  }

  nlohmann::json jout;
  jout["pairs"] = nlohmann::json::array();
  std::ofstream ccsv(out_dir + "/comparison.csv");
  ccsv << "pair,metric,class,baseline_mean,other_mean,improvement_pct,ci_low,ci_high,seeds\n";
  for (const PairDef& p : pairs) {
    const auto& base_group = groups[p.baseline];
    const auto& other_group = groups[p.other];
    std::vector<uint64_t> seeds;
    for (const auto& [seed, s] : base_group)
      if (other_group.count(seed)) seeds.push_back(seed);
    if (seeds.empty()) continue;

    nlohmann::json jpair;
    jpair["name"] = p.name;
    jpair["seeds"] = seeds.size();
    jpair["warnings"] = nlohmann::json::array();
    const RptSummary& b0 = base_group.at(seeds[0]);
    const RptSummary& o0 = other_group.at(seeds[0]);
    if (b0.run.topology != o0.run.topology)
      jpair["warnings"].push_back("topology mismatch: " + b0.run.topology + " vs " +
                                  o0.run.topology);
    if (b0.trace_bytes != o0.trace_bytes || b0.n_flows != o0.n_flows)
      jpair["warnings"].push_back("trace mismatch: cells carried different flow sets");

    jpair["deltas"] = nlohmann::json::array();
    size_t n_metrics = b0.metrics.size();
    for (size_t m = 0; m < n_metrics; ++m) {
      std::vector<double> improvements;
      double base_sum = 0, other_sum = 0;
      for (uint64_t seed : seeds) {
        const RptSummary& b = base_group.at(seed);
        const RptSummary& o = other_group.at(seed);
        improvements.push_back(improvement_pct(b.metrics[m], o.metrics[m]));
        base_sum += b.metrics[m].value;
        other_sum += o.metrics[m].value;
      }
      ResultRow agg = aggregate_result(b0.metrics[m].metric, b0.metrics[m].klass, p.name,
                                       b0.run.topology, improvements);
      double bm = base_sum / static_cast<double>(seeds.size());
      double om = other_sum / static_cast<double>(seeds.size());
      ccsv << p.name << "," << agg.metric << "," << agg.klass << "," << format_double(bm)
           << "," << format_double(om) << "," << format_double(agg.value) << ","
           << format_double(agg.ci_low) << "," << format_double(agg.ci_high) << ","
           << seeds.size() << "\n";
      nlohmann::json jd;
      jd["metric"] = agg.metric;
      jd["class"] = agg.klass;
      jd["baseline_mean"] = bm;
      jd["other_mean"] = om;
      jd["improvement_pct"] = agg.value;
      jd["ci_low"] = agg.ci_low;
      jd["ci_high"] = agg.ci_high;
      jpair["deltas"].push_back(jd);
    }
    jout["pairs"].push_back(jpair);
  }

  // Rule footprint table, one row per mode cell.
  std::ofstream fcsv(out_dir + "/footprint.csv");
  fcsv << "mode,topology,seeds,installs_per_min_mean,peak_concurrent_max,peak_cshare_max,"
          "occupancy_overflows,budget_overflow_switches_mean,circuits_requested_mean\n";
  for (const auto& [key, by_seed] : groups) {
    double ipm = 0, budget = 0, circuits = 0;
    uint32_t peak = 0, peak_cs = 0;
    uint64_t occ = 0;
    std::string topo;
    for (const auto& [seed, s] : by_seed) {
      ipm += s.installs_per_min;
      budget += s.budget_overflow_switches;
      circuits += s.circuits_requested;
      peak = std::max(peak, s.peak_concurrent_max);
      peak_cs = std::max(peak_cs, s.peak_cshare_max);
      occ += s.occupancy_overflows;
      topo = s.run.topology;
    }
    double n = static_cast<double>(by_seed.size());
    fcsv << mode_string(key.first, key.second) << "," << topo << "," << by_seed.size() << ","
         << format_double(ipm / n) << "," << peak << "," << peak_cs << "," << occ << ","
         << format_double(budget / n) << "," << format_double(circuits / n) << "\n";
  }

  {
    std::ofstream os(out_dir + "/comparison.json");
    os << jout.dump(2) << "\n";
  }
  std::cout << "compared " << files.size() << " reports (" << groups.size()
            << " mode cells) -> " << out_dir << "/comparison.{csv,json}, footprint.csv\n";
  for (const auto& jp : jout["pairs"])
    for (const auto& w : jp["warnings"])
      std::cerr << "warning [" << jp["name"].get<std::string>() << "]: "
                << w.get<std::string>() << "\n";
  return 0;
}

int cmd_validate(const ExperimentConfig& cfg, const std::string& trace_path,
                 const std::string& adjacency_out) {
  Topology topo = cfg.build_topology();
  if (!adjacency_out.empty()) {
    std::ofstream os(adjacency_out);
    if (!os) throw SimulationError("cannot write " + adjacency_out);
    topo.dump_adjacency_csv(os);
    std::cout << "wrote adjacency of " << topo.name() << " to " << adjacency_out << "\n";
  }
  Trace t;
  if (!trace_path.empty()) {
    std::ifstream in(trace_path);
    if (!in) throw ConfigError("cannot open trace file: " + trace_path);
    t = read_trace_csv(in);
  } else {
    t = cfg.make_trace(topo, cfg.run.seeds.front());
  }
  TraceValidation val = validate_trace(t, topo);
  std::cout << "topology " << topo.name() << ": " << topo.switch_count() << " switches, "
            << topo.host_count() << " hosts, diameter " << topo.diameter() << "\n";
  std::cout << "trace: " << val.n_flows << " flows, " << val.n_coflows << " coflows, "
            << val.n_elephants << " elephants, " << val.total_bytes << " bytes\n";
  std::cout << "elephant count share " << format_double(val.elephant_count_share)
            << ", demand share " << format_double(val.elephant_demand_share) << "\n";
  std::cout << "starts " << val.first_start_us << ".." << val.last_start_us << " us\n";
  if (!val.ok) {
    for (const std::string& p : val.problems) std::cerr << "problem: " << p << "\n";
    std::cerr << "trace INVALID (" << val.problems.size() << " problems shown)\n";
    return 3;
  }
  std::cout << "trace OK\n";
  return 0;
}

int cmd_presets() {
  for (const std::string& name : preset_names()) {
    ExperimentConfig cfg = preset_config(name);
    std::string topo = cfg.topology.type == "ring"
                           ? "ring" + std::to_string(cfg.topology.switches)
                           : "fbfly" + std::to_string(cfg.topology.k) + "x" +
                                 std::to_string(cfg.topology.n);
    std::string modes;
    for (CircuitMode m : cfg.modes.circuits) {
      if (!modes.empty()) modes += ",";
      modes += circuit_mode_name(m);
    }
    std::string rules;
    for (RuleMode m : cfg.modes.rules) {
      if (!rules.empty()) rules += ",";
      rules += rule_mode_name(m);
    }
    std::cout << name << ": " << topo << ", " << cfg.traffic.params.n_flows << " flows, load "
              << format_double(cfg.traffic.params.load_factor) << ", modes " << modes << " x "
              << rules << ", seeds " << format_seed_list(cfg.run.seeds) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-level simulator for shared optical circuits in hybrid data centers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ocsim 0.1.0");

  CommonOpts gen_opts, run_opts, val_opts;
  CLI::App* gen = app.add_subcommand("generate", "Generate trace CSVs (one per seed)");
  add_common(gen, gen_opts);

  CLI::App* run = app.add_subcommand("run", "Run the mode x seed sweep, write reports");
  add_common(run, run_opts);

  std::vector<std::string> report_inputs;
  std::string report_out;
  CLI::App* rep = app.add_subcommand("report", "Build comparison tables from report JSONs");
  rep->add_option("inputs", report_inputs, "Report files or directories")->required();
  rep->add_option("-o,--out", report_out, "Directory for comparison outputs");

  std::string val_trace, val_adjacency;
  CLI::App* val = app.add_subcommand("validate", "Validate a trace against the topology");
  add_common(val, val_opts);
  val->add_option("--trace", val_trace, "Trace CSV to validate (default: generate one)");
  val->add_option("--adjacency", val_adjacency, "Also dump the switch adjacency CSV here");

  CLI::App* pre = app.add_subcommand("presets", "List built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(load_config(gen_opts));
    if (run->parsed()) return cmd_run(load_config(run_opts));
    if (rep->parsed()) return cmd_report(report_inputs, report_out);
    if (val->parsed()) return cmd_validate(load_config(val_opts), val_trace, val_adjacency);
    if (pre->parsed()) return cmd_presets();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const TopologyError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
