#include "ocsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ocsim/errors.hpp"
#include "ocsim/util.hpp"

namespace ocsim {

using nlohmann::json;

DistStats dist_stats(std::vector<double> xs) {
  DistStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  auto pct = [&xs](double q) {
    size_t i = static_cast<size_t>(std::ceil(q * static_cast<double>(xs.size())));
    if (i == 0) i = 1;
    return xs[std::min(i - 1, xs.size() - 1)];
  };
  s.p50 = pct(0.50);
  s.p95 = pct(0.95);
  s.p99 = pct(0.99);
  s.min = xs.front();
  s.max = xs.back();
  return s;
}

DistStats throughput_stats(const MetricsReport& r, FlowClass klass) {
  std::vector<double> xs;
  for (const FlowRecord& f : r.flows) {
    if (f.klass != klass || f.completion_us == kNoTime) continue;
    SimTime fct = f.fct_us();
    if (fct <= 0) continue;
    xs.push_back(static_cast<double>(f.size_bytes) * kBitsPerByte * kUsPerSec /
                 static_cast<double>(fct));
  }
  return dist_stats(std::move(xs));
}

CompletionStats completion_stats(const MetricsReport& r) {
  std::vector<double> mice, eleph, cof;
  for (const FlowRecord& f : r.flows) {
    if (f.completion_us == kNoTime) continue;
    (f.klass == FlowClass::Mice ? mice : eleph)
        .push_back(static_cast<double>(f.fct_us()));
  }
  for (const CoflowRecord& c : r.coflows) {
    if (!c.all_mice || c.completion_us == kNoTime) continue;
    cof.push_back(static_cast<double>(c.duration_us()));
  }
  CompletionStats cs;
  cs.mice_fct_us = dist_stats(std::move(mice));
  cs.elephant_fct_us = dist_stats(std::move(eleph));
  cs.mice_coflow_us = dist_stats(std::move(cof));
  return cs;
}

std::vector<SwitchFootprint> footprint_from_log(const std::vector<RuleLogEntry>& log,
                                                uint32_t n_switches, SimTime end_us,
                                                uint32_t table_capacity) {
  std::vector<SwitchFootprint> fps(n_switches);
  size_t buckets = static_cast<size_t>(end_us / 60000000) + 1;
  for (uint32_t s = 0; s < n_switches; ++s) {
    fps[s].sw = s;
    fps[s].minute_installs.assign(buckets, 0);
  }
  std::vector<uint32_t> cur(n_switches, 0), cur_cshare(n_switches, 0);
  for (const RuleLogEntry& e : log) {
    if (e.sw >= n_switches) throw SimulationError("rule log references unknown switch");
    SwitchFootprint& fp = fps[e.sw];
    switch (e.op) {
      case RuleLogEntry::Op::Install:
        ++fp.installs;
        ++cur[e.sw];
        fp.peak_concurrent = std::max(fp.peak_concurrent, cur[e.sw]);
        if (e.origin == RuleMode::CShare) {
          ++cur_cshare[e.sw];
          fp.peak_concurrent_cshare = std::max(fp.peak_concurrent_cshare, cur_cshare[e.sw]);
        }
        if (static_cast<size_t>(e.t_us / 60000000) < buckets)
          ++fp.minute_installs[static_cast<size_t>(e.t_us / 60000000)];
        break;
      case RuleLogEntry::Op::Delete:
        ++fp.deletes;
        --cur[e.sw];
        if (e.origin == RuleMode::CShare) --cur_cshare[e.sw];
        break;
      case RuleLogEntry::Op::Reject:
        ++fp.rejects;
        break;
    }
  }
  for (uint32_t s = 0; s < n_switches; ++s) {
    if (end_us > 0)
      fps[s].installs_per_minute =
          static_cast<double>(fps[s].installs) * 60e6 / static_cast<double>(end_us);
    fps[s].budget_overflow = fps[s].installs_per_minute > static_cast<double>(table_capacity);
  }
  return fps;
}

uint64_t total_installs(const std::vector<SwitchFootprint>& fp) {
  uint64_t sum = 0;
  for (const SwitchFootprint& f : fp) sum += f.installs;
  return sum;
}

double network_installs_per_minute(const std::vector<SwitchFootprint>& fp) {
  double sum = 0.0;
  for (const SwitchFootprint& f : fp) sum += f.installs_per_minute;
  return sum;
}

namespace {

struct MetricDef {
  const char* metric;
  const char* klass;
  bool higher_is_better;
  double (*get)(const MetricsReport&);
};

double mice_fct_mean(const MetricsReport& r) { return completion_stats(r).mice_fct_us.mean; }
double eleph_fct_mean(const MetricsReport& r) { return completion_stats(r).elephant_fct_us.mean; }
double mice_coflow_mean(const MetricsReport& r) { return completion_stats(r).mice_coflow_us.mean; }
double mice_coflow_p95(const MetricsReport& r) { return completion_stats(r).mice_coflow_us.p95; }
double eleph_fct_p95(const MetricsReport& r) { return completion_stats(r).elephant_fct_us.p95; }
double mice_tput(const MetricsReport& r) { return throughput_stats(r, FlowClass::Mice).mean; }
double eleph_tput(const MetricsReport& r) { return throughput_stats(r, FlowClass::Elephant).mean; }
double installs_per_min(const MetricsReport& r) { return network_installs_per_minute(r.footprint); }
double peak_rules(const MetricsReport& r) {
  uint32_t m = 0;
  for (const SwitchFootprint& f : r.footprint) m = std::max(m, f.peak_concurrent);
  return m;
}

const MetricDef kCompared[] = {
    {"fct_mean_us", "mice", false, mice_fct_mean},
    {"fct_mean_us", "elephant", false, eleph_fct_mean},
    {"fct_p95_us", "elephant", false, eleph_fct_p95},
    {"coflow_ct_mean_us", "mice", false, mice_coflow_mean},
    {"coflow_ct_p95_us", "mice", false, mice_coflow_p95},
    {"throughput_mean_bps", "mice", true, mice_tput},
    {"throughput_mean_bps", "elephant", true, eleph_tput},
    {"rule_installs_per_min", "all", false, installs_per_min},
    {"rule_peak_concurrent", "all", false, peak_rules},
};

}  // namespace

std::vector<MetricValue> standard_metrics(const MetricsReport& r) {
  std::vector<MetricValue> out;
  for (const MetricDef& d : kCompared)
    out.push_back({d.metric, d.klass, d.get(r), d.higher_is_better});
  return out;
}

ComparisonResult compare_runs(const MetricsReport& baseline, const MetricsReport& other) {
  ComparisonResult res;
  if (baseline.run.topology != other.run.topology)
    res.warnings.push_back("topology mismatch: " + baseline.run.topology + " vs " +
                           other.run.topology);
  if (baseline.run.seed != other.run.seed)
    res.warnings.push_back("seed mismatch: " + std::to_string(baseline.run.seed) + " vs " +
                           std::to_string(other.run.seed));
  if (baseline.trace_bytes != other.trace_bytes || baseline.flows.size() != other.flows.size())
    res.warnings.push_back("trace mismatch: runs carried different flow sets");
  for (const MetricDef& d : kCompared) {
    MetricDelta md;
    md.metric = d.metric;
    md.klass = d.klass;
    md.baseline = d.get(baseline);
    md.other = d.get(other);
    if (md.baseline != 0.0) {
      md.delta_pct = (md.other - md.baseline) / md.baseline * 100.0;
      md.improvement_pct = d.higher_is_better ? md.delta_pct : -md.delta_pct;
    }
    res.deltas.push_back(md);
  }
  return res;
}

ResultRow aggregate_result(const std::string& metric, const std::string& klass,
                           const std::string& mode, const std::string& topology,
                           const std::vector<double>& xs) {
  ResultRow row;
  row.metric = metric;
  row.klass = klass;
  row.mode = mode;
  row.topology = topology;
  row.trials = static_cast<uint32_t>(xs.size());
  if (xs.empty()) return row;
  double sum = 0.0;
  for (double x : xs) sum += x;
  double mean = sum / static_cast<double>(xs.size());
  row.value = mean;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    double half = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
    row.ci_low = mean - half;
    row.ci_high = mean + half;
  } else {
    row.ci_low = row.ci_high = mean;
  }
  return row;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << "metric,class,mode,topology,value,ci_low,ci_high,trials\n";
  for (const ResultRow& r : rows) {
    os << r.metric << ',' << r.klass << ',' << r.mode << ',' << r.topology << ','
       << format_double(r.value) << ',' << format_double(r.ci_low) << ','
       << format_double(r.ci_high) << ',' << r.trials << '\n';
  }
}

namespace {

json run_info_to_json(const RunInfo& ri) {
  return json{{"topology", ri.topology},
              {"n_switches", ri.n_switches},
              {"n_hosts", ri.n_hosts},
              {"circuit_mode", circuit_mode_name(ri.circuit_mode)},
              {"rule_mode", rule_mode_name(ri.rule_mode)},
              {"seed", ri.seed},
              {"packet_rate_bps", ri.packet_rate_bps},
              {"circuit_rate_bps", ri.circuit_rate_bps},
              {"byte_threshold", ri.byte_threshold},
              {"observer_period_us", ri.observer_period_us},
              {"reconfig_delay_us", ri.reconfig_delay_us},
              {"outbound_latency_us", ri.outbound_latency_us},
              {"rule_setup_per_s", ri.rule_setup_per_s},
              {"table_capacity", ri.table_capacity}};
}

CircuitMode circuit_mode_from(const std::string& s) {
  if (s == "none") return CircuitMode::None;
  if (s == "private") return CircuitMode::Private;
  if (s == "shared") return CircuitMode::Shared;
  throw ConfigError("unknown circuit mode '" + s + "'");
}

RuleMode rule_mode_from(const std::string& s) {
  if (s == "cshare") return RuleMode::CShare;
  if (s == "per_flow") return RuleMode::PerFlow;
  throw ConfigError("unknown rule mode '" + s + "'");
}

RunInfo run_info_from_json(const json& j) {
  RunInfo ri;
  ri.topology = j.at("topology").get<std::string>();
  ri.n_switches = j.at("n_switches").get<uint32_t>();
  ri.n_hosts = j.at("n_hosts").get<uint32_t>();
  ri.circuit_mode = circuit_mode_from(j.at("circuit_mode").get<std::string>());
  ri.rule_mode = rule_mode_from(j.at("rule_mode").get<std::string>());
  ri.seed = j.at("seed").get<uint64_t>();
  ri.packet_rate_bps = j.at("packet_rate_bps").get<double>();
  ri.circuit_rate_bps = j.at("circuit_rate_bps").get<double>();
  ri.byte_threshold = j.at("byte_threshold").get<int64_t>();
  ri.observer_period_us = j.at("observer_period_us").get<SimTime>();
  ri.reconfig_delay_us = j.at("reconfig_delay_us").get<SimTime>();
  ri.outbound_latency_us = j.at("outbound_latency_us").get<SimTime>();
  ri.rule_setup_per_s = j.at("rule_setup_per_s").get<double>();
  ri.table_capacity = j.at("table_capacity").get<uint32_t>();
  return ri;
}

}  // namespace

std::string report_to_json(const MetricsReport& r, bool include_logs) {
  json j;
  j["run"] = run_info_to_json(r.run);
  j["end_us"] = r.end_us;
  j["trace_bytes"] = r.trace_bytes;
  j["delivered_bytes"] = r.delivered_bytes;
  j["events_processed"] = r.events_processed;
  j["event_log_hash"] = r.event_log_hash;
  j["occupancy_overflows"] = r.occupancy_overflows;
  j["cshare_invariant_ok"] = r.cshare_invariant_ok;
  j["flows_tagged"] = r.flows_tagged;
  j["circuits_requested"] = r.circuits_requested;

  json flows = json::array();
  for (const FlowRecord& f : r.flows) {
    flows.push_back(json::array({f.id, f.coflow, static_cast<int>(f.klass), f.src_host,
                                 f.dst_host, f.size_bytes, f.start_us, f.completion_us,
                                 f.tagged, f.tag_us, f.used_circuit, f.first_reroute_us,
                                 f.reroutes}));
  }
  j["flows"] = std::move(flows);

  json cofs = json::array();
  for (const CoflowRecord& c : r.coflows)
    cofs.push_back(json::array({c.id, c.width, c.all_mice, c.arrival_us, c.completion_us, c.bytes}));
  j["coflows"] = std::move(cofs);

  json circs = json::array();
  for (const CircuitRecord& c : r.circuits) {
    circs.push_back(json::array({c.id, c.src, c.dst, static_cast<int>(c.mode), c.requested_us,
                                 c.up_us, c.down_us, c.bytes_carried, c.rules_installed}));
  }
  j["circuits"] = std::move(circs);

  json fps = json::array();
  for (const SwitchFootprint& fp : r.footprint) {
    fps.push_back(json{{"sw", fp.sw},
                       {"installs", fp.installs},
                       {"deletes", fp.deletes},
                       {"rejects", fp.rejects},
                       {"peak_concurrent", fp.peak_concurrent},
                       {"peak_concurrent_cshare", fp.peak_concurrent_cshare},
                       {"minute_installs", fp.minute_installs},
                       {"installs_per_minute", fp.installs_per_minute},
                       {"budget_overflow", fp.budget_overflow}});
  }
  j["footprint"] = std::move(fps);

  if (include_logs) {
    json rl = json::array();
    for (const RuleLogEntry& e : r.rule_log) {
      rl.push_back(json::array({e.t_us, e.sw, static_cast<int>(e.op), static_cast<int>(e.origin),
                                e.dscp, e.dst_switch, e.meta_value, e.meta_mask, e.flow,
                                e.circuit}));
    }
    j["rule_log"] = std::move(rl);
  }
  return j.dump();
}

MetricsReport report_from_json(const std::string& text) {
  json j = json::parse(text);
  MetricsReport r;
  r.run = run_info_from_json(j.at("run"));
  r.end_us = j.at("end_us").get<SimTime>();
  r.trace_bytes = j.at("trace_bytes").get<int64_t>();
  r.delivered_bytes = j.at("delivered_bytes").get<int64_t>();
  r.events_processed = j.at("events_processed").get<uint64_t>();
  r.event_log_hash = j.at("event_log_hash").get<uint64_t>();
  r.occupancy_overflows = j.at("occupancy_overflows").get<uint64_t>();
  r.cshare_invariant_ok = j.at("cshare_invariant_ok").get<bool>();
  r.flows_tagged = j.at("flows_tagged").get<uint64_t>();
  r.circuits_requested = j.at("circuits_requested").get<uint32_t>();

  for (const json& a : j.at("flows")) {
    FlowRecord f;
    f.id = a.at(0).get<FlowId>();
    f.coflow = a.at(1).get<CoflowId>();
    f.klass = static_cast<FlowClass>(a.at(2).get<int>());
    f.src_host = a.at(3).get<HostId>();
    f.dst_host = a.at(4).get<HostId>();
    f.size_bytes = a.at(5).get<int64_t>();
    f.start_us = a.at(6).get<SimTime>();
    f.completion_us = a.at(7).get<SimTime>();
    f.tagged = a.at(8).get<bool>();
    f.tag_us = a.at(9).get<SimTime>();
    f.used_circuit = a.at(10).get<bool>();
    f.first_reroute_us = a.at(11).get<SimTime>();
    f.reroutes = a.at(12).get<uint32_t>();
    r.flows.push_back(f);
  }
  for (const json& a : j.at("coflows")) {
    CoflowRecord c;
    c.id = a.at(0).get<CoflowId>();
    c.width = a.at(1).get<uint32_t>();
    c.all_mice = a.at(2).get<bool>();
    c.arrival_us = a.at(3).get<SimTime>();
    c.completion_us = a.at(4).get<SimTime>();
    c.bytes = a.at(5).get<int64_t>();
    r.coflows.push_back(c);
  }
  for (const json& a : j.at("circuits")) {
    CircuitRecord c;
    c.id = a.at(0).get<CircuitId>();
    c.src = a.at(1).get<SwitchId>();
    c.dst = a.at(2).get<SwitchId>();
    c.mode = static_cast<CircuitMode>(a.at(3).get<int>());
    c.requested_us = a.at(4).get<SimTime>();
    c.up_us = a.at(5).get<SimTime>();
    c.down_us = a.at(6).get<SimTime>();
    c.bytes_carried = a.at(7).get<double>();
    c.rules_installed = a.at(8).get<uint32_t>();
    r.circuits.push_back(c);
  }
  for (const json& a : j.at("footprint")) {
    SwitchFootprint fp;
    fp.sw = a.at("sw").get<SwitchId>();
    fp.installs = a.at("installs").get<uint64_t>();
    fp.deletes = a.at("deletes").get<uint64_t>();
    fp.rejects = a.at("rejects").get<uint64_t>();
    fp.peak_concurrent = a.at("peak_concurrent").get<uint32_t>();
    fp.peak_concurrent_cshare = a.at("peak_concurrent_cshare").get<uint32_t>();
    fp.minute_installs = a.at("minute_installs").get<std::vector<uint64_t>>();
    fp.installs_per_minute = a.at("installs_per_minute").get<double>();
    fp.budget_overflow = a.at("budget_overflow").get<bool>();
    r.footprint.push_back(fp);
  }
  if (j.contains("rule_log")) {
    for (const json& a : j.at("rule_log")) {
      RuleLogEntry e;
      e.t_us = a.at(0).get<SimTime>();
      e.sw = a.at(1).get<SwitchId>();
      e.op = static_cast<RuleLogEntry::Op>(a.at(2).get<int>());
      e.origin = static_cast<RuleMode>(a.at(3).get<int>());
      e.dscp = static_cast<uint8_t>(a.at(4).get<int>());
      e.dst_switch = a.at(5).get<SwitchId>();
      e.meta_value = static_cast<uint8_t>(a.at(6).get<int>());
      e.meta_mask = static_cast<uint8_t>(a.at(7).get<int>());
      e.flow = a.at(8).get<FlowId>();
      e.circuit = a.at(9).get<CircuitId>();
      r.rule_log.push_back(e);
    }
  }
  return r;
}

}  // namespace ocsim
