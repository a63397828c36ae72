#include "ocsim/experiment.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "ocsim/errors.hpp"
#include "ocsim/util.hpp"

namespace ocsim {

namespace {

uint64_t parse_u64_val(const std::string& key, const std::string& v) {
  if (v.empty() || v.find('-') != std::string::npos)
    throw ConfigError("bad unsigned integer for `" + key + "`: `" + v + "`");
  errno = 0;
  char* end = nullptr;
  unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw ConfigError("bad unsigned integer for `" + key + "`: `" + v + "`");
  return static_cast<uint64_t>(x);
}

uint32_t parse_u32_val(const std::string& key, const std::string& v) {
  uint64_t x = parse_u64_val(key, v);
  if (x > 0xffffffffull) throw ConfigError("value out of range for `" + key + "`: `" + v + "`");
  return static_cast<uint32_t>(x);
}

int64_t parse_i64_val(const std::string& key, const std::string& v) {
  if (v.empty()) throw ConfigError("bad integer for `" + key + "`: `" + v + "`");
  errno = 0;
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw ConfigError("bad integer for `" + key + "`: `" + v + "`");
  return static_cast<int64_t>(x);
}

double parse_double_val(const std::string& key, const std::string& v) {
  if (v.empty()) throw ConfigError("bad number for `" + key + "`: `" + v + "`");
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (errno != 0 || end == v.c_str() || *end != '\0' || !std::isfinite(x))
    throw ConfigError("bad number for `" + key + "`: `" + v + "`");
  return x;
}

bool parse_bool_val(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for `" + key + "`: `" + v + "`");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

}  // namespace

std::vector<uint64_t> parse_seed_list(const std::string& text) {
  std::vector<uint64_t> seeds;
  for (const std::string& tok : split_list(text)) {
    if (tok.empty()) throw ConfigError("empty entry in seed list `" + text + "`");
    auto dash = tok.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_u64_val("seeds", tok));
    } else {
      uint64_t lo = parse_u64_val("seeds", std::string(trim(tok.substr(0, dash))));
      uint64_t hi = parse_u64_val("seeds", std::string(trim(tok.substr(dash + 1))));
      if (hi < lo) throw ConfigError("descending seed range `" + tok + "`");
      if (hi - lo >= 100000) throw ConfigError("seed range too large: `" + tok + "`");
      for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

std::string format_seed_list(const std::vector<uint64_t>& seeds) {
  std::string out;
  size_t i = 0;
  while (i < seeds.size()) {
    size_t j = i;
    while (j + 1 < seeds.size() && seeds[j + 1] == seeds[j] + 1) ++j;
    if (!out.empty()) out += ",";
    out += std::to_string(seeds[i]);
    if (j > i) out += "-" + std::to_string(seeds[j]);
    i = j + 1;
  }
  return out;
}

std::vector<CircuitMode> parse_circuit_modes(const std::string& text) {
  std::vector<CircuitMode> out;
  for (const std::string& tok : split_list(text)) {
    if (tok == "none")
      out.push_back(CircuitMode::None);
    else if (tok == "private")
      out.push_back(CircuitMode::Private);
    else if (tok == "shared")
      out.push_back(CircuitMode::Shared);
    else
      throw ConfigError("unknown circuit mode `" + tok + "` (want none|private|shared)");
  }
  if (out.empty()) throw ConfigError("empty circuit mode list");
  return out;
}

std::vector<RuleMode> parse_rule_modes(const std::string& text) {
  std::vector<RuleMode> out;
  for (const std::string& tok : split_list(text)) {
    if (tok == "cshare")
      out.push_back(RuleMode::CShare);
    else if (tok == "per_flow")
      out.push_back(RuleMode::PerFlow);
    else
      throw ConfigError("unknown rule mode `" + tok + "` (want cshare|per_flow)");
  }
  if (out.empty()) throw ConfigError("empty rule mode list");
  return out;
}

ExperimentConfig ExperimentConfig::from_doc(const ConfigDoc& doc) {
  ExperimentConfig cfg;
  for (const ConfigDoc::Section& sec : doc.sections) {
    if (sec.name == "topology") {
      for (const auto& [k, v] : sec.entries) {
        if (k == "type")
          cfg.topology.type = v;
        else if (k == "switches")
          cfg.topology.switches = parse_u32_val(k, v);
        else if (k == "k")
          cfg.topology.k = parse_u32_val(k, v);
        else if (k == "n")
          cfg.topology.n = parse_u32_val(k, v);
        else if (k == "hosts_per_switch")
          cfg.topology.hosts_per_switch = parse_u32_val(k, v);
        else if (k == "packet_rate_bps")
          cfg.topology.packet_rate_bps = parse_double_val(k, v);
        else if (k == "host_rate_bps")
          cfg.topology.host_rate_bps = parse_double_val(k, v);
        else if (k == "circuit_rate_bps")
          cfg.topology.circuit_rate_bps = parse_double_val(k, v);
        else if (k == "ocs_ports")
          cfg.topology.ocs_ports = parse_u32_val(k, v);
        else
          throw ConfigError("unknown key `" + k + "` in [topology]");
      }
    } else if (sec.name == "traffic") {
      for (const auto& [k, v] : sec.entries) {
        if (k == "mode")
          cfg.traffic.mode = v;
        else if (k == "file")
          cfg.traffic.file = v;
        else if (k == "prefix_bits")
          cfg.traffic.prefix_bits = parse_u32_val(k, v);
        else if (k == "time_scale")
          cfg.traffic.time_scale = parse_double_val(k, v);
        else if (k == "n_flows")
          cfg.traffic.params.n_flows = parse_u64_val(k, v);
        else if (k == "elephant_count_fraction")
          cfg.traffic.params.elephant_count_fraction = parse_double_val(k, v);
        else if (k == "elephant_demand_fraction")
          cfg.traffic.params.elephant_demand_fraction = parse_double_val(k, v);
        else if (k == "mice_min_bytes")
          cfg.traffic.params.mice_min_bytes = parse_i64_val(k, v);
        else if (k == "mice_max_bytes")
          cfg.traffic.params.mice_max_bytes = parse_i64_val(k, v);
        else if (k == "elephant_min_bytes")
          cfg.traffic.params.elephant_min_bytes = parse_i64_val(k, v);
        else if (k == "elephant_max_bytes")
          cfg.traffic.params.elephant_max_bytes = parse_i64_val(k, v);
        else if (k == "coflow_min_width")
          cfg.traffic.params.coflow_min_width = parse_u32_val(k, v);
        else if (k == "coflow_max_width")
          cfg.traffic.params.coflow_max_width = parse_u32_val(k, v);
        else if (k == "load_factor")
          cfg.traffic.params.load_factor = parse_double_val(k, v);
        else
          throw ConfigError("unknown key `" + k + "` in [traffic]");
      }
    } else if (sec.name == "control") {
      for (const auto& [k, v] : sec.entries) {
        if (k == "byte_threshold")
          cfg.control.byte_threshold = parse_i64_val(k, v);
        else if (k == "duration_threshold_us")
          cfg.control.duration_threshold_us = parse_i64_val(k, v);
        else if (k == "detection_latency_us")
          cfg.control.detection_latency_us = parse_i64_val(k, v);
        else if (k == "observer_period_us")
          cfg.control.observer_period_us = parse_i64_val(k, v);
        else if (k == "decision_period_us")
          cfg.control.decision_period_us = parse_i64_val(k, v);
        else if (k == "th_configure_bps")
          cfg.control.th_configure_bps = parse_double_val(k, v);
        else if (k == "th_remove_bps")
          cfg.control.th_remove_bps = parse_double_val(k, v);
        else if (k == "reconfig_delay_us")
          cfg.control.reconfig_delay_us = parse_i64_val(k, v);
        else if (k == "outbound_latency_us")
          cfg.control.outbound_latency_us = parse_i64_val(k, v);
        else if (k == "rule_setup_per_s")
          cfg.control.rule_setup_per_s = parse_double_val(k, v);
        else if (k == "table_capacity")
          cfg.control.table_capacity = parse_u32_val(k, v);
        else if (k == "dscp_e")
          cfg.control.dscp_e = static_cast<uint8_t>(parse_u32_val(k, v) & 0x3f);
        else
          throw ConfigError("unknown key `" + k + "` in [control]");
      }
    } else if (sec.name == "modes") {
      for (const auto& [k, v] : sec.entries) {
        if (k == "circuits")
          cfg.modes.circuits = parse_circuit_modes(v);
        else if (k == "rules")
          cfg.modes.rules = parse_rule_modes(v);
        else
          throw ConfigError("unknown key `" + k + "` in [modes]");
      }
    } else if (sec.name == "run") {
      for (const auto& [k, v] : sec.entries) {
        if (k == "name")
          cfg.name = v;
        else if (k == "seeds")
          cfg.run.seeds = parse_seed_list(v);
        else if (k == "out_dir")
          cfg.run.out_dir = v;
        else if (k == "max_sim_time_us")
          cfg.run.max_sim_time_us = parse_i64_val(k, v);
        else if (k == "jobs")
          cfg.run.jobs = parse_u32_val(k, v);
        else if (k == "debug_logs")
          cfg.run.debug_logs = parse_bool_val(k, v);
        else
          throw ConfigError("unknown key `" + k + "` in [run]");
      }
    } else {
      throw ConfigError("unknown section [" + sec.name + "]");
    }
  }

  if (cfg.topology.type != "ring" && cfg.topology.type != "fbfly")
    throw ConfigError("topology type must be ring or fbfly, got `" + cfg.topology.type + "`");
  if (cfg.traffic.mode != "generate" && cfg.traffic.mode != "file" && cfg.traffic.mode != "ingest")
    throw ConfigError("traffic mode must be generate, file or ingest, got `" + cfg.traffic.mode +
                      "`");
  if (cfg.traffic.mode != "generate" && cfg.traffic.file.empty())
    throw ConfigError("traffic mode `" + cfg.traffic.mode + "` needs a `file` entry");
  if (cfg.topology.packet_rate_bps <= 0 || cfg.topology.circuit_rate_bps <= 0 ||
      cfg.topology.host_rate_bps < 0)
    throw ConfigError("link rates must be positive");
  if (cfg.topology.hosts_per_switch == 0) throw ConfigError("hosts_per_switch must be positive");
  if (cfg.topology.ocs_ports == 0) throw ConfigError("ocs_ports must be positive");
  if (cfg.control.observer_period_us <= 0) throw ConfigError("observer_period_us must be positive");
  if (cfg.control.decision_period_us < 0) throw ConfigError("decision_period_us must be >= 0");
  if (cfg.control.reconfig_delay_us < 0 || cfg.control.outbound_latency_us < 0 ||
      cfg.control.detection_latency_us < 0)
    throw ConfigError("latencies must be >= 0");
  if (cfg.control.rule_setup_per_s <= 0) throw ConfigError("rule_setup_per_s must be positive");
  if (cfg.run.jobs == 0) throw ConfigError("jobs must be positive");
  if (cfg.run.max_sim_time_us < 0) throw ConfigError("max_sim_time_us must be >= 0");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_doc(ConfigDoc::parse_file(path));
}

ConfigDoc ExperimentConfig::to_doc() const {
  ConfigDoc doc;
  doc.set("topology", "type", topology.type);
  if (topology.type == "ring") {
    doc.set("topology", "switches", std::to_string(topology.switches));
  } else {
    doc.set("topology", "k", std::to_string(topology.k));
    doc.set("topology", "n", std::to_string(topology.n));
  }
  doc.set("topology", "hosts_per_switch", std::to_string(topology.hosts_per_switch));
  doc.set("topology", "packet_rate_bps", format_double(topology.packet_rate_bps));
  doc.set("topology", "host_rate_bps", format_double(topology.host_rate_bps));
  doc.set("topology", "circuit_rate_bps", format_double(topology.circuit_rate_bps));
  doc.set("topology", "ocs_ports", std::to_string(topology.ocs_ports));

  doc.set("traffic", "mode", traffic.mode);
  if (traffic.mode == "generate") {
    doc.set("traffic", "n_flows", std::to_string(traffic.params.n_flows));
    doc.set("traffic", "elephant_count_fraction",
            format_double(traffic.params.elephant_count_fraction));
    doc.set("traffic", "elephant_demand_fraction",
            format_double(traffic.params.elephant_demand_fraction));
    doc.set("traffic", "mice_min_bytes", std::to_string(traffic.params.mice_min_bytes));
    doc.set("traffic", "mice_max_bytes", std::to_string(traffic.params.mice_max_bytes));
    doc.set("traffic", "elephant_min_bytes", std::to_string(traffic.params.elephant_min_bytes));
    doc.set("traffic", "elephant_max_bytes", std::to_string(traffic.params.elephant_max_bytes));
    doc.set("traffic", "coflow_min_width", std::to_string(traffic.params.coflow_min_width));
    doc.set("traffic", "coflow_max_width", std::to_string(traffic.params.coflow_max_width));
    doc.set("traffic", "load_factor", format_double(traffic.params.load_factor));
  } else {
    doc.set("traffic", "file", traffic.file);
    if (traffic.mode == "ingest") {
      doc.set("traffic", "prefix_bits", std::to_string(traffic.prefix_bits));
      doc.set("traffic", "time_scale", format_double(traffic.time_scale));
      doc.set("traffic", "mice_max_bytes", std::to_string(traffic.params.mice_max_bytes));
    }
  }

  doc.set("control", "byte_threshold", std::to_string(control.byte_threshold));
  doc.set("control", "duration_threshold_us", std::to_string(control.duration_threshold_us));
  doc.set("control", "detection_latency_us", std::to_string(control.detection_latency_us));
  doc.set("control", "observer_period_us", std::to_string(control.observer_period_us));
  doc.set("control", "decision_period_us", std::to_string(control.decision_period_us));
  doc.set("control", "th_configure_bps", format_double(control.th_configure_bps));
  doc.set("control", "th_remove_bps", format_double(control.th_remove_bps));
  doc.set("control", "reconfig_delay_us", std::to_string(control.reconfig_delay_us));
  doc.set("control", "outbound_latency_us", std::to_string(control.outbound_latency_us));
  doc.set("control", "rule_setup_per_s", format_double(control.rule_setup_per_s));
  doc.set("control", "table_capacity", std::to_string(control.table_capacity));
  doc.set("control", "dscp_e", std::to_string(control.dscp_e));

  std::string circuits, rules;
  for (CircuitMode m : modes.circuits) {
    if (!circuits.empty()) circuits += ",";
    circuits += circuit_mode_name(m);
  }
  for (RuleMode m : modes.rules) {
    if (!rules.empty()) rules += ",";
    rules += rule_mode_name(m);
  }
  doc.set("modes", "circuits", circuits);
  doc.set("modes", "rules", rules);

  doc.set("run", "name", name);
  doc.set("run", "seeds", format_seed_list(run.seeds));
  doc.set("run", "out_dir", run.out_dir);
  doc.set("run", "max_sim_time_us", std::to_string(run.max_sim_time_us));
  doc.set("run", "jobs", std::to_string(run.jobs));
  doc.set("run", "debug_logs", run.debug_logs ? "true" : "false");
  return doc;
}

std::string ExperimentConfig::serialize() const { return to_doc().serialize(); }

Topology ExperimentConfig::build_topology() const {
  TopologyParams tp;
  tp.hosts_per_switch = topology.hosts_per_switch;
  tp.packet_rate_bps = topology.packet_rate_bps;
  tp.host_rate_bps = topology.host_rate_bps;
  tp.ocs_ports = topology.ocs_ports;
  if (topology.type == "ring") return Topology::ring(topology.switches, tp);
  return Topology::fbfly(topology.k, topology.n, tp);
}

SimConfig ExperimentConfig::sim_config(CircuitMode cmode, RuleMode rmode, uint64_t seed) const {
  SimConfig sc;
  sc.circuit_mode = cmode;
  sc.rule_mode = rmode;
  sc.circuit_rate_bps = topology.circuit_rate_bps;
  sc.detector.byte_threshold = control.byte_threshold;
  sc.detector.duration_threshold_us = control.duration_threshold_us;
  sc.detector.detection_latency_us = control.detection_latency_us;
  sc.observer_period_us = control.observer_period_us;
  sc.decision_period_us = control.decision_period_us;
  sc.th_configure_bps = control.th_configure_bps;
  sc.th_remove_bps = control.th_remove_bps;
  sc.reconfig_delay_us = control.reconfig_delay_us;
  sc.outbound_latency_us = control.outbound_latency_us;
  sc.rule_setup_per_s = control.rule_setup_per_s;
  sc.table_capacity = control.table_capacity;
  sc.dscp_e = control.dscp_e;
  sc.max_sim_time_us = run.max_sim_time_us;
  sc.seed = seed;
  return sc;
}

Trace ExperimentConfig::make_trace(const Topology& topo, uint64_t seed) const {
  if (traffic.mode == "generate") return generate_uniform_trace(topo, traffic.params, seed);
  std::ifstream in(traffic.file);
  if (!in) throw ConfigError("cannot open trace file: " + traffic.file);
  if (traffic.mode == "file") return read_trace_csv(in);
  IngestParams ip;
  ip.prefix_bits = traffic.prefix_bits;
  ip.time_scale = traffic.time_scale;
  ip.mice_max_bytes = traffic.params.mice_max_bytes;
  return ingest_flow_records(in, topo, ip);
}

}  // namespace ocsim
