#include "ocsim/presets.hpp"

#include "ocsim/errors.hpp"

namespace ocsim {

namespace {

// Shared control settings for the ring simulation presets (10G/100G links):
// byte-count detection sized so mice can never trip it, thresholds sized to
// the per-destination demand a 10G packet tier can aggregate, and an
// effectively unthrottled rule channel so footprint counts reflect demand,
// not the limiter.
void sim_scale_control(ExperimentConfig& cfg) {
  cfg.control.byte_threshold = 64 * 1024;
  cfg.control.duration_threshold_us = 0;
  cfg.control.detection_latency_us = 1000;
  cfg.control.observer_period_us = 10000;
  cfg.control.decision_period_us = 0;
  cfg.control.th_configure_bps = 2e9;
  cfg.control.th_remove_bps = 0.3e9;
  cfg.control.reconfig_delay_us = 20000;
  cfg.control.outbound_latency_us = 1000;
  cfg.control.rule_setup_per_s = 1e6;
  cfg.control.table_capacity = 1700;
  cfg.control.dscp_e = 46;
}

// Ring sweep recipe.  Flow count is fixed across sizes; capacity grows with
// the ring, so larger rings run a shorter arrival horizon at the same 0.7
// offered load.  OCS radix grows with ring size ((S-4)/2 ports per switch) so
// the optical tier keeps pace with the quadratic growth in switch pairs.
ExperimentConfig ring_sim(const std::string& name, uint32_t switches) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.topology.type = "ring";
  cfg.topology.switches = switches;
  cfg.topology.hosts_per_switch = 40;
  cfg.topology.packet_rate_bps = 10e9;
  cfg.topology.circuit_rate_bps = 100e9;
  cfg.topology.ocs_ports = (switches - 4) / 2;
  cfg.traffic.params.n_flows = 32000;
  cfg.traffic.params.load_factor = 0.7;
  sim_scale_control(cfg);
  cfg.modes.circuits = {CircuitMode::Private, CircuitMode::Shared};
  cfg.modes.rules = {RuleMode::CShare};
  cfg.run.seeds = parse_seed_list("1-30");
  cfg.run.out_dir = "out/" + name;
  return cfg;
}

// Flattened-butterfly sweep recipe.  Fabric capacity scales as k^2(k-1), so
// the flow count follows it to keep a ~100 ms horizon at 0.7 load, and the
// per-switch OCS radix scales as k-1 to keep optical capacity proportional to
// fabric capacity.  The control loop is faster than the ring presets
// (2 ms observation, 5 ms reconfiguration): with a flat diameter-2 fabric the
// interesting dynamics play out in a much shorter horizon, and the faster
// optics keep circuit formation relevant within it.  The configure threshold
// sits above the host NIC rate so only aggregated (multi-flow) funnels can
// trigger a circuit.
ExperimentConfig fbfly_sim(const std::string& name, uint32_t k, uint64_t n_flows) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.topology.type = "fbfly";
  cfg.topology.k = k;
  cfg.topology.n = 3;
  cfg.topology.hosts_per_switch = 40;
  cfg.topology.packet_rate_bps = 10e9;
  cfg.topology.host_rate_bps = 10e9;
  cfg.topology.circuit_rate_bps = 100e9;
  cfg.topology.ocs_ports = k - 1;
  cfg.traffic.params.n_flows = n_flows;
  cfg.traffic.params.load_factor = 0.7;
  cfg.control.byte_threshold = 64 * 1024;
  cfg.control.duration_threshold_us = 0;
  cfg.control.detection_latency_us = 500;
  cfg.control.observer_period_us = 2000;
  cfg.control.decision_period_us = 0;
  cfg.control.th_configure_bps = 4e9;
  cfg.control.th_remove_bps = 0.3e9;
  cfg.control.reconfig_delay_us = 5000;
  cfg.control.outbound_latency_us = 500;
  cfg.control.rule_setup_per_s = 1e6;
  cfg.control.table_capacity = 1700;
  cfg.control.dscp_e = 46;
  cfg.modes.circuits = {CircuitMode::Private, CircuitMode::Shared};
  cfg.modes.rules = {RuleMode::CShare};
  cfg.run.seeds = parse_seed_list("1-30");
  cfg.run.out_dir = "out/" + name;
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {
      "uniform-coflow", "ring10-sim",  "ring12-sim", "ring14-sim",
      "ring16-sim",     "fbfly9-sim",  "fbfly16-sim", "fbfly25-sim",
      "fbfly36-sim",    "uniform-intensive", "fbfly333-emu-scale",
  };
}

ExperimentConfig preset_config(const std::string& name) {
  if (name == "ring10-sim") return ring_sim(name, 10);
  if (name == "ring12-sim") return ring_sim(name, 12);
  if (name == "ring14-sim") return ring_sim(name, 14);
  if (name == "ring16-sim") return ring_sim(name, 16);
  if (name == "uniform-coflow") {
    // The canonical uniform coflow workload on the 10-switch ring: mice
    // coflows hold 90% of the flows and elephants carry 90% of the bytes.
    ExperimentConfig cfg = ring_sim(name, 10);
    cfg.run.out_dir = "out/" + name;
    return cfg;
  }
  if (name == "fbfly9-sim") return fbfly_sim(name, 3, 10600);
  if (name == "fbfly16-sim") return fbfly_sim(name, 4, 28200);
  if (name == "fbfly25-sim") return fbfly_sim(name, 5, 58700);
  if (name == "fbfly36-sim") return fbfly_sim(name, 6, 105700);
  if (name == "uniform-intensive") {
    // Rule-pressure variant: many small elephants (80% of flows, all above
    // the detection threshold) through a wide OCS radix, so per-flow rules
    // accumulate against the table budget while classifier rules stay at one
    // per circuit.  Demand pinning is effectively disabled so elephant sizes
    // stay inside their configured band.
    ExperimentConfig cfg = ring_sim(name, 10);
    cfg.topology.ocs_ports = 6;
    cfg.traffic.params.n_flows = 150000;
    cfg.traffic.params.elephant_count_fraction = 0.8;
    cfg.traffic.params.elephant_demand_fraction = 0.99;
    cfg.traffic.params.elephant_min_bytes = 128 * 1024;
    cfg.traffic.params.elephant_max_bytes = 2 * 1024 * 1024;
    cfg.control.th_configure_bps = 1e9;
    cfg.modes.circuits = {CircuitMode::Shared};
    cfg.modes.rules = {RuleMode::CShare, RuleMode::PerFlow};
    cfg.run.seeds = parse_seed_list("1-3");
    cfg.run.out_dir = "out/" + name;
    return cfg;
  }
  if (name == "fbfly333-emu-scale") {
    // Testbed-scale parameters: 9 switches, 5 hosts each, 10M/100M links,
    // real rule-setup throttling and a slow observer.
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.topology.type = "fbfly";
    cfg.topology.k = 3;
    cfg.topology.n = 3;
    cfg.topology.hosts_per_switch = 5;
    cfg.topology.packet_rate_bps = 10e6;
    cfg.topology.circuit_rate_bps = 100e6;
    cfg.topology.ocs_ports = 1;
    cfg.traffic.params.n_flows = 600;
    cfg.traffic.params.coflow_min_width = 0;
    cfg.traffic.params.coflow_max_width = 0;
    cfg.traffic.params.load_factor = 0.5;
    cfg.control.byte_threshold = 64 * 1024;
    cfg.control.duration_threshold_us = 0;
    cfg.control.detection_latency_us = 1000;
    cfg.control.observer_period_us = 100000;
    cfg.control.decision_period_us = 0;
    cfg.control.th_configure_bps = 0.0;  // 0.3 x packet rate
    cfg.control.th_remove_bps = 0.0;     // 0.1 x packet rate
    cfg.control.reconfig_delay_us = 20000;
    cfg.control.outbound_latency_us = 10000;
    cfg.control.rule_setup_per_s = 40.0;
    cfg.control.table_capacity = 1700;
    cfg.control.dscp_e = 46;
    cfg.modes.circuits = {CircuitMode::None, CircuitMode::Private, CircuitMode::Shared};
    cfg.modes.rules = {RuleMode::CShare, RuleMode::PerFlow};
    cfg.run.seeds = parse_seed_list("1-3");
    cfg.run.out_dir = "out/" + name;
    return cfg;
  }
  throw ConfigError("unknown preset `" + name + "`");
}

}  // namespace ocsim
