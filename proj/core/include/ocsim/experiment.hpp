#pragma once

#include <string>
#include <vector>

#include "ocsim/config_file.hpp"
#include "ocsim/engine.hpp"
#include "ocsim/topology.hpp"
#include "ocsim/traffic.hpp"
#include "ocsim/units.hpp"

namespace ocsim {

// Full description of an experiment: what network to build, what traffic to
// offer, how the control plane is tuned, which circuit/rule mode cells to
// run, and the seed sweep.  Maps 1:1 onto the INI config file; from_doc
// rejects unknown sections/keys and to_doc emits a canonical form so
// parse -> serialize -> parse is an identity.
struct ExperimentConfig {
  std::string name = "custom";

  struct {
    std::string type = "ring";  // ring | fbfly
    uint32_t switches = 10;     // ring size
    uint32_t k = 3, n = 3;      // fbfly radix/dimensions
    uint32_t hosts_per_switch = 40;
    double packet_rate_bps = 10e9;
    double host_rate_bps = 0.0;  // 0 = same as packet links
    double circuit_rate_bps = 100e9;
    uint32_t ocs_ports = 1;
  } topology;

  struct {
    std::string mode = "generate";  // generate | file | ingest
    std::string file;               // trace path for file/ingest modes
    unsigned prefix_bits = 24;      // ingest: subnet size for host placement
    double time_scale = 1.0;        // ingest: start-time compression
    TraceParams params;             // generate-mode knobs
  } traffic;

  struct {
    int64_t byte_threshold = 64 * 1024;
    SimTime duration_threshold_us = 0;
    SimTime detection_latency_us = 1000;
    SimTime observer_period_us = 100000;
    SimTime decision_period_us = 0;  // 0 = observer period
    double th_configure_bps = 0.0;   // 0 = 0.3 x packet rate
    double th_remove_bps = 0.0;      // 0 = 0.1 x packet rate
    SimTime reconfig_delay_us = 20000;
    SimTime outbound_latency_us = 10000;
    double rule_setup_per_s = 40.0;
    uint32_t table_capacity = 1700;
    uint8_t dscp_e = 46;
  } control;

  struct {
    std::vector<CircuitMode> circuits = {CircuitMode::Private, CircuitMode::Shared};
    std::vector<RuleMode> rules = {RuleMode::CShare};
  } modes;

  struct {
    std::vector<uint64_t> seeds = {1};
    std::string out_dir = "out";
    SimTime max_sim_time_us = 0;
    uint32_t jobs = 1;
    bool debug_logs = false;
  } run;

  static ExperimentConfig from_doc(const ConfigDoc& doc);
  static ExperimentConfig from_file(const std::string& path);
  ConfigDoc to_doc() const;
  std::string serialize() const;

  bool operator==(const ExperimentConfig& o) const { return serialize() == o.serialize(); }

  Topology build_topology() const;
  SimConfig sim_config(CircuitMode cmode, RuleMode rmode, uint64_t seed) const;
  // Generates or loads the trace for one seed (file/ingest modes ignore the
  // seed and return the same trace every time).
  Trace make_trace(const Topology& topo, uint64_t seed) const;
};

// Seed lists accept comma-separated entries and inclusive ranges: "1-30",
// "1,2,9", "1-4,8".  format_seed_list emits the shortest such form.
std::vector<uint64_t> parse_seed_list(const std::string& text);
std::string format_seed_list(const std::vector<uint64_t>& seeds);

// Comma-separated mode lists for the [modes] section and CLI flags.
std::vector<CircuitMode> parse_circuit_modes(const std::string& text);
std::vector<RuleMode> parse_rule_modes(const std::string& text);

}  // namespace ocsim
