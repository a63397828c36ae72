#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocsim/switch_config.hpp"
#include "ocsim/units.hpp"

namespace ocsim {

struct FlowRecord {
  FlowId id = 0;
  CoflowId coflow = kNoCoflow;
  FlowClass klass = FlowClass::Mice;
  HostId src_host = 0;
  HostId dst_host = 0;
  int64_t size_bytes = 0;
  SimTime start_us = 0;
  SimTime completion_us = kNoTime;
  bool tagged = false;
  SimTime tag_us = kNoTime;
  bool used_circuit = false;
  SimTime first_reroute_us = kNoTime;
  uint32_t reroutes = 0;

  SimTime fct_us() const { return completion_us - start_us; }
};

struct CoflowRecord {
  CoflowId id = kNoCoflow;
  uint32_t width = 0;
  bool all_mice = true;
  SimTime arrival_us = 0;
  SimTime completion_us = kNoTime;
  int64_t bytes = 0;

  SimTime duration_us() const { return completion_us - arrival_us; }
};

struct CircuitRecord {
  CircuitId id = kInvalidCircuit;
  SwitchId src = 0;
  SwitchId dst = 0;
  CircuitMode mode = CircuitMode::Shared;
  SimTime requested_us = kNoTime;
  SimTime up_us = kNoTime;
  SimTime down_us = kNoTime;  // kNoTime if still up at the end
  double bytes_carried = 0.0;
  uint32_t rules_installed = 0;
};

struct SwitchFootprint {
  SwitchId sw = 0;
  uint64_t installs = 0;
  uint64_t deletes = 0;
  uint64_t rejects = 0;
  uint32_t peak_concurrent = 0;
  uint32_t peak_concurrent_cshare = 0;
  std::vector<uint64_t> minute_installs;  // install count per minute bucket
  double installs_per_minute = 0.0;       // installs scaled to a 60 s window
  bool budget_overflow = false;  // sustained rate exceeds the table capacity
};

// Echo of the run setup, carried into reports so result files are
// self-describing.
struct RunInfo {
  std::string topology;
  uint32_t n_switches = 0;
  uint32_t n_hosts = 0;
  CircuitMode circuit_mode = CircuitMode::Shared;
  RuleMode rule_mode = RuleMode::CShare;
  uint64_t seed = 0;
  double packet_rate_bps = 0.0;
  double circuit_rate_bps = 0.0;
  int64_t byte_threshold = 0;
  SimTime observer_period_us = 0;
  SimTime reconfig_delay_us = 0;
  SimTime outbound_latency_us = 0;
  double rule_setup_per_s = 0.0;
  uint32_t table_capacity = 0;
};

struct MetricsReport {
  RunInfo run;
  std::vector<FlowRecord> flows;
  std::vector<CoflowRecord> coflows;
  std::vector<CircuitRecord> circuits;
  std::vector<RuleLogEntry> rule_log;
  std::vector<SwitchFootprint> footprint;
  SimTime end_us = 0;
  int64_t trace_bytes = 0;
  int64_t delivered_bytes = 0;
  uint64_t events_processed = 0;
  uint64_t event_log_hash = 0;
  uint64_t occupancy_overflows = 0;
  bool cshare_invariant_ok = true;
  uint64_t flows_tagged = 0;
  uint32_t circuits_requested = 0;
};

struct DistStats {
  uint64_t count = 0;
  double mean = 0.0, p50 = 0.0, p95 = 0.0, p99 = 0.0, min = 0.0, max = 0.0;
};

DistStats dist_stats(std::vector<double> xs);  // sorts its copy

// Per-flow goodput (size*8/fct) statistics for one class.
DistStats throughput_stats(const MetricsReport& r, FlowClass klass);

struct CompletionStats {
  DistStats mice_fct_us;
  DistStats elephant_fct_us;
  DistStats mice_coflow_us;  // coflows whose members are all mice
};
CompletionStats completion_stats(const MetricsReport& r);

// Rebuilds per-switch footprints by replaying the rule log (independent of
// the live fabric counters; tests cross-check the two).
std::vector<SwitchFootprint> footprint_from_log(const std::vector<RuleLogEntry>& log,
                                                uint32_t n_switches, SimTime end_us,
                                                uint32_t table_capacity);
uint64_t total_installs(const std::vector<SwitchFootprint>& fp);
double network_installs_per_minute(const std::vector<SwitchFootprint>& fp);

// Pairwise deltas between a baseline run and another run over the same
// trace.  delta_pct is the raw relative change (other-baseline)/baseline*100;
// improvement_pct flips the sign for metrics where lower is better, so
// positive always means `other` did better.
struct MetricDelta {
  std::string metric;
  std::string klass;
  double baseline = 0.0;
  double other = 0.0;
  double delta_pct = 0.0;
  double improvement_pct = 0.0;
};
struct ComparisonResult {
  std::vector<MetricDelta> deltas;
  // Non-fatal annotations, e.g. when the two runs used different traces or
  // topologies and the deltas are therefore not apples-to-apples.
  std::vector<std::string> warnings;
};
ComparisonResult compare_runs(const MetricsReport& baseline, const MetricsReport& other);

// The fixed metric set used by compare_runs and the results tables.
struct MetricValue {
  std::string metric;
  std::string klass;
  double value = 0.0;
  bool higher_is_better = false;
};
std::vector<MetricValue> standard_metrics(const MetricsReport& r);

// metric,class,mode,topology,value,ci_low,ci_high,trials
struct ResultRow {
  std::string metric;
  std::string klass;
  std::string mode;
  std::string topology;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  uint32_t trials = 0;
};
ResultRow aggregate_result(const std::string& metric, const std::string& klass,
                           const std::string& mode, const std::string& topology,
                           const std::vector<double>& per_seed_values);
void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os);

// JSON round-trip for run reports (the `report` command consumes these).
std::string report_to_json(const MetricsReport& r, bool include_logs);
MetricsReport report_from_json(const std::string& text);

}  // namespace ocsim
