#pragma once

#include <iosfwd>
#include <vector>

#include "ocsim/control_plane.hpp"
#include "ocsim/metrics.hpp"
#include "ocsim/topology.hpp"
#include "ocsim/traffic.hpp"
#include "ocsim/units.hpp"

namespace ocsim {

// Event kinds in tie-break priority order: events at the same microsecond
// are processed in ascending kind, then insertion order.  Circuit teardown
// precedes activation so a flapping pair frees its crossbar port first;
// rule installs land before the flows that might use them arrive.
enum class EventKind : uint8_t {
  CircuitDown = 0,
  CircuitUp = 1,
  RuleInstalled = 2,
  FlowArrival = 3,
  FlowCompletion = 4,
  DetectionFires = 5,
  ObserverTick = 6,
  SchedulerDecision = 7,
};

constexpr int event_priority(EventKind k) { return static_cast<int>(k); }
const char* event_kind_name(EventKind k);

// Forced circuit establishment, used by tests and controlled experiments in
// place of the demand-driven scheduler.
struct ScriptedAdd {
  SimTime t_us = 0;
  SwitchId src = 0;
  SwitchId dst = 0;
};

struct SimConfig {
  CircuitMode circuit_mode = CircuitMode::Shared;
  RuleMode rule_mode = RuleMode::CShare;
  double circuit_rate_bps = 100e9;

  DetectorConfig detector;
  SimTime observer_period_us = 100000;
  SimTime decision_period_us = 0;  // 0 = same as observer period
  double th_configure_bps = 0.0;   // 0 = 0.3 x packet link rate
  double th_remove_bps = 0.0;      // 0 = 0.1 x packet link rate

  SimTime reconfig_delay_us = 20000;
  SimTime outbound_latency_us = 10000;
  double rule_setup_per_s = 40.0;
  uint32_t table_capacity = 1700;
  uint8_t dscp_e = 46;

  SimTime max_sim_time_us = 0;  // 0 = unbounded
  uint64_t seed = 0;            // echoed into the report, not used by the engine

  bool collect_rule_log = true;
  std::ostream* event_log_stream = nullptr;   // time_us,kind,payload JSON
  std::ostream* demand_log_stream = nullptr;  // demand matrix dump per tick

  // scripting hooks
  std::vector<ScriptedAdd> scripted_adds;
  std::vector<FlowId> pre_tagged;  // flows tagged on arrival, bypassing detection
  bool disable_scheduler = false;  // no periodic observer/scheduler events
};

// Runs the trace to completion and returns the full measurement record.
// Deterministic: identical (topology, trace, config) yield byte-identical
// reports including the event log hash.
MetricsReport run_simulation(const Topology& topo, const Trace& trace, const SimConfig& cfg);

}  // namespace ocsim
