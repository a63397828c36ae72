#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ocsim/topology.hpp"
#include "ocsim/units.hpp"

namespace ocsim {

// Server-side elephant detector.  A flow is promoted once its sent bytes
// cross byte_threshold or its age crosses duration_threshold (whichever is
// enabled and fires first); the tag lands detection_latency later.
struct DetectorConfig {
  int64_t byte_threshold = 64 * 1024;   // 0 disables the byte rule
  SimTime duration_threshold_us = 0;    // 0 disables the duration rule
  SimTime detection_latency_us = 1000;
};

// Absolute time at which the detector fires for a flow advancing at
// `rate_bps` from `bytes_sent` at `now`, or nullopt if it cannot fire before
// the flow would complete at that rate.  Pure: the engine re-evaluates this
// whenever the flow's rate changes.
std::optional<SimTime> predict_detection(const DetectorConfig& cfg, SimTime now,
                                         SimTime flow_start, double bytes_sent,
                                         double rate_bps, int64_t size_bytes);

// Demand seen by the observer for one (transit switch, destination switch)
// pair: tagged flows whose default route crosses `transit` toward `dst`.
struct DemandEntry {
  double rate_bps = 0.0;         // all tagged flows crossing the pair
  double source_rate_bps = 0.0;  // subset that originates at the transit switch
  uint32_t flows = 0;
  uint32_t hops = 0;  // packet hops from transit to dst along the default route
};

struct DemandMatrix {
  SimTime t_us = 0;
  std::map<std::pair<SwitchId, SwitchId>, DemandEntry> entries;

  const DemandEntry* find(SwitchId transit, SwitchId dst) const;
  void dump_csv(std::ostream& os) const;  // t_us,transit_switch,dst_switch,rate_bps,flows
};

// One tagged flow as sampled by the observer at a tick.
struct ObservedFlow {
  FlowId id = 0;
  double mean_rate_bps = 0.0;                    // averaged over the past window
  const std::vector<SwitchId>* route = nullptr;  // default route, src..dst switches
};

// Aggregates tagged-flow demand per (transit, dst) pair.  Every switch on a
// flow's default route except the destination itself accumulates the flow's
// rate; the first one also accumulates source_rate_bps.
DemandMatrix observe_demand(const std::vector<ObservedFlow>& flows, SimTime t_us);

struct SchedulerConfig {
  CircuitMode mode = CircuitMode::Shared;
  double th_configure_bps = 0.0;  // demand needed to request a circuit
  double th_remove_bps = 0.0;     // demand below which an up circuit is torn down
  uint32_t ocs_ports = 1;         // crossbar ports per switch per direction
};

// A circuit the scheduler already knows about (configuring or up).
struct CircuitView {
  CircuitId id = 0;
  SwitchId src = 0;
  SwitchId dst = 0;
  bool up = false;  // false while still configuring
};

struct CircuitPlan {
  std::vector<std::pair<SwitchId, SwitchId>> add;  // in decided order
  std::vector<CircuitId> remove;
};

// Greedy hysteresis scheduler.  Tears down up circuits whose demand fell
// below th_remove, then walks demand entries in decreasing order of matching
// weight -- rate times the packet hops the circuit would bypass, i.e. the
// bit-hops offloaded from the packet tier -- and adds circuits while crossbar
// ports remain on both endpoints.  Raw rate alone would always favour
// interception right next to the destination (where per-destination demand
// funnels to its peak) and the resulting one-hop bypasses barely relieve the
// network.  In Private mode only demand sourced at the transit switch counts.
CircuitPlan schedule_circuits(const DemandMatrix& demand,
                              const std::vector<CircuitView>& current,
                              const SchedulerConfig& cfg);

}  // namespace ocsim
