#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ocsim/topology.hpp"
#include "ocsim/units.hpp"

namespace ocsim {

struct FlowSpec {
  FlowId id = 0;
  CoflowId coflow = kNoCoflow;
  HostId src_host = 0;
  HostId dst_host = 0;
  int64_t size_bytes = 0;
  SimTime start_us = 0;
  FlowClass klass = FlowClass::Mice;
};

struct TraceParams {
  uint64_t n_flows = 1000;
  // class mix: elephants are this share of the flow count and of the bytes
  double elephant_count_fraction = 0.10;
  double elephant_demand_fraction = 0.90;  // <= 0 disables demand pinning
  int64_t mice_min_bytes = 2 * 1024;
  int64_t mice_max_bytes = 32 * 1024;
  int64_t elephant_min_bytes = 1000000;
  int64_t elephant_max_bytes = 100000000;
  // mice are grouped into coflows of uniform width in [min,max]; all members
  // of a coflow arrive together and target the same destination switch.
  // coflow_max_width = 0 keeps every mouse standalone.
  uint32_t coflow_min_width = 4;
  uint32_t coflow_max_width = 32;
  // target mean utilization of the inter-switch packet links; fixes the
  // arrival horizon via offered bit-hops / (load_factor * total capacity)
  double load_factor = 0.5;

  bool operator==(const TraceParams&) const = default;
};

struct TraceMeta {
  uint64_t seed = 0;
  std::string source = "generated";  // "generated" | "csv" | "ingest"
  TraceParams params;
  SimTime horizon_us = 0;  // arrival window used during generation (0 if n/a)
};

struct Trace {
  std::vector<FlowSpec> flows;  // sorted by (start_us, id)
  TraceMeta meta;

  int64_t total_bytes() const;
  uint64_t coflow_count() const;
};

// Uniform all-to-all workload over the topology's hosts.  Destination hosts
// are always on a different switch than the source so every flow crosses the
// upper tier.  Elephant sizes follow a bounded Pareto whose shape is solved
// so the class carries elephant_demand_fraction of the bytes.
Trace generate_uniform_trace(const Topology& topo, const TraceParams& p, uint64_t seed);

// CSV columns: flow_id,coflow_id,src_host,dst_host,size_bytes,start_time_us,class
void write_trace_csv(const Trace& t, std::ostream& os);
Trace read_trace_csv(std::istream& is);

struct IngestParams {
  unsigned prefix_bits = 24;     // IPv4 subnet prefix used for switch placement
  double time_scale = 1.0;       // multiply start times (trace compression)
  int64_t mice_max_bytes = 32 * 1024;  // classifies rows with an empty class field
};

// Replays externally captured flow records (same columns as the trace CSV but
// with dotted IPv4 endpoints).  Subnets are assigned round-robin to switches
// in sorted prefix order; addresses within a subnet take host slots on that
// switch in sorted order.  Throws TraceError if the topology runs out of
// host slots.
Trace ingest_flow_records(std::istream& is, const Topology& topo, const IngestParams& p);

struct TraceValidation {
  bool ok = false;
  std::vector<std::string> problems;
  uint64_t n_flows = 0;
  uint64_t n_coflows = 0;
  uint64_t n_elephants = 0;
  int64_t total_bytes = 0;
  double elephant_count_share = 0.0;
  double elephant_demand_share = 0.0;
  SimTime first_start_us = 0;
  SimTime last_start_us = 0;
};

// Structural checks: unique ids, sorted starts, positive sizes, endpoints
// valid for the topology, coflow members co-arriving toward one switch.
TraceValidation validate_trace(const Trace& t, const Topology& topo);

}  // namespace ocsim
