#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ocsim/units.hpp"

namespace ocsim {

enum class LinkKind : uint8_t { Packet = 0, Host = 1, Circuit = 2 };

struct Link {
  LinkId id;
  NodeId src;
  NodeId dst;
  double capacity_bps;
  LinkKind kind;
};

// A host-to-host route: uplink, zero or more inter-switch links, downlink.
struct Path {
  std::vector<LinkId> links;
};

struct TopologyParams {
  uint32_t hosts_per_switch = 40;
  double packet_rate_bps = 10e9;   // per inter-switch packet link
  double host_rate_bps = 0.0;      // 0 = same as packet_rate_bps
  uint32_t ocs_ports = 1;          // crossbar ports per switch per direction
};

// Static upper tier: packet switches joined by bidirectional packet links,
// plus the host access links.  Optical circuits are added at run time by the
// engine; the topology only fixes how many each switch can terminate.
class Topology {
 public:
  static Topology ring(uint32_t n_switches, const TopologyParams& p);
  // k-ary n-flat flattened butterfly: k^(n-1) switches, each connected to the
  // k-1 switches differing in exactly one base-k digit.
  static Topology fbfly(uint32_t k, uint32_t n, const TopologyParams& p);

  const std::string& name() const { return name_; }
  uint32_t switch_count() const { return n_switches_; }
  uint32_t host_count() const { return n_hosts_; }
  uint32_t hosts_per_switch() const { return params_.hosts_per_switch; }
  uint32_t ocs_ports() const { return params_.ocs_ports; }
  double packet_rate_bps() const { return params_.packet_rate_bps; }
  double host_rate_bps() const;

  bool is_switch(NodeId n) const { return n < n_switches_; }
  bool is_host(NodeId n) const { return n >= n_switches_ && n < n_switches_ + n_hosts_; }
  HostId host(SwitchId sw, uint32_t slot) const;
  SwitchId host_switch(HostId h) const;

  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkId id) const { return links_[id]; }
  LinkId packet_link(SwitchId a, SwitchId b) const;  // kInvalidLink if absent
  LinkId host_uplink(HostId h) const;
  LinkId host_downlink(HostId h) const;
  const std::vector<SwitchId>& neighbors(SwitchId sw) const;  // sorted ascending

  uint32_t hop_distance(SwitchId a, SwitchId b) const;
  uint32_t diameter() const;

  // Deterministic default route: shortest path, ties broken by always
  // stepping to the lowest-id next switch.  Returned sequence includes both
  // endpoints; length 1 when src == dst.
  std::vector<SwitchId> default_switch_seq(SwitchId src, SwitchId dst) const;
  Path default_path(HostId src, HostId dst) const;

  // Inter-switch adjacency as CSV: src_switch,dst_switch,capacity_bps
  void dump_adjacency_csv(std::ostream& os) const;

 private:
  Topology() = default;
  void add_link(NodeId src, NodeId dst, double rate, LinkKind kind);
  void finish();  // builds neighbor lists, distances, host links index

  std::string name_;
  TopologyParams params_;
  uint32_t n_switches_ = 0;
  uint32_t n_hosts_ = 0;
  std::vector<Link> links_;
  std::vector<std::vector<SwitchId>> neighbors_;
  std::vector<std::vector<LinkId>> packet_link_of_;  // [src][neighbor index]
  std::vector<uint32_t> dist_;                       // n_switches^2
  std::vector<LinkId> uplink_;                       // per host
  std::vector<LinkId> downlink_;
  uint32_t diameter_ = 0;
};

}  // namespace ocsim
