#include "ocsim/topology.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

#include "ocsim/errors.hpp"
#include "ocsim/util.hpp"

namespace ocsim {

double Topology::host_rate_bps() const {
  return params_.host_rate_bps > 0.0 ? params_.host_rate_bps : params_.packet_rate_bps;
}

HostId Topology::host(SwitchId sw, uint32_t slot) const {
  if (sw >= n_switches_ || slot >= params_.hosts_per_switch)
    throw TopologyError("host(): switch or slot out of range");
  return n_switches_ + sw * params_.hosts_per_switch + slot;
}

SwitchId Topology::host_switch(HostId h) const {
  if (!is_host(h)) throw TopologyError("host_switch(): not a host id");
  return (h - n_switches_) / params_.hosts_per_switch;
}

void Topology::add_link(NodeId src, NodeId dst, double rate, LinkKind kind) {
  links_.push_back(Link{static_cast<LinkId>(links_.size()), src, dst, rate, kind});
}

void Topology::finish() {
  n_hosts_ = n_switches_ * params_.hosts_per_switch;

  // host access links, one pair per host, appended after the packet links
  uplink_.resize(n_hosts_);
  downlink_.resize(n_hosts_);
  double hrate = host_rate_bps();
  for (uint32_t h = 0; h < n_hosts_; ++h) {
    NodeId hn = n_switches_ + h;
    SwitchId sw = h / params_.hosts_per_switch;
    uplink_[h] = static_cast<LinkId>(links_.size());
    add_link(hn, sw, hrate, LinkKind::Host);
    downlink_[h] = static_cast<LinkId>(links_.size());
    add_link(sw, hn, hrate, LinkKind::Host);
  }

  // sorted neighbor lists + (src, neighbor) -> link id
  neighbors_.assign(n_switches_, {});
  for (const Link& l : links_) {
    if (l.kind == LinkKind::Packet) neighbors_[l.src].push_back(l.dst);
  }
  packet_link_of_.assign(n_switches_, {});
  for (uint32_t s = 0; s < n_switches_; ++s) {
    std::sort(neighbors_[s].begin(), neighbors_[s].end());
    packet_link_of_[s].assign(neighbors_[s].size(), kInvalidLink);
  }
  for (const Link& l : links_) {
    if (l.kind != LinkKind::Packet) continue;
    auto& nb = neighbors_[l.src];
    size_t idx = std::lower_bound(nb.begin(), nb.end(), l.dst) - nb.begin();
    packet_link_of_[l.src][idx] = l.id;
  }

  // all-pairs hop counts by BFS from every switch
  constexpr uint32_t kInf = 0xffffffffu;
  dist_.assign(static_cast<size_t>(n_switches_) * n_switches_, kInf);
  std::deque<SwitchId> q;
  for (uint32_t s = 0; s < n_switches_; ++s) {
    uint32_t* d = &dist_[static_cast<size_t>(s) * n_switches_];
    d[s] = 0;
    q.clear();
    q.push_back(s);
    while (!q.empty()) {
      SwitchId u = q.front();
      q.pop_front();
      for (SwitchId v : neighbors_[u]) {
        if (d[v] == kInf) {
          d[v] = d[u] + 1;
          q.push_back(v);
        }
      }
    }
    for (uint32_t t = 0; t < n_switches_; ++t) {
      if (d[t] == kInf) throw TopologyError("topology is not connected");
      diameter_ = std::max(diameter_, d[t]);
    }
  }
}

Topology Topology::ring(uint32_t n_switches, const TopologyParams& p) {
  if (n_switches < 3) throw TopologyError("ring needs at least 3 switches");
  if (p.hosts_per_switch == 0) throw TopologyError("hosts_per_switch must be positive");
  if (p.packet_rate_bps <= 0.0) throw TopologyError("packet_rate_bps must be positive");
  Topology t;
  t.params_ = p;
  t.n_switches_ = n_switches;
  t.name_ = "ring" + std::to_string(n_switches);
  for (uint32_t s = 0; s < n_switches; ++s) {
    uint32_t next = (s + 1) % n_switches;
    t.add_link(s, next, p.packet_rate_bps, LinkKind::Packet);
    t.add_link(next, s, p.packet_rate_bps, LinkKind::Packet);
  }
  t.finish();
  return t;
}

Topology Topology::fbfly(uint32_t k, uint32_t n, const TopologyParams& p) {
  if (k < 2) throw TopologyError("fbfly arity k must be >= 2");
  if (n < 2) throw TopologyError("fbfly dimension n must be >= 2");
  if (p.hosts_per_switch == 0) throw TopologyError("hosts_per_switch must be positive");
  if (p.packet_rate_bps <= 0.0) throw TopologyError("packet_rate_bps must be positive");
  uint32_t dims = n - 1;
  uint64_t count = 1;
  for (uint32_t i = 0; i < dims; ++i) {
    count *= k;
    if (count > 4096) throw TopologyError("fbfly too large (> 4096 switches)");
  }
  Topology t;
  t.params_ = p;
  t.n_switches_ = static_cast<uint32_t>(count);
  t.name_ = "fbfly" + std::to_string(k) + "x" + std::to_string(n);
  // switch id = base-k digits; link to every switch differing in one digit
  for (uint32_t s = 0; s < t.n_switches_; ++s) {
    uint32_t scale = 1;
    for (uint32_t d = 0; d < dims; ++d) {
      uint32_t digit = (s / scale) % k;
      for (uint32_t v = 0; v < k; ++v) {
        if (v == digit) continue;
        uint32_t other = s - digit * scale + v * scale;
        t.add_link(s, other, p.packet_rate_bps, LinkKind::Packet);
      }
      scale *= k;
    }
  }
  t.finish();
  return t;
}

LinkId Topology::packet_link(SwitchId a, SwitchId b) const {
  if (a >= n_switches_ || b >= n_switches_) return kInvalidLink;
  const auto& nb = neighbors_[a];
  auto it = std::lower_bound(nb.begin(), nb.end(), b);
  if (it == nb.end() || *it != b) return kInvalidLink;
  return packet_link_of_[a][it - nb.begin()];
}

LinkId Topology::host_uplink(HostId h) const {
  if (!is_host(h)) throw TopologyError("host_uplink(): not a host id");
  return uplink_[h - n_switches_];
}

LinkId Topology::host_downlink(HostId h) const {
  if (!is_host(h)) throw TopologyError("host_downlink(): not a host id");
  return downlink_[h - n_switches_];
}

const std::vector<SwitchId>& Topology::neighbors(SwitchId sw) const {
  if (sw >= n_switches_) throw TopologyError("neighbors(): switch out of range");
  return neighbors_[sw];
}

uint32_t Topology::hop_distance(SwitchId a, SwitchId b) const {
  if (a >= n_switches_ || b >= n_switches_)
    throw TopologyError("hop_distance(): switch out of range");
  return dist_[static_cast<size_t>(a) * n_switches_ + b];
}

uint32_t Topology::diameter() const { return diameter_; }

std::vector<SwitchId> Topology::default_switch_seq(SwitchId src, SwitchId dst) const {
  if (src >= n_switches_ || dst >= n_switches_)
    throw TopologyError("default_switch_seq(): switch out of range");
  std::vector<SwitchId> seq;
  seq.push_back(src);
  SwitchId cur = src;
  while (cur != dst) {
    uint32_t want = hop_distance(cur, dst) - 1;
    SwitchId next = cur;
    bool found = false;
    for (SwitchId v : neighbors_[cur]) {  // ascending, so first hit is lowest id
      if (hop_distance(v, dst) == want) {
        next = v;
        found = true;
        break;
      }
    }
    if (!found) throw TopologyError("default_switch_seq(): no shortest next hop");
    seq.push_back(next);
    cur = next;
  }
  return seq;
}

Path Topology::default_path(HostId src, HostId dst) const {
  if (!is_host(src) || !is_host(dst)) throw TopologyError("default_path(): not a host id");
  if (src == dst) throw TopologyError("default_path(): src and dst host are the same");
  Path p;
  p.links.push_back(host_uplink(src));
  std::vector<SwitchId> seq = default_switch_seq(host_switch(src), host_switch(dst));
  for (size_t i = 0; i + 1 < seq.size(); ++i) {
    LinkId l = packet_link(seq[i], seq[i + 1]);
    if (l == kInvalidLink) throw TopologyError("default_path(): broken switch sequence");
    p.links.push_back(l);
  }
  p.links.push_back(host_downlink(dst));
  return p;
}

void Topology::dump_adjacency_csv(std::ostream& os) const {
  os << "src_switch,dst_switch,capacity_bps\n";
  for (uint32_t s = 0; s < n_switches_; ++s) {
    for (SwitchId v : neighbors_[s]) {
      LinkId l = packet_link(s, v);
      os << s << ',' << v << ',' << format_double(links_[l].capacity_bps) << '\n';
    }
  }
}

}  // namespace ocsim
