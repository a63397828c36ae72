#include "ocsim/switch_config.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ocsim/errors.hpp"

namespace ocsim {

bool rule_matches(const OFRule& r, const PacketCtx& pkt) {
  if (r.match.dscp != pkt.dscp) return false;
  if (r.match.dst_switch != pkt.dst_switch) return false;
  if ((pkt.metadata & r.match.meta_mask) != r.match.meta_value) return false;
  if (r.flow != kAnyFlow && r.flow != pkt.flow) return false;
  return true;
}

std::vector<OFRule> compile_rules(const Circuit& c, RuleMode rule_mode, uint8_t dscp_e,
                                  const std::vector<FlowId>& matched_flows) {
  RuleMatch m;
  m.dscp = dscp_e;
  m.dst_switch = c.dst;
  if (c.mode == CircuitMode::Private) {
    m.meta_value = Metadata::private_value;
    m.meta_mask = Metadata::private_mask;
  } else {
    m.meta_value = Metadata::shared_value;
    m.meta_mask = Metadata::shared_mask;
  }

  std::vector<OFRule> out;
  auto base = [&] {
    OFRule r;
    r.sw = c.src;
    r.match = m;
    r.circuit = c.id;
    r.origin = rule_mode;
    return r;
  };
  if (rule_mode == RuleMode::CShare) {
    out.push_back(base());
  } else {
    for (FlowId f : matched_flows) {
      OFRule r = base();
      r.flow = f;
      out.push_back(r);
    }
  }
  return out;
}

namespace {

const char* op_name(RuleLogEntry::Op op) {
  switch (op) {
    case RuleLogEntry::Op::Install: return "install";
    case RuleLogEntry::Op::Delete: return "delete";
    default: return "reject";
  }
}

const char* meta_bits(uint8_t v) {
  switch (v & 0b11) {
    case 0b00: return "0b00";
    case 0b01: return "0b01";
    case 0b10: return "0b10";
    default: return "0b11";
  }
}

}  // namespace

void write_rule_log_csv(const std::vector<RuleLogEntry>& log, std::ostream& os) {
  os << "t_us,switch,op,origin,dscp,dst_switch,meta_value,meta_mask\n";
  for (const RuleLogEntry& e : log) {
    os << e.t_us << ',' << e.sw << ',' << op_name(e.op) << ',' << rule_mode_name(e.origin)
       << ',' << static_cast<unsigned>(e.dscp) << ',' << e.dst_switch << ','
       << meta_bits(e.meta_value) << ',' << meta_bits(e.meta_mask) << '\n';
  }
}

SwitchFabric::SwitchFabric(uint32_t n_switches, const FabricConfig& cfg)
    : cfg_(cfg),
      n_switches_(n_switches),
      tables_(n_switches),
      tx_ports_(n_switches, 0),
      rx_ports_(n_switches, 0),
      limiter_next_(n_switches, 0),
      pending_installs_(n_switches, 0),
      peak_(n_switches, 0),
      peak_cshare_(n_switches, 0),
      cshare_count_(n_switches, 0),
      up_src_count_(n_switches, 0) {
  if (cfg.rule_setup_per_s <= 0.0) throw SimulationError("rule_setup_per_s must be positive");
  setup_period_us_ = static_cast<SimTime>(std::llround(kUsPerSec / cfg.rule_setup_per_s));
}

CircuitId SwitchFabric::create_circuit(SwitchId src, SwitchId dst, CircuitMode mode,
                                       SimTime now) {
  if (src >= n_switches_ || dst >= n_switches_ || src == dst)
    throw SimulationError("create_circuit: bad endpoints");
  if (tx_ports_[src] >= cfg_.ocs_ports || rx_ports_[dst] >= cfg_.ocs_ports)
    throw SimulationError("create_circuit: crossbar port overflow");
  Circuit c;
  c.id = static_cast<CircuitId>(circuits_.size());
  c.src = src;
  c.dst = dst;
  c.mode = mode;
  c.state = Circuit::State::Configuring;
  c.requested_us = now;
  circuits_.push_back(c);
  ++tx_ports_[src];
  ++rx_ports_[dst];
  return c.id;
}

void SwitchFabric::mark_up(CircuitId id, SimTime now, LinkId link) {
  Circuit& c = circuits_.at(id);
  if (c.state != Circuit::State::Configuring)
    throw SimulationError("mark_up: circuit not configuring");
  c.state = Circuit::State::Up;
  c.up_us = now;
  c.link = link;
  ++up_src_count_[c.src];
}

std::vector<FlowId> SwitchFabric::remove_circuit(CircuitId id, SimTime now) {
  Circuit& c = circuits_.at(id);
  if (c.state == Circuit::State::Down)
    throw SimulationError("remove_circuit: circuit already down");
  bool was_up = c.state == Circuit::State::Up;
  c.state = Circuit::State::Down;
  c.down_us = now;
  --tx_ports_[c.src];
  --rx_ports_[c.dst];
  if (was_up) --up_src_count_[c.src];

  std::vector<FlowId> evicted;
  auto& tab = tables_[c.src];
  for (auto it = tab.begin(); it != tab.end();) {
    if (it->circuit == id) {
      if (it->flow != kAnyFlow) evicted.push_back(it->flow);
      if (it->origin == RuleMode::CShare) --cshare_count_[it->sw];
      log_op(RuleLogEntry::Op::Delete, *it, now);
      it = tab.erase(it);
    } else {
      ++it;
    }
  }
  return evicted;
}

SimTime SwitchFabric::limiter_dispatch(SwitchId sw, SimTime now) {
  SimTime dispatch = std::max(now, limiter_next_[sw]);
  limiter_next_[sw] = dispatch + setup_period_us_;
  return dispatch;
}

uint64_t SwitchFabric::stage_install(OFRule r) {
  r.uid = next_uid_++;
  ++pending_installs_[r.sw];
  staged_.emplace(r.uid, r);
  return r.uid;
}

const OFRule& SwitchFabric::staged(uint64_t uid) const {
  auto it = staged_.find(uid);
  if (it == staged_.end()) throw SimulationError("staged: unknown uid");
  return it->second;
}

bool SwitchFabric::has_staged(uint64_t uid) const { return staged_.count(uid) != 0; }

bool SwitchFabric::commit_install(uint64_t uid, SimTime now) {
  auto it = staged_.find(uid);
  if (it == staged_.end()) throw SimulationError("commit_install: unknown uid");
  OFRule r = it->second;
  staged_.erase(it);
  --pending_installs_[r.sw];
  if (circuits_.at(r.circuit).state != Circuit::State::Up) return false;  // torn down meanwhile
  auto& tab = tables_[r.sw];
  if (tab.size() >= cfg_.table_capacity) {
    ++occupancy_overflows_;
    log_op(RuleLogEntry::Op::Reject, r, now);
    return false;
  }
  r.installed_us = now;
  tab.push_back(r);
  if (r.origin == RuleMode::CShare) {
    ++cshare_count_[r.sw];
    peak_cshare_[r.sw] = std::max(peak_cshare_[r.sw], cshare_count_[r.sw]);
  }
  peak_[r.sw] = std::max(peak_[r.sw], static_cast<uint32_t>(tab.size()));
  ++circuits_[r.circuit].rules_installed;
  log_op(RuleLogEntry::Op::Install, r, now);
  return true;
}

void SwitchFabric::drop_staged(uint64_t uid) {
  auto it = staged_.find(uid);
  if (it == staged_.end()) throw SimulationError("drop_staged: unknown uid");
  --pending_installs_[it->second.sw];
  staged_.erase(it);
}

void SwitchFabric::delete_rule(uint64_t uid, SimTime now) {
  for (auto& tab : tables_) {
    for (auto it = tab.begin(); it != tab.end(); ++it) {
      if (it->uid == uid) {
        if (it->origin == RuleMode::CShare) --cshare_count_[it->sw];
        log_op(RuleLogEntry::Op::Delete, *it, now);
        tab.erase(it);
        return;
      }
    }
  }
  throw SimulationError("delete_rule: unknown uid");
}

const OFRule* SwitchFabric::find_rule(uint64_t uid) const {
  for (const auto& tab : tables_)
    for (const OFRule& r : tab)
      if (r.uid == uid) return &r;
  return nullptr;
}

const OFRule* SwitchFabric::match_packet(SwitchId sw, const PacketCtx& pkt) const {
  for (const OFRule& r : tables_[sw])
    if (rule_matches(r, pkt)) return &r;
  return nullptr;
}

void SwitchFabric::log_op(RuleLogEntry::Op op, const OFRule& r, SimTime t) {
  RuleLogEntry e;
  e.t_us = t;
  e.sw = r.sw;
  e.op = op;
  e.origin = r.origin;
  e.dscp = r.match.dscp;
  e.dst_switch = r.match.dst_switch;
  e.meta_value = r.match.meta_value;
  e.meta_mask = r.match.meta_mask;
  e.flow = r.flow;
  e.circuit = r.circuit;
  log_.push_back(e);
}

void SwitchFabric::audit_cshare_invariant() {
  if (cfg_.rule_mode != RuleMode::CShare) return;
  for (uint32_t s = 0; s < n_switches_; ++s) {
    if (cshare_count_[s] > up_src_count_[s] ||
        (pending_installs_[s] == 0 && cshare_count_[s] != up_src_count_[s])) {
      cshare_invariant_ok_ = false;
      return;
    }
  }
}

}  // namespace ocsim
