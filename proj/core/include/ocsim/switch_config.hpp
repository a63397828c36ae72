#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "ocsim/units.hpp"

namespace ocsim {

// Ingress port tier is encoded in packet metadata at the first table:
// 0b01 for packets entering from another switch (upper tier), 0b11 for
// packets entering from a host (lower tier).  A private circuit rule matches
// only lower-tier ingress (value 0b10, mask 0b10); a shared circuit rule
// matches both tiers (value 0b01, mask 0b01), making its match set a strict
// superset of the private one.
struct Metadata {
  static constexpr uint8_t upper = 0b01;
  static constexpr uint8_t lower = 0b11;
  static constexpr uint8_t private_value = 0b10;
  static constexpr uint8_t private_mask = 0b10;
  static constexpr uint8_t shared_value = 0b01;
  static constexpr uint8_t shared_mask = 0b01;
};

constexpr FlowId kAnyFlow = ~0ull;

struct RuleMatch {
  uint8_t dscp = 0;        // exact match on the elephant codepoint
  SwitchId dst_switch = 0; // destination subnet aggregate
  uint8_t meta_value = 0;
  uint8_t meta_mask = 0;
};

struct PacketCtx {
  uint8_t dscp = 0;
  SwitchId dst_switch = 0;
  uint8_t metadata = 0;
  FlowId flow = kAnyFlow;
};

// Redirect rule as installed in a switch table.  cshare rules aggregate (one
// per circuit, flow == kAnyFlow); per_flow rules pin one flow each.
struct OFRule {
  uint64_t uid = 0;
  SwitchId sw = 0;
  RuleMatch match;
  CircuitId circuit = kInvalidCircuit;
  RuleMode origin = RuleMode::CShare;
  FlowId flow = kAnyFlow;
  SimTime installed_us = kNoTime;
};

bool rule_matches(const OFRule& r, const PacketCtx& pkt);

struct Circuit {
  CircuitId id = kInvalidCircuit;
  SwitchId src = 0;
  SwitchId dst = 0;
  CircuitMode mode = CircuitMode::Shared;
  enum class State : uint8_t { Configuring, Up, Down } state = State::Configuring;
  SimTime requested_us = kNoTime;
  SimTime up_us = kNoTime;
  SimTime down_us = kNoTime;
  LinkId link = kInvalidLink;  // engine-assigned optical link id
  double bytes_carried = 0.0;
  uint32_t rules_installed = 0;
};

// Rules a circuit needs: one aggregate rule in cshare mode, one rule per
// matched flow in per_flow mode.  uids are assigned when staged for install.
std::vector<OFRule> compile_rules(const Circuit& c, RuleMode rule_mode, uint8_t dscp_e,
                                  const std::vector<FlowId>& matched_flows);

struct RuleLogEntry {
  SimTime t_us = 0;
  SwitchId sw = 0;
  enum class Op : uint8_t { Install, Delete, Reject } op = Op::Install;
  RuleMode origin = RuleMode::CShare;
  uint8_t dscp = 0;
  SwitchId dst_switch = 0;
  uint8_t meta_value = 0;
  uint8_t meta_mask = 0;
  FlowId flow = kAnyFlow;
  CircuitId circuit = kInvalidCircuit;
};

// CSV: t_us,switch,op,origin,dscp,dst_switch,meta_value,meta_mask
void write_rule_log_csv(const std::vector<RuleLogEntry>& log, std::ostream& os);

struct FabricConfig {
  uint32_t table_capacity = 1700;   // redirect rules per switch
  double rule_setup_per_s = 40.0;   // control channel rule setup rate
  SimTime outbound_latency_us = 10000;
  uint8_t dscp_e = 46;
  uint32_t ocs_ports = 1;
  RuleMode rule_mode = RuleMode::CShare;
};

// Data-plane state of all switches plus the optical crossbar bookkeeping:
// rule tables, circuit registry, per-switch rule-setup limiter, rule log.
class SwitchFabric {
 public:
  SwitchFabric(uint32_t n_switches, const FabricConfig& cfg);

  const FabricConfig& config() const { return cfg_; }

  // --- circuits ---
  CircuitId create_circuit(SwitchId src, SwitchId dst, CircuitMode mode, SimTime now);
  void mark_up(CircuitId id, SimTime now, LinkId link);
  // Tears down a circuit in any non-Down state; deletes its rules and
  // returns the per_flow flows whose rules were removed.
  std::vector<FlowId> remove_circuit(CircuitId id, SimTime now);
  const Circuit& circuit(CircuitId id) const { return circuits_[id]; }
  Circuit& circuit(CircuitId id) { return circuits_[id]; }
  const std::vector<Circuit>& circuits() const { return circuits_; }
  uint32_t tx_ports_in_use(SwitchId sw) const { return tx_ports_[sw]; }
  uint32_t rx_ports_in_use(SwitchId sw) const { return rx_ports_[sw]; }

  // --- rule install pipeline ---
  // Reserves the switch's control channel: returns the dispatch instant
  // (>= now) and advances the limiter.
  SimTime limiter_dispatch(SwitchId sw, SimTime now);
  // Stages a rule whose install completes later; returns its uid.
  uint64_t stage_install(OFRule r);
  const OFRule& staged(uint64_t uid) const;
  bool has_staged(uint64_t uid) const;
  // Finalizes a staged install.  Returns false (and logs a reject) when the
  // table is full; silently drops the stage if the circuit is gone.
  bool commit_install(uint64_t uid, SimTime now);
  // Abandons a staged install (e.g. its flow already completed).
  void drop_staged(uint64_t uid);

  void delete_rule(uint64_t uid, SimTime now);
  const OFRule* find_rule(uint64_t uid) const;
  const OFRule* match_packet(SwitchId sw, const PacketCtx& pkt) const;
  const std::vector<OFRule>& table(SwitchId sw) const { return tables_[sw]; }

  // --- accounting ---
  const std::vector<RuleLogEntry>& rule_log() const { return log_; }
  uint32_t table_size(SwitchId sw) const { return static_cast<uint32_t>(tables_[sw].size()); }
  uint32_t peak_table_size(SwitchId sw) const { return peak_[sw]; }
  uint32_t peak_cshare_rules(SwitchId sw) const { return peak_cshare_[sw]; }
  uint64_t occupancy_overflows() const { return occupancy_overflows_; }
  // In cshare mode: rules per switch never exceed the up circuits sourced
  // there, with equality once no install is in flight.  The engine calls
  // audit_cshare_invariant() after each fully processed event; the flag
  // latches false on the first violation.
  void audit_cshare_invariant();
  bool cshare_invariant_ok() const { return cshare_invariant_ok_; }

 private:
  void log_op(RuleLogEntry::Op op, const OFRule& r, SimTime t);

  FabricConfig cfg_;
  uint32_t n_switches_;
  SimTime setup_period_us_;
  std::vector<Circuit> circuits_;
  std::vector<std::vector<OFRule>> tables_;
  std::vector<uint32_t> tx_ports_, rx_ports_;
  std::vector<SimTime> limiter_next_;
  std::vector<uint32_t> pending_installs_;  // staged per source switch
  std::map<uint64_t, OFRule> staged_;
  uint64_t next_uid_ = 1;
  std::vector<RuleLogEntry> log_;
  std::vector<uint32_t> peak_, peak_cshare_, cshare_count_, up_src_count_;
  uint64_t occupancy_overflows_ = 0;
  bool cshare_invariant_ok_ = true;
};

}  // namespace ocsim
