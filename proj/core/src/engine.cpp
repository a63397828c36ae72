#include "ocsim/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>

#include "ocsim/errors.hpp"
#include "ocsim/max_min.hpp"
#include "ocsim/util.hpp"

namespace ocsim {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::CircuitDown: return "circuit_down";
    case EventKind::CircuitUp: return "circuit_up";
    case EventKind::RuleInstalled: return "rule_installed";
    case EventKind::FlowArrival: return "flow_arrival";
    case EventKind::FlowCompletion: return "flow_completion";
    case EventKind::DetectionFires: return "detection_fires";
    case EventKind::ObserverTick: return "observer_tick";
    default: return "scheduler_decision";
  }
}

namespace {

struct Event {
  SimTime t = 0;
  EventKind k = EventKind::FlowArrival;
  uint64_t seq = 0;  // insertion order, breaks (t, kind) ties
  uint64_t a = 0;    // payload: flow index, circuit id, staged uid, script index
  uint64_t b = 0;    // payload: generation counter where applicable
};

struct EventAfter {
  bool operator()(const Event& x, const Event& y) const {
    if (x.t != y.t) return x.t > y.t;
    if (x.k != y.k) return event_priority(x.k) > event_priority(y.k);
    return x.seq > y.seq;
  }
};

struct PairPath {
  std::vector<SwitchId> seq;    // switches src..dst inclusive
  std::vector<LinkId> links;    // inter-switch links only
};

struct EngineFlow {
  const FlowSpec* spec = nullptr;
  const PairPath* route = nullptr;  // null for intra-switch flows
  SwitchId src_sw = 0, dst_sw = 0;
  std::vector<LinkId> cur_links;
  CircuitId circuit = kInvalidCircuit;

  double bytes = 0.0;
  double rate = 0.0;
  SimTime last_advance = 0;
  uint64_t gen = 0;  // bumped on every rate change; stale events check it

  bool active = false, completed = false, tagged = false;
  SimTime tag_us = kNoTime, completion_us = kNoTime, first_reroute_us = kNoTime;
  uint32_t reroutes = 0;
  bool used_circuit = false;

  SimTime predicted_completion = kNoTime;
  SimTime predicted_detection = kNoTime;
  // Once the detector's byte threshold is actually crossed the fire time is
  // frozen here; rate changes afterwards must not postpone the detection.
  SimTime detect_at = kNoTime;

  double window_mark_bytes = 0.0;
  SimTime window_mark_t = 0;

  uint64_t rule_uid = 0;          // installed per_flow rule, 0 = none
  bool install_requested = false; // a per_flow install is staged or queued
};

struct CoflowTrack {
  uint32_t width = 0, remaining = 0;
  bool all_mice = true;
  SimTime arrival = 0;
  int64_t bytes = 0;
};

class Engine {
 public:
  Engine(const Topology& topo, const Trace& trace, const SimConfig& cfg)
      : topo_(topo), trace_(trace), cfg_(cfg) {}

  MetricsReport run();

 private:
  // --- event plumbing ---
  void push(SimTime t, EventKind k, uint64_t a, uint64_t b) {
    if (t < now_) throw SimulationError("event scheduled in the past");
    queue_.push(Event{t, k, next_seq_++, a, b});
  }
  void record_event(SimTime t, EventKind k, uint64_t a, uint64_t b);

  // --- flow mechanics ---
  void advance(EngineFlow& f, SimTime t);
  void set_path(EngineFlow& f, std::vector<LinkId> links, CircuitId c, SimTime t);
  void resolve_path(EngineFlow& f, SimTime t);
  void reallocate(SimTime t);
  void schedule_completion_sentinel();
  void schedule_detection_sentinel();
  void after_tag(uint32_t idx, SimTime t);
  void request_per_flow_install(uint32_t idx, SimTime t);

  // --- event handlers ---
  void on_arrival(uint32_t idx, SimTime t);
  void on_completion(uint32_t idx, uint64_t gen, SimTime t);
  void on_detection(uint32_t idx, uint64_t gen, SimTime t);
  void on_observer_tick(SimTime t);
  void on_scheduler_decision(SimTime t, uint64_t script_idx);
  void on_circuit_up(CircuitId cid, SimTime t);
  void teardown_circuit(CircuitId cid, SimTime t);
  void on_rule_installed(uint64_t uid, SimTime t);

  const Topology& topo_;
  const Trace& trace_;
  const SimConfig& cfg_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  uint64_t next_seq_ = 0;
  SimTime now_ = 0;

  std::vector<EngineFlow> flows_;
  std::map<FlowId, uint32_t> flow_index_;
  std::vector<uint32_t> actives_;  // sorted flow indices
  std::map<CoflowId, CoflowTrack> coflows_;
  std::map<std::pair<SwitchId, SwitchId>, PairPath> pair_paths_;
  std::vector<double> caps_;
  std::map<std::pair<SwitchId, SwitchId>, CircuitId> up_circuits_;

  SwitchFabric* fabric_ = nullptr;
  double th_configure_ = 0.0, th_remove_ = 0.0;
  SimTime decision_period_ = 0;
  DemandMatrix latest_demand_;
  bool demand_header_written_ = false;

  bool realloc_dirty_ = false;
  uint64_t completed_count_ = 0;
  int64_t delivered_bytes_ = 0;
  uint64_t flows_tagged_ = 0;
  uint32_t circuits_requested_ = 0;

  Fnv1a64 hash_;
  uint64_t events_processed_ = 0;

  // scratch for reallocate()
  std::vector<const std::vector<LinkId>*> alloc_paths_;
  std::vector<double> link_load_;

  std::map<CoflowId, CoflowRecord> coflow_records_;
};

void Engine::record_event(SimTime t, EventKind k, uint64_t a, uint64_t b) {
  ++events_processed_;
  hash_.feed_i64(t);
  hash_.feed_u64(static_cast<uint64_t>(k));
  hash_.feed_u64(a);
  hash_.feed_u64(b);
  if (cfg_.event_log_stream != nullptr) {
    *cfg_.event_log_stream << t << ',' << event_kind_name(k) << ",{\"a\":" << a
                           << ",\"b\":" << b << "}\n";
  }
}

void Engine::advance(EngineFlow& f, SimTime t) {
  if (!f.active || t <= f.last_advance) {
    f.last_advance = std::max(f.last_advance, t);
    return;
  }
  double dt_us = static_cast<double>(t - f.last_advance);
  double delta = f.rate * dt_us / (kBitsPerByte * kUsPerSec);
  double cap = static_cast<double>(f.spec->size_bytes);
  if (f.bytes + delta > cap) delta = cap - f.bytes;
  if (delta > 0.0) {
    double th = static_cast<double>(cfg_.detector.byte_threshold);
    if (!f.tagged && f.detect_at == kNoTime && cfg_.detector.byte_threshold > 0 &&
        f.spec->size_bytes > cfg_.detector.byte_threshold && f.bytes < th &&
        f.bytes + delta >= th) {
      // exact crossing instant by linear interpolation within this interval
      double cross_dt = (th - f.bytes) * kBitsPerByte / f.rate * kUsPerSec;
      SimTime crossed = f.last_advance + static_cast<SimTime>(std::ceil(cross_dt));
      f.detect_at = std::max(crossed + cfg_.detector.detection_latency_us, t);
      f.predicted_detection = f.detect_at;
    }
    f.bytes += delta;
    if (f.circuit != kInvalidCircuit) {
      Circuit& c = fabric_->circuit(f.circuit);
      if (c.state != Circuit::State::Up)
        throw SimulationError("flow carried by a circuit that is not up");
      c.bytes_carried += delta;
    }
  }
  f.last_advance = t;
}

void Engine::set_path(EngineFlow& f, std::vector<LinkId> links, CircuitId c, SimTime t) {
  if (links == f.cur_links) return;
  advance(f, t);
  f.cur_links = std::move(links);
  f.circuit = c;
  if (c != kInvalidCircuit) f.used_circuit = true;
  ++f.reroutes;
  if (f.first_reroute_us == kNoTime) f.first_reroute_us = t;
  realloc_dirty_ = true;
}

// Walks the default route and applies the first matching redirect rule.
// Untagged flows always ride the default packet path.
void Engine::resolve_path(EngineFlow& f, SimTime t) {
  const FlowSpec& s = *f.spec;
  std::vector<LinkId> def;
  def.push_back(topo_.host_uplink(s.src_host));
  if (f.route != nullptr)
    def.insert(def.end(), f.route->links.begin(), f.route->links.end());
  def.push_back(topo_.host_downlink(s.dst_host));

  if (!f.tagged || f.route == nullptr) {
    set_path(f, std::move(def), kInvalidCircuit, t);
    return;
  }

  PacketCtx pkt;
  pkt.dscp = cfg_.dscp_e;
  pkt.dst_switch = f.dst_sw;
  pkt.flow = s.id;
  const auto& seq = f.route->seq;
  for (size_t i = 0; i + 1 < seq.size(); ++i) {
    pkt.metadata = i == 0 ? Metadata::lower : Metadata::upper;
    const OFRule* r = fabric_->match_packet(seq[i], pkt);
    if (r == nullptr) continue;
    const Circuit& c = fabric_->circuit(r->circuit);
    if (c.state != Circuit::State::Up)
      throw SimulationError("matched rule points at a circuit that is not up");
    std::vector<LinkId> links;
    links.push_back(topo_.host_uplink(s.src_host));
    for (size_t j = 0; j < i; ++j) links.push_back(f.route->links[j]);
    links.push_back(c.link);
    links.push_back(topo_.host_downlink(s.dst_host));
    set_path(f, std::move(links), r->circuit, t);
    return;
  }
  set_path(f, std::move(def), kInvalidCircuit, t);
}

void Engine::reallocate(SimTime t) {
  realloc_dirty_ = false;
  alloc_paths_.clear();
  alloc_paths_.reserve(actives_.size());
  for (uint32_t idx : actives_) alloc_paths_.push_back(&flows_[idx].cur_links);
  std::vector<double> rates = allocate_rates(alloc_paths_, caps_);

  // conservation audit: allocated load must respect every capacity
  if (link_load_.size() < caps_.size()) link_load_.resize(caps_.size(), 0.0);
  std::vector<LinkId> touched;
  for (size_t i = 0; i < actives_.size(); ++i) {
    for (LinkId l : *alloc_paths_[i]) {
      if (link_load_[l] == 0.0) touched.push_back(l);
      link_load_[l] += rates[i];
    }
  }
  for (LinkId l : touched) {
    if (link_load_[l] > caps_[l] * (1.0 + 1e-6))
      throw SimulationError("allocation exceeds link capacity");
    link_load_[l] = 0.0;
  }

  for (size_t i = 0; i < actives_.size(); ++i) {
    EngineFlow& f = flows_[actives_[i]];
    double next = rates[i];
    if (next == f.rate) continue;
    advance(f, t);
    f.rate = next;
    ++f.gen;
    if (next > 0.0) {
      double left_bits = (static_cast<double>(f.spec->size_bytes) - f.bytes) * kBitsPerByte;
      SimTime dt = static_cast<SimTime>(std::ceil(left_bits / next * kUsPerSec));
      f.predicted_completion = t + std::max<SimTime>(dt, 0);
    } else {
      f.predicted_completion = kNoTime;
    }
    if (!f.tagged && f.detect_at == kNoTime) {
      // only re-estimate while the byte threshold is still ahead; once crossed
      // the fire time is frozen in detect_at and must not drift with the rate
      auto fire = predict_detection(cfg_.detector, t, f.spec->start_us, f.bytes, next,
                                    f.spec->size_bytes);
      f.predicted_detection = fire ? *fire : kNoTime;
    }
  }
  schedule_completion_sentinel();
  schedule_detection_sentinel();
}

// One queued completion event for the earliest-finishing active flow; its
// validity is checked against (gen, predicted time) when it fires.
void Engine::schedule_completion_sentinel() {
  SimTime best = kNoTime;
  uint32_t best_idx = 0;
  for (uint32_t idx : actives_) {
    const EngineFlow& f = flows_[idx];
    if (f.predicted_completion == kNoTime) continue;
    if (best == kNoTime || f.predicted_completion < best) {
      best = f.predicted_completion;
      best_idx = idx;
    }
  }
  if (best != kNoTime) push(best, EventKind::FlowCompletion, best_idx, flows_[best_idx].gen);
}

void Engine::schedule_detection_sentinel() {
  SimTime best = kNoTime;
  uint32_t best_idx = 0;
  for (uint32_t idx : actives_) {
    const EngineFlow& f = flows_[idx];
    if (f.tagged || f.predicted_detection == kNoTime) continue;
    if (best == kNoTime || f.predicted_detection < best) {
      best = f.predicted_detection;
      best_idx = idx;
    }
  }
  // a frozen fire time can sit slightly in the past when the crossing was
  // discovered mid-interval; deliver it on the next tick instead
  if (best != kNoTime)
    push(std::max(best, now_), EventKind::DetectionFires, best_idx, flows_[best_idx].gen);
}

void Engine::on_arrival(uint32_t idx, SimTime t) {
  EngineFlow& f = flows_[idx];
  f.active = true;
  f.last_advance = t;
  f.window_mark_bytes = 0.0;
  f.window_mark_t = t;
  actives_.insert(std::lower_bound(actives_.begin(), actives_.end(), idx), idx);
  if (!cfg_.pre_tagged.empty() &&
      std::find(cfg_.pre_tagged.begin(), cfg_.pre_tagged.end(), f.spec->id) !=
          cfg_.pre_tagged.end()) {
    f.tagged = true;
    f.tag_us = t;
    ++flows_tagged_;
  }
  resolve_path(f, t);
  if (f.tagged) after_tag(idx, t);
  realloc_dirty_ = true;
}

void Engine::on_completion(uint32_t idx, uint64_t gen, SimTime t) {
  EngineFlow& f = flows_[idx];
  if (f.completed || gen != f.gen || f.predicted_completion != t) return;  // stale
  advance(f, t);
  f.bytes = static_cast<double>(f.spec->size_bytes);  // exact on the books
  f.completed = true;
  f.active = false;
  f.completion_us = t;
  delivered_bytes_ += f.spec->size_bytes;
  ++completed_count_;
  actives_.erase(std::lower_bound(actives_.begin(), actives_.end(), idx));
  if (f.rule_uid != 0) {
    fabric_->delete_rule(f.rule_uid, t);
    f.rule_uid = 0;
  }
  if (f.spec->coflow != kNoCoflow) {
    CoflowTrack& ct = coflows_[f.spec->coflow];
    if (--ct.remaining == 0) {
      CoflowRecord rec;
      rec.id = f.spec->coflow;
      rec.width = ct.width;
      rec.all_mice = ct.all_mice;
      rec.arrival_us = ct.arrival;
      rec.completion_us = t;
      rec.bytes = ct.bytes;
      coflow_records_[rec.id] = rec;
    }
  }
  realloc_dirty_ = true;
  schedule_completion_sentinel();  // next earliest finisher
}

void Engine::on_detection(uint32_t idx, uint64_t gen, SimTime t) {
  (void)gen;  // detection validity is time-based, not rate-generation-based
  EngineFlow& f = flows_[idx];
  if (f.completed || f.tagged || f.predicted_detection == kNoTime ||
      t < f.predicted_detection) {
    return;  // stale: the prediction moved, or the flow is already done
  }
  f.tagged = true;
  f.tag_us = t;
  ++flows_tagged_;
  resolve_path(f, t);  // an aggregate rule may already divert it
  after_tag(idx, t);
  schedule_detection_sentinel();
}

// Post-tag hook: in per_flow mode the controller must push a dedicated rule
// before the flow can use any circuit.
void Engine::after_tag(uint32_t idx, SimTime t) {
  if (cfg_.rule_mode == RuleMode::PerFlow) request_per_flow_install(idx, t);
}

void Engine::request_per_flow_install(uint32_t idx, SimTime t) {
  EngineFlow& f = flows_[idx];
  if (f.install_requested || f.rule_uid != 0 || f.circuit != kInvalidCircuit) return;
  if (f.route == nullptr) return;
  const auto& seq = f.route->seq;
  for (size_t i = 0; i + 1 < seq.size(); ++i) {
    if (cfg_.circuit_mode == CircuitMode::Private && i != 0) break;
    auto it = up_circuits_.find({seq[i], f.dst_sw});
    if (it == up_circuits_.end()) continue;
    const Circuit& c = fabric_->circuit(it->second);
    std::vector<OFRule> rules = compile_rules(c, RuleMode::PerFlow, cfg_.dscp_e, {f.spec->id});
    uint64_t uid = fabric_->stage_install(rules[0]);
    SimTime dispatch = fabric_->limiter_dispatch(c.src, t);
    push(dispatch + cfg_.outbound_latency_us, EventKind::RuleInstalled, uid, 0);
    f.install_requested = true;
    return;
  }
}

void Engine::on_observer_tick(SimTime t) {
  std::vector<ObservedFlow> observed;
  for (uint32_t idx : actives_) {
    EngineFlow& f = flows_[idx];
    advance(f, t);
    if (f.tagged && f.route != nullptr) {
      double elapsed_us = static_cast<double>(t - f.window_mark_t);
      double mean = elapsed_us > 0.0
                        ? (f.bytes - f.window_mark_bytes) * kBitsPerByte * kUsPerSec / elapsed_us
                        : f.rate;
      ObservedFlow of;
      of.id = f.spec->id;
      of.mean_rate_bps = mean;
      of.route = &f.route->seq;
      observed.push_back(of);
    }
    f.window_mark_bytes = f.bytes;
    f.window_mark_t = t;
  }
  latest_demand_ = observe_demand(observed, t);
  if (cfg_.demand_log_stream != nullptr) {
    if (!demand_header_written_) {
      *cfg_.demand_log_stream << "t_us,transit_switch,dst_switch,rate_bps,flows\n";
      demand_header_written_ = true;
    }
    latest_demand_.dump_csv(*cfg_.demand_log_stream);
  }
  if (completed_count_ < flows_.size())
    push(t + cfg_.observer_period_us, EventKind::ObserverTick, 0, 0);
}

void Engine::on_scheduler_decision(SimTime t, uint64_t script_idx) {
  CircuitPlan plan;
  if (script_idx != ~0ull) {
    plan.add.push_back({cfg_.scripted_adds[script_idx].src, cfg_.scripted_adds[script_idx].dst});
  } else {
    SchedulerConfig sc;
    sc.mode = cfg_.circuit_mode;
    sc.th_configure_bps = th_configure_;
    sc.th_remove_bps = th_remove_;
    sc.ocs_ports = topo_.ocs_ports();
    std::vector<CircuitView> views;
    for (const Circuit& c : fabric_->circuits()) {
      if (c.state == Circuit::State::Down) continue;
      // A circuit younger than the demand window is judged on measurements
      // that predate it (and its rules only land after the outbound latency);
      // keep it off the removal list until then.  It occupies its ports
      // either way.
      bool removable =
          c.state == Circuit::State::Up &&
          c.up_us + cfg_.observer_period_us + cfg_.outbound_latency_us <= t;
      views.push_back(CircuitView{c.id, c.src, c.dst, removable});
    }
    plan = schedule_circuits(latest_demand_, views, sc);
  }

  // plan application is atomic: removals release their crossbar ports first,
  // then the adds reserve theirs
  for (CircuitId cid : plan.remove) teardown_circuit(cid, t);
  for (const auto& [src, dst] : plan.add) {
    if (fabric_->tx_ports_in_use(src) >= topo_.ocs_ports() ||
        fabric_->rx_ports_in_use(dst) >= topo_.ocs_ports())
      continue;  // defensive; the scheduler respects port budgets
    CircuitId cid = fabric_->create_circuit(src, dst, cfg_.circuit_mode, t);
    ++circuits_requested_;
    push(t + cfg_.reconfig_delay_us, EventKind::CircuitUp, cid, 0);
  }

  if (script_idx == ~0ull && completed_count_ < flows_.size())
    push(t + decision_period_, EventKind::SchedulerDecision, ~0ull, 0);
}

void Engine::on_circuit_up(CircuitId cid, SimTime t) {
  Circuit& c = fabric_->circuit(cid);
  if (c.state != Circuit::State::Configuring) return;  // torn down while configuring
  caps_.push_back(cfg_.circuit_rate_bps);
  LinkId link = static_cast<LinkId>(caps_.size() - 1);
  fabric_->mark_up(cid, t, link);
  up_circuits_[{c.src, c.dst}] = cid;

  if (cfg_.rule_mode == RuleMode::CShare) {
    std::vector<OFRule> rules = compile_rules(c, RuleMode::CShare, cfg_.dscp_e, {});
    uint64_t uid = fabric_->stage_install(rules[0]);
    SimTime dispatch = fabric_->limiter_dispatch(c.src, t);
    push(dispatch + cfg_.outbound_latency_us, EventKind::RuleInstalled, uid, 0);
  } else {
    for (uint32_t idx : actives_) {
      EngineFlow& f = flows_[idx];
      if (!f.tagged || f.dst_sw != c.dst) continue;
      request_per_flow_install(idx, t);
    }
  }
}

void Engine::teardown_circuit(CircuitId cid, SimTime t) {
  Circuit& c = fabric_->circuit(cid);
  bool was_up = c.state == Circuit::State::Up;
  std::vector<FlowId> evicted = fabric_->remove_circuit(cid, t);
  record_event(t, EventKind::CircuitDown, cid, was_up ? 1 : 0);
  if (!was_up) return;
  auto it = up_circuits_.find({c.src, c.dst});
  if (it != up_circuits_.end() && it->second == cid) up_circuits_.erase(it);
  for (FlowId fid : evicted) flows_[flow_index_.at(fid)].rule_uid = 0;
  for (uint32_t idx : actives_) {
    EngineFlow& f = flows_[idx];
    if (f.circuit == cid) resolve_path(f, t);
  }
}

void Engine::on_rule_installed(uint64_t uid, SimTime t) {
  const OFRule staged = fabric_->staged(uid);
  uint32_t flow_idx = 0;
  bool per_flow = staged.flow != kAnyFlow;
  if (per_flow) {
    flow_idx = flow_index_.at(staged.flow);
    EngineFlow& f = flows_[flow_idx];
    f.install_requested = false;
    if (f.completed) {
      fabric_->drop_staged(uid);
      return;
    }
  }
  bool ok = fabric_->commit_install(uid, t);
  if (!ok) return;
  if (per_flow) {
    EngineFlow& f = flows_[flow_idx];
    f.rule_uid = uid;
    resolve_path(f, t);
  } else {
    for (uint32_t idx : actives_) {
      EngineFlow& f = flows_[idx];
      if (f.tagged && f.dst_sw == staged.match.dst_switch) resolve_path(f, t);
    }
  }
}

MetricsReport Engine::run() {
  // --- setup ---
  FabricConfig fc;
  fc.table_capacity = cfg_.table_capacity;
  fc.rule_setup_per_s = cfg_.rule_setup_per_s;
  fc.outbound_latency_us = cfg_.outbound_latency_us;
  fc.dscp_e = cfg_.dscp_e;
  fc.ocs_ports = topo_.ocs_ports();
  fc.rule_mode = cfg_.rule_mode;
  SwitchFabric fabric(topo_.switch_count(), fc);
  fabric_ = &fabric;

  th_configure_ = cfg_.th_configure_bps > 0.0 ? cfg_.th_configure_bps
                                              : 0.3 * topo_.packet_rate_bps();
  th_remove_ = cfg_.th_remove_bps > 0.0 ? cfg_.th_remove_bps : 0.1 * topo_.packet_rate_bps();
  decision_period_ = cfg_.decision_period_us > 0 ? cfg_.decision_period_us
                                                 : cfg_.observer_period_us;

  caps_.clear();
  for (const Link& l : topo_.links()) caps_.push_back(l.capacity_bps);

  flows_.assign(trace_.flows.size(), EngineFlow{});
  for (size_t i = 0; i < trace_.flows.size(); ++i) {
    const FlowSpec& s = trace_.flows[i];
    EngineFlow& f = flows_[i];
    f.spec = &s;
    f.src_sw = topo_.host_switch(s.src_host);
    f.dst_sw = topo_.host_switch(s.dst_host);
    if (f.src_sw != f.dst_sw) {
      auto key = std::make_pair(f.src_sw, f.dst_sw);
      auto it = pair_paths_.find(key);
      if (it == pair_paths_.end()) {
        PairPath pp;
        pp.seq = topo_.default_switch_seq(f.src_sw, f.dst_sw);
        for (size_t j = 0; j + 1 < pp.seq.size(); ++j)
          pp.links.push_back(topo_.packet_link(pp.seq[j], pp.seq[j + 1]));
        it = pair_paths_.emplace(key, std::move(pp)).first;
      }
      f.route = &it->second;
    }
    flow_index_[s.id] = static_cast<uint32_t>(i);
    if (s.coflow != kNoCoflow) {
      CoflowTrack& ct = coflows_[s.coflow];
      ++ct.width;
      ++ct.remaining;
      if (s.klass != FlowClass::Mice) ct.all_mice = false;
      ct.arrival = ct.width == 1 ? s.start_us : std::min(ct.arrival, s.start_us);
      ct.bytes += s.size_bytes;
    }
    push(s.start_us, EventKind::FlowArrival, i, 0);
  }

  bool has_control = cfg_.circuit_mode != CircuitMode::None && !cfg_.disable_scheduler;
  if (has_control) {
    push(cfg_.observer_period_us, EventKind::ObserverTick, 0, 0);
    push(decision_period_, EventKind::SchedulerDecision, ~0ull, 0);
  }
  for (size_t i = 0; i < cfg_.scripted_adds.size(); ++i)
    push(cfg_.scripted_adds[i].t_us, EventKind::SchedulerDecision, i, 0);

  // --- main loop ---
  while (completed_count_ < flows_.size()) {
    if (queue_.empty()) throw SimulationError("event queue drained with flows unfinished");
    Event e = queue_.top();
    queue_.pop();
    if (e.t < now_) throw SimulationError("time went backwards");
    now_ = e.t;
    if (cfg_.max_sim_time_us > 0 && now_ > cfg_.max_sim_time_us)
      throw SimulationError("simulation exceeded max_sim_time_us");
    record_event(e.t, e.k, e.a, e.b);
    switch (e.k) {
      case EventKind::FlowArrival: on_arrival(static_cast<uint32_t>(e.a), e.t); break;
      case EventKind::FlowCompletion: on_completion(static_cast<uint32_t>(e.a), e.b, e.t); break;
      case EventKind::DetectionFires: on_detection(static_cast<uint32_t>(e.a), e.b, e.t); break;
      case EventKind::ObserverTick: on_observer_tick(e.t); break;
      case EventKind::SchedulerDecision: on_scheduler_decision(e.t, e.a); break;
      case EventKind::CircuitUp: on_circuit_up(static_cast<CircuitId>(e.a), e.t); break;
      case EventKind::RuleInstalled: on_rule_installed(e.a, e.t); break;
      case EventKind::CircuitDown:
        // teardown happens inline during plan application (it must release
        // crossbar ports before the adds of the same plan reserve them)
        throw SimulationError("unexpected queued circuit_down event");
    }
    fabric.audit_cshare_invariant();
    if (realloc_dirty_ && (queue_.empty() || queue_.top().t > now_)) reallocate(now_);
  }

  if (delivered_bytes_ != trace_.total_bytes())
    throw SimulationError("delivered bytes do not match the trace");

  // --- report ---
  MetricsReport r;
  r.run.topology = topo_.name();
  r.run.n_switches = topo_.switch_count();
  r.run.n_hosts = topo_.host_count();
  r.run.circuit_mode = cfg_.circuit_mode;
  r.run.rule_mode = cfg_.rule_mode;
  r.run.seed = cfg_.seed;
  r.run.packet_rate_bps = topo_.packet_rate_bps();
  r.run.circuit_rate_bps = cfg_.circuit_rate_bps;
  r.run.byte_threshold = cfg_.detector.byte_threshold;
  r.run.observer_period_us = cfg_.observer_period_us;
  r.run.reconfig_delay_us = cfg_.reconfig_delay_us;
  r.run.outbound_latency_us = cfg_.outbound_latency_us;
  r.run.rule_setup_per_s = cfg_.rule_setup_per_s;
  r.run.table_capacity = cfg_.table_capacity;

  r.flows.reserve(flows_.size());
  SimTime end = 0;
  for (const EngineFlow& f : flows_) {
    FlowRecord fr;
    fr.id = f.spec->id;
    fr.coflow = f.spec->coflow;
    fr.klass = f.spec->klass;
    fr.src_host = f.spec->src_host;
    fr.dst_host = f.spec->dst_host;
    fr.size_bytes = f.spec->size_bytes;
    fr.start_us = f.spec->start_us;
    fr.completion_us = f.completion_us;
    fr.tagged = f.tagged;
    fr.tag_us = f.tag_us;
    fr.used_circuit = f.used_circuit;
    fr.first_reroute_us = f.first_reroute_us;
    fr.reroutes = f.reroutes;
    r.flows.push_back(fr);
    end = std::max(end, f.completion_us);
  }
  for (const auto& [cid, rec] : coflow_records_) r.coflows.push_back(rec);
  for (const Circuit& c : fabric.circuits()) {
    CircuitRecord cr;
    cr.id = c.id;
    cr.src = c.src;
    cr.dst = c.dst;
    cr.mode = c.mode;
    cr.requested_us = c.requested_us;
    cr.up_us = c.up_us;
    cr.down_us = c.down_us;
    cr.bytes_carried = c.bytes_carried;
    cr.rules_installed = c.rules_installed;
    r.circuits.push_back(cr);
  }
  r.end_us = end;
  if (cfg_.collect_rule_log) r.rule_log = fabric.rule_log();
  r.footprint = footprint_from_log(fabric.rule_log(), topo_.switch_count(), end,
                                   cfg_.table_capacity);
  // fold the live fabric peaks in; the log replay is cross-checked in tests
  for (auto& fp : r.footprint) {
    fp.peak_concurrent = fabric.peak_table_size(fp.sw);
    fp.peak_concurrent_cshare = fabric.peak_cshare_rules(fp.sw);
  }
  r.trace_bytes = trace_.total_bytes();
  r.delivered_bytes = delivered_bytes_;
  r.events_processed = events_processed_;
  r.event_log_hash = hash_.value();
  r.occupancy_overflows = fabric.occupancy_overflows();
  r.cshare_invariant_ok = fabric.cshare_invariant_ok();
  r.flows_tagged = flows_tagged_;
  r.circuits_requested = circuits_requested_;
  fabric_ = nullptr;
  return r;
}

}  // namespace

MetricsReport run_simulation(const Topology& topo, const Trace& trace, const SimConfig& cfg) {
  TraceValidation v = validate_trace(trace, topo);
  if (!v.ok) throw TraceError("trace failed validation: " + v.problems.front());
  Engine eng(topo, trace, cfg);
  return eng.run();
}

}  // namespace ocsim
