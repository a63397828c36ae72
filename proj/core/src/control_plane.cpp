#include "ocsim/control_plane.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ocsim/errors.hpp"
#include "ocsim/util.hpp"

namespace ocsim {

std::optional<SimTime> predict_detection(const DetectorConfig& cfg, SimTime now,
                                         SimTime flow_start, double bytes_sent,
                                         double rate_bps, int64_t size_bytes) {
  SimTime fire = -1;

  if (cfg.byte_threshold > 0 && size_bytes > cfg.byte_threshold) {
    if (bytes_sent >= static_cast<double>(cfg.byte_threshold)) {
      fire = now;
    } else if (rate_bps > 0.0) {
      double need_bits = (static_cast<double>(cfg.byte_threshold) - bytes_sent) * kBitsPerByte;
      SimTime dt = static_cast<SimTime>(std::ceil(need_bits / rate_bps * kUsPerSec));
      fire = now + std::max<SimTime>(dt, 0);
    }
  }

  if (cfg.duration_threshold_us > 0) {
    SimTime at = flow_start + cfg.duration_threshold_us;
    if (fire < 0 || at < fire) {
      // the duration rule only matters if the flow is still running then; the
      // caller re-checks liveness when the event fires.  The returned time is
      // deliberately anchored to the flow's start so repeated re-estimation
      // under changing rates never postpones it.
      fire = at;
    }
  }

  if (fire < 0) return std::nullopt;

  // pointless if the flow finishes first at the current rate
  if (rate_bps > 0.0) {
    double left_bits = (static_cast<double>(size_bytes) - bytes_sent) * kBitsPerByte;
    SimTime done = now + static_cast<SimTime>(std::ceil(left_bits / rate_bps * kUsPerSec));
    if (fire > done) return std::nullopt;
  } else if (fire > now && cfg.duration_threshold_us <= 0) {
    return std::nullopt;  // stalled flow, byte rule can never fire
  }
  return fire + cfg.detection_latency_us;
}

const DemandEntry* DemandMatrix::find(SwitchId transit, SwitchId dst) const {
  auto it = entries.find({transit, dst});
  return it == entries.end() ? nullptr : &it->second;
}

void DemandMatrix::dump_csv(std::ostream& os) const {
  for (const auto& [key, e] : entries) {
    os << t_us << ',' << key.first << ',' << key.second << ','
       << format_double(e.rate_bps) << ',' << e.flows << '\n';
  }
}

DemandMatrix observe_demand(const std::vector<ObservedFlow>& flows, SimTime t_us) {
  DemandMatrix dm;
  dm.t_us = t_us;
  for (const ObservedFlow& f : flows) {
    if (f.route == nullptr || f.route->size() < 2)
      continue;  // intra-switch flow, never a circuit candidate
    SwitchId dst = f.route->back();
    for (size_t i = 0; i + 1 < f.route->size(); ++i) {
      DemandEntry& e = dm.entries[{(*f.route)[i], dst}];
      e.rate_bps += f.mean_rate_bps;
      e.flows += 1;
      e.hops = std::max(e.hops, static_cast<uint32_t>(f.route->size() - 1 - i));
      if (i == 0) e.source_rate_bps += f.mean_rate_bps;
    }
  }
  return dm;
}

CircuitPlan schedule_circuits(const DemandMatrix& demand,
                              const std::vector<CircuitView>& current,
                              const SchedulerConfig& cfg) {
  CircuitPlan plan;
  if (cfg.mode == CircuitMode::None) return plan;

  auto servable = [&](SwitchId src, SwitchId dst) {
    const DemandEntry* e = demand.find(src, dst);
    if (e == nullptr) return 0.0;
    return cfg.mode == CircuitMode::Private ? e->source_rate_bps : e->rate_bps;
  };

  // ports engaged by circuits that stay; removals free both endpoints
  std::map<SwitchId, uint32_t> tx, rx;
  std::vector<std::pair<SwitchId, SwitchId>> kept;
  for (const CircuitView& c : current) {
    if (c.up && servable(c.src, c.dst) < cfg.th_remove_bps) {
      plan.remove.push_back(c.id);
      continue;
    }
    ++tx[c.src];
    ++rx[c.dst];
    kept.push_back({c.src, c.dst});
  }
  std::sort(kept.begin(), kept.end());

  struct Cand {
    double weight;
    SwitchId src, dst;
  };
  std::vector<Cand> cands;
  for (const auto& [key, e] : demand.entries) {
    if (key.first == key.second) continue;
    double r = cfg.mode == CircuitMode::Private ? e.source_rate_bps : e.rate_bps;
    if (r < cfg.th_configure_bps) continue;
    if (std::binary_search(kept.begin(), kept.end(), key)) continue;  // already served
    cands.push_back({r * std::max(e.hops, 1u), key.first, key.second});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.src != b.src) return a.src < b.src;
    return a.dst < b.dst;
  });

  for (const Cand& c : cands) {
    if (tx[c.src] >= cfg.ocs_ports || rx[c.dst] >= cfg.ocs_ports) continue;
    ++tx[c.src];
    ++rx[c.dst];
    plan.add.push_back({c.src, c.dst});
  }
  return plan;
}

}  // namespace ocsim
