#include "ocsim/traffic.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "ocsim/errors.hpp"
#include "ocsim/rng.hpp"
#include "ocsim/util.hpp"

namespace ocsim {

int64_t Trace::total_bytes() const {
  int64_t sum = 0;
  for (const FlowSpec& f : flows) sum += f.size_bytes;
  return sum;
}

uint64_t Trace::coflow_count() const {
  std::set<CoflowId> ids;
  for (const FlowSpec& f : flows)
    if (f.coflow != kNoCoflow) ids.insert(f.coflow);
  return ids.size();
}

namespace {

// Mean of a Pareto(alpha) truncated to [lo, hi], alpha != 1.
double bounded_pareto_mean(double alpha, double lo, double hi) {
  double r = lo / hi;
  return alpha * lo * (1.0 - std::pow(r, alpha - 1.0)) /
         ((alpha - 1.0) * (1.0 - std::pow(r, alpha)));
}

// Solve for the shape that yields the requested mean.  The mean decreases
// monotonically in alpha, from ~lo*ln(hi/lo) toward lo.
double solve_pareto_shape(double target_mean, double lo, double hi) {
  double a_lo = 1.000001, a_hi = 64.0;
  if (target_mean >= bounded_pareto_mean(a_lo, lo, hi) ||
      target_mean <= bounded_pareto_mean(a_hi, lo, hi))
    throw TraceError(
        "elephant size bounds cannot realize the requested demand split; "
        "widen the elephant size range or relax the demand fraction");
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (a_lo + a_hi);
    if (bounded_pareto_mean(mid, lo, hi) > target_mean)
      a_lo = mid;
    else
      a_hi = mid;
  }
  return 0.5 * (a_lo + a_hi);
}

double bounded_pareto_sample(Rng& rng, double alpha, double lo, double hi) {
  double r = std::pow(lo / hi, alpha);
  double u = rng.uniform01();
  return lo * std::pow(1.0 - u * (1.0 - r), -1.0 / alpha);
}

struct Session {  // one arrival epoch: a coflow or a standalone flow
  CoflowId coflow = kNoCoflow;
  std::vector<size_t> members;  // indices into the size arrays
  bool elephant = false;
  SimTime start_us = 0;
};

}  // namespace

Trace generate_uniform_trace(const Topology& topo, const TraceParams& p, uint64_t seed) {
  if (p.n_flows == 0) throw TraceError("n_flows must be positive");
  if (topo.switch_count() < 2) throw TraceError("uniform trace needs at least 2 switches");
  if (p.mice_min_bytes <= 0 || p.mice_min_bytes > p.mice_max_bytes)
    throw TraceError("bad mice size bounds");
  if (p.elephant_min_bytes <= 0 || p.elephant_min_bytes > p.elephant_max_bytes)
    throw TraceError("bad elephant size bounds");
  if (p.elephant_count_fraction < 0.0 || p.elephant_count_fraction >= 1.0)
    throw TraceError("elephant_count_fraction must be in [0,1)");
  if (p.load_factor <= 0.0) throw TraceError("load_factor must be positive");
  if (p.coflow_max_width > 0 && p.coflow_min_width > p.coflow_max_width)
    throw TraceError("bad coflow width bounds");

  Rng rng(seed);

  uint64_t n_e = 0;
  if (p.elephant_count_fraction > 0.0)
    n_e = std::max<uint64_t>(1, static_cast<uint64_t>(
                                    std::llround(p.elephant_count_fraction *
                                                 static_cast<double>(p.n_flows))));
  if (n_e >= p.n_flows) n_e = p.n_flows - 1;
  uint64_t n_m = p.n_flows - n_e;

  std::vector<int64_t> mice_sz(n_m);
  int64_t mice_total = 0;
  for (auto& s : mice_sz) {
    s = rng.uniform_i64(p.mice_min_bytes, p.mice_max_bytes);
    mice_total += s;
  }

  std::vector<int64_t> eleph_sz(n_e);
  if (n_e > 0) {
    bool pin = p.elephant_demand_fraction > 0.0 && p.elephant_demand_fraction < 1.0 && n_m > 0;
    if (pin) {
      double f = p.elephant_demand_fraction;
      double target_total = static_cast<double>(mice_total) * f / (1.0 - f);
      double target_mean = target_total / static_cast<double>(n_e);
      double lo = static_cast<double>(p.elephant_min_bytes);
      double hi = static_cast<double>(p.elephant_max_bytes);
      double alpha = solve_pareto_shape(target_mean, lo, hi);
      std::vector<double> raw(n_e);
      double raw_total = 0.0;
      for (auto& v : raw) {
        v = bounded_pareto_sample(rng, alpha, lo, hi);
        raw_total += v;
      }
      double scale = target_total / raw_total;  // close to 1 by construction
      for (uint64_t i = 0; i < n_e; ++i) {
        double v = std::clamp(raw[i] * scale, lo, hi);
        eleph_sz[i] = std::llround(v);
      }
    } else {
      for (auto& s : eleph_sz)
        s = rng.uniform_i64(p.elephant_min_bytes, p.elephant_max_bytes);
    }
  }

  // sessions: mice chunked into coflows (or standalone), elephants standalone
  std::vector<Session> sessions;
  CoflowId next_coflow = 0;
  if (p.coflow_max_width > 0) {
    uint32_t wmin = std::max(1u, p.coflow_min_width);
    size_t i = 0;
    while (i < n_m) {
      uint32_t w = static_cast<uint32_t>(
          rng.uniform_i64(wmin, std::max(wmin, p.coflow_max_width)));
      w = std::min<uint32_t>(w, static_cast<uint32_t>(n_m - i));
      Session s;
      s.coflow = next_coflow++;
      for (uint32_t j = 0; j < w; ++j) s.members.push_back(i + j);
      sessions.push_back(std::move(s));
      i += w;
    }
  } else {
    for (size_t i = 0; i < n_m; ++i) {
      Session s;
      s.members.push_back(i);
      sessions.push_back(std::move(s));
    }
  }
  for (size_t i = 0; i < n_e; ++i) {
    Session s;
    s.elephant = true;
    s.members.push_back(i);
    sessions.push_back(std::move(s));
  }

  // endpoints: per session one destination switch; each member gets a host
  // there and a source host on some other switch
  uint32_t S = topo.switch_count();
  uint32_t hps = topo.hosts_per_switch();
  struct Endpoint {
    HostId src, dst;
  };
  std::vector<std::vector<Endpoint>> session_eps(sessions.size());
  for (size_t si = 0; si < sessions.size(); ++si) {
    uint32_t dst_sw = static_cast<uint32_t>(rng.uniform_u64(S));
    for (size_t m = 0; m < sessions[si].members.size(); ++m) {
      HostId dst = topo.host(dst_sw, static_cast<uint32_t>(rng.uniform_u64(hps)));
      uint32_t off = static_cast<uint32_t>(rng.uniform_u64(S - 1));
      uint32_t src_sw = off >= dst_sw ? off + 1 : off;
      HostId src = topo.host(src_sw, static_cast<uint32_t>(rng.uniform_u64(hps)));
      session_eps[si].push_back(Endpoint{src, dst});
    }
  }

  // arrival horizon from offered bit-hops against the upper-tier capacity
  double bit_hops = 0.0;
  for (size_t si = 0; si < sessions.size(); ++si) {
    const Session& s = sessions[si];
    for (size_t m = 0; m < s.members.size(); ++m) {
      int64_t sz = s.elephant ? eleph_sz[s.members[m]] : mice_sz[s.members[m]];
      uint32_t hops = topo.hop_distance(topo.host_switch(session_eps[si][m].src),
                                        topo.host_switch(session_eps[si][m].dst));
      bit_hops += static_cast<double>(sz) * kBitsPerByte * hops;
    }
  }
  double cap_total = 0.0;
  for (const Link& l : topo.links())
    if (l.kind == LinkKind::Packet) cap_total += l.capacity_bps;
  SimTime horizon = std::max<SimTime>(
      1, static_cast<SimTime>(std::ceil(bit_hops / (p.load_factor * cap_total) * kUsPerSec)));

  for (auto& s : sessions) s.start_us = static_cast<SimTime>(rng.uniform_u64(horizon));

  // materialize, sort by arrival, renumber flows and coflows
  Trace t;
  t.flows.reserve(p.n_flows);
  for (size_t si = 0; si < sessions.size(); ++si) {
    const Session& s = sessions[si];
    for (size_t m = 0; m < s.members.size(); ++m) {
      FlowSpec f;
      f.coflow = s.coflow;
      f.src_host = session_eps[si][m].src;
      f.dst_host = session_eps[si][m].dst;
      f.size_bytes = s.elephant ? eleph_sz[s.members[m]] : mice_sz[s.members[m]];
      f.start_us = s.start_us;
      f.klass = s.elephant ? FlowClass::Elephant : FlowClass::Mice;
      t.flows.push_back(f);
    }
  }
  std::stable_sort(t.flows.begin(), t.flows.end(),
                   [](const FlowSpec& a, const FlowSpec& b) { return a.start_us < b.start_us; });
  std::map<CoflowId, CoflowId> renum;
  for (size_t i = 0; i < t.flows.size(); ++i) {
    t.flows[i].id = i;
    CoflowId& c = t.flows[i].coflow;
    if (c != kNoCoflow) {
      auto [it, fresh] = renum.emplace(c, static_cast<CoflowId>(renum.size()));
      c = it->second;
    }
  }

  t.meta.seed = seed;
  t.meta.source = "generated";
  t.meta.params = p;
  t.meta.horizon_us = horizon;
  return t;
}

void write_trace_csv(const Trace& t, std::ostream& os) {
  os << "flow_id,coflow_id,src_host,dst_host,size_bytes,start_time_us,class\n";
  for (const FlowSpec& f : t.flows) {
    os << f.id << ',';
    if (f.coflow != kNoCoflow) os << f.coflow;
    os << ',' << f.src_host << ',' << f.dst_host << ',' << f.size_bytes << ','
       << f.start_us << ',' << flow_class_name(f.klass) << '\n';
  }
}

namespace {

const char* kTraceHeader = "flow_id,coflow_id,src_host,dst_host,size_bytes,start_time_us,class";

int64_t parse_i64(std::string_view s, const char* what, size_t line_no) {
  std::string buf(trim(s));
  if (buf.empty()) throw TraceError("line " + std::to_string(line_no) + ": empty " + what);
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(buf.c_str(), &end, 10);
  if (errno != 0 || end != buf.c_str() + buf.size())
    throw TraceError("line " + std::to_string(line_no) + ": bad " + what + " '" + buf + "'");
  return v;
}

FlowClass parse_class(std::string_view s, size_t line_no) {
  std::string_view v = trim(s);
  if (v == "mice") return FlowClass::Mice;
  if (v == "elephant") return FlowClass::Elephant;
  throw TraceError("line " + std::to_string(line_no) + ": bad class '" + std::string(v) + "'");
}

}  // namespace

Trace read_trace_csv(std::istream& is) {
  Trace t;
  t.meta.source = "csv";
  std::string line;
  if (!std::getline(is, line)) throw TraceError("empty trace file");
  if (trim(line) != kTraceHeader)
    throw TraceError("bad trace header, expected: " + std::string(kTraceHeader));
  size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cols = split_csv_line(line);
    if (cols.size() != 7)
      throw TraceError("line " + std::to_string(line_no) + ": expected 7 columns, got " +
                       std::to_string(cols.size()));
    FlowSpec f;
    f.id = static_cast<FlowId>(parse_i64(cols[0], "flow_id", line_no));
    f.coflow = trim(cols[1]).empty() ? kNoCoflow : parse_i64(cols[1], "coflow_id", line_no);
    f.src_host = static_cast<HostId>(parse_i64(cols[2], "src_host", line_no));
    f.dst_host = static_cast<HostId>(parse_i64(cols[3], "dst_host", line_no));
    f.size_bytes = parse_i64(cols[4], "size_bytes", line_no);
    f.start_us = parse_i64(cols[5], "start_time_us", line_no);
    f.klass = parse_class(cols[6], line_no);
    t.flows.push_back(f);
  }
  return t;
}

namespace {

uint32_t parse_ipv4(std::string_view s, size_t line_no) {
  uint32_t out = 0;
  int parts = 0;
  size_t i = 0;
  std::string_view v = trim(s);
  while (i <= v.size() && parts < 4) {
    size_t dot = v.find('.', i);
    std::string_view part = v.substr(i, (dot == std::string_view::npos ? v.size() : dot) - i);
    if (part.empty() || part.size() > 3)
      throw TraceError("line " + std::to_string(line_no) + ": bad IPv4 '" + std::string(v) + "'");
    uint32_t oct = 0;
    for (char c : part) {
      if (c < '0' || c > '9')
        throw TraceError("line " + std::to_string(line_no) + ": bad IPv4 '" + std::string(v) + "'");
      oct = oct * 10 + (c - '0');
    }
    if (oct > 255)
      throw TraceError("line " + std::to_string(line_no) + ": bad IPv4 '" + std::string(v) + "'");
    out = (out << 8) | oct;
    ++parts;
    if (dot == std::string_view::npos) {
      i = v.size() + 1;
      break;
    }
    i = dot + 1;
  }
  if (parts != 4 || i != v.size() + 1)
    throw TraceError("line " + std::to_string(line_no) + ": bad IPv4 '" + std::string(s) + "'");
  return out;
}

}  // namespace

Trace ingest_flow_records(std::istream& is, const Topology& topo, const IngestParams& p) {
  if (p.prefix_bits < 1 || p.prefix_bits > 32)
    throw TraceError("prefix_bits must be in [1,32]");
  if (p.time_scale <= 0.0) throw TraceError("time_scale must be positive");

  struct Row {
    CoflowId coflow;
    uint32_t src_ip, dst_ip;
    int64_t size;
    SimTime start;
    int klass;  // -1 unspecified
  };
  std::vector<Row> rows;

  std::string line;
  if (!std::getline(is, line)) throw TraceError("empty flow record file");
  if (trim(line) != kTraceHeader)
    throw TraceError("bad flow record header, expected: " + std::string(kTraceHeader));
  size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cols = split_csv_line(line);
    if (cols.size() != 7)
      throw TraceError("line " + std::to_string(line_no) + ": expected 7 columns, got " +
                       std::to_string(cols.size()));
    Row r;
    r.coflow = trim(cols[1]).empty() ? kNoCoflow : parse_i64(cols[1], "coflow_id", line_no);
    r.src_ip = parse_ipv4(cols[2], line_no);
    r.dst_ip = parse_ipv4(cols[3], line_no);
    r.size = parse_i64(cols[4], "size_bytes", line_no);
    if (r.size <= 0)
      throw TraceError("line " + std::to_string(line_no) + ": size_bytes must be positive");
    double t = static_cast<double>(parse_i64(cols[5], "start_time_us", line_no)) * p.time_scale;
    r.start = static_cast<SimTime>(std::llround(t));
    r.klass = trim(cols[6]).empty() ? -1 : static_cast<int>(parse_class(cols[6], line_no));
    rows.push_back(r);
  }

  // subnets round-robin over switches; addresses to host slots in sorted order
  unsigned shift = 32 - p.prefix_bits;
  std::set<uint32_t> subnet_set, addr_set;
  for (const Row& r : rows) {
    subnet_set.insert(r.src_ip >> shift);
    subnet_set.insert(r.dst_ip >> shift);
    addr_set.insert(r.src_ip);
    addr_set.insert(r.dst_ip);
  }
  uint32_t S = topo.switch_count();
  std::map<uint32_t, SwitchId> subnet_switch;
  uint32_t idx = 0;
  for (uint32_t sn : subnet_set) subnet_switch[sn] = idx++ % S;
  std::vector<uint32_t> next_slot(S, 0);
  std::map<uint32_t, HostId> addr_host;
  for (uint32_t ip : addr_set) {  // std::set iterates in sorted order
    SwitchId sw = subnet_switch[ip >> shift];
    if (next_slot[sw] >= topo.hosts_per_switch())
      throw TraceError("not enough host slots on switch " + std::to_string(sw) +
                       " for the ingested address set");
    addr_host[ip] = topo.host(sw, next_slot[sw]++);
  }

  Trace t;
  t.meta.source = "ingest";
  t.flows.reserve(rows.size());
  for (const Row& r : rows) {
    FlowSpec f;
    f.coflow = r.coflow;
    f.src_host = addr_host[r.src_ip];
    f.dst_host = addr_host[r.dst_ip];
    f.size_bytes = r.size;
    f.start_us = r.start;
    f.klass = r.klass >= 0 ? static_cast<FlowClass>(r.klass)
                           : (r.size <= p.mice_max_bytes ? FlowClass::Mice : FlowClass::Elephant);
    t.flows.push_back(f);
  }
  std::stable_sort(t.flows.begin(), t.flows.end(),
                   [](const FlowSpec& a, const FlowSpec& b) { return a.start_us < b.start_us; });
  std::map<CoflowId, CoflowId> renum;
  for (size_t i = 0; i < t.flows.size(); ++i) {
    t.flows[i].id = i;
    CoflowId& c = t.flows[i].coflow;
    if (c != kNoCoflow) {
      auto [it, fresh] = renum.emplace(c, static_cast<CoflowId>(renum.size()));
      c = it->second;
    }
  }
  return t;
}

TraceValidation validate_trace(const Trace& t, const Topology& topo) {
  TraceValidation v;
  v.n_flows = t.flows.size();
  auto complain = [&v](std::string msg) {
    if (v.problems.size() < 50) v.problems.push_back(std::move(msg));
  };

  std::set<FlowId> ids;
  struct CoflowInfo {
    SimTime start;
    SwitchId dst_sw;
    bool mixed_start = false, mixed_dst = false;
  };
  std::map<CoflowId, CoflowInfo> coflows;
  SimTime prev = -1;
  bool first = true;
  for (const FlowSpec& f : t.flows) {
    if (!ids.insert(f.id).second) complain("duplicate flow id " + std::to_string(f.id));
    if (f.size_bytes <= 0)
      complain("flow " + std::to_string(f.id) + ": non-positive size");
    if (f.start_us < 0) complain("flow " + std::to_string(f.id) + ": negative start time");
    if (prev >= 0 && f.start_us < prev)
      complain("flow " + std::to_string(f.id) + ": start times not sorted");
    prev = f.start_us;
    if (!topo.is_host(f.src_host) || !topo.is_host(f.dst_host)) {
      complain("flow " + std::to_string(f.id) + ": endpoint not a host of this topology");
      continue;
    }
    if (f.src_host == f.dst_host)
      complain("flow " + std::to_string(f.id) + ": src and dst host identical");
    if (f.klass == FlowClass::Elephant) ++v.n_elephants;
    v.total_bytes += f.size_bytes;
    if (first) {
      v.first_start_us = v.last_start_us = f.start_us;
      first = false;
    } else {
      v.first_start_us = std::min(v.first_start_us, f.start_us);
      v.last_start_us = std::max(v.last_start_us, f.start_us);
    }
    if (f.coflow != kNoCoflow) {
      auto [it, fresh] =
          coflows.emplace(f.coflow, CoflowInfo{f.start_us, topo.host_switch(f.dst_host)});
      if (!fresh) {
        if (it->second.start != f.start_us) it->second.mixed_start = true;
        if (it->second.dst_sw != topo.host_switch(f.dst_host)) it->second.mixed_dst = true;
      }
    }
  }
  for (const auto& [cid, info] : coflows) {
    if (info.mixed_start)
      complain("coflow " + std::to_string(cid) + ": members have different arrival times");
    if (info.mixed_dst)
      complain("coflow " + std::to_string(cid) + ": members target different switches");
  }
  v.n_coflows = coflows.size();
  if (v.n_flows > 0) {
    v.elephant_count_share = static_cast<double>(v.n_elephants) / v.n_flows;
    int64_t e_bytes = 0;
    for (const FlowSpec& f : t.flows)
      if (f.klass == FlowClass::Elephant) e_bytes += f.size_bytes;
    if (v.total_bytes > 0)
      v.elephant_demand_share = static_cast<double>(e_bytes) / v.total_bytes;
  }
  v.ok = v.problems.empty();
  return v;
}

}  // namespace ocsim
