#include "ocsim/max_min.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ocsim {

namespace {

// Scratch buffers reused across calls.  The allocator sits on the simulator's
// hot path (one call per state-changing event), so per-call heap allocation and
// O(total links) zero-initialisation are avoided: slots are validated lazily
// with an epoch stamp and only links actually referenced by the current flow
// set are ever touched.
struct Scratch {
  std::vector<double> residual;    // remaining capacity, valued at `last`
  std::vector<double> last;        // fill level at which `residual` is valued
  std::vector<uint32_t> load;      // number of unfrozen flows crossing the link
  std::vector<uint64_t> seen;      // epoch stamp; slot valid iff seen == epoch
  std::vector<LinkId> active;      // compact list of links with load > 0
  std::vector<uint32_t> boff;      // CSR offsets into `bucket`, per active slot
  std::vector<uint32_t> bucket;    // CSR payload: flow ids crossing each link
  std::vector<uint32_t> bidx;      // link -> slot in `active`/CSR ordering
  std::vector<uint32_t> blen;      // live entries left in each link's bucket
  std::vector<uint8_t> frozen;
  uint64_t epoch = 0;
};

thread_local Scratch scratch;

// Progressive filling ("water filling"): raise one shared fill level; each
// time a link would exceed its capacity, that link's flows freeze at the
// current level and stop consuming.  Runs in rounds, one per distinct
// bottleneck level; each round costs O(active links) plus O(links of the
// flows frozen this round), with no priority queue.
void fill_rates(const std::vector<const std::vector<LinkId>*>& flow_links,
                const std::vector<double>& capacity, std::vector<double>& rate) {
  const size_t n = flow_links.size();
  rate.assign(n, 0.0);
  if (n == 0) return;

  Scratch& s = scratch;
  if (s.residual.size() < capacity.size()) {
    size_t cap = capacity.size();
    s.residual.resize(cap);
    s.last.resize(cap);
    s.load.resize(cap);
    s.seen.resize(cap, 0);
    s.bidx.resize(cap);
  }
  s.epoch++;
  s.active.clear();
  s.frozen.assign(n, 0);

  // First pass: discover referenced links and count their flows.
  for (size_t i = 0; i < n; ++i) {
    for (LinkId l : *flow_links[i]) {
      if (l >= capacity.size()) throw std::out_of_range("allocate_rates: link id out of range");
      if (s.seen[l] != s.epoch) {
        s.seen[l] = s.epoch;
        s.residual[l] = capacity[l];
        s.last[l] = 0.0;
        s.load[l] = 0;
        s.bidx[l] = static_cast<uint32_t>(s.active.size());
        s.active.push_back(l);
      }
      s.load[l]++;
    }
  }

  // Second pass: bucket flow ids by link (CSR layout over the active slots).
  const size_t nl = s.active.size();
  s.boff.assign(nl + 1, 0);
  for (size_t i = 0; i < n; ++i)
    for (LinkId l : *flow_links[i]) s.boff[s.bidx[l] + 1]++;
  for (size_t k = 0; k < nl; ++k) s.boff[k + 1] += s.boff[k];
  s.bucket.resize(s.boff[nl]);
  s.blen.assign(nl, 0);
  for (size_t i = 0; i < n; ++i)
    for (LinkId l : *flow_links[i]) {
      uint32_t slot = s.bidx[l];
      s.bucket[s.boff[slot] + s.blen[slot]++] = static_cast<uint32_t>(i);
    }

  size_t unfrozen = n;
  size_t n_active = nl;  // prefix of s.active still carrying load
  while (unfrozen > 0) {
    // Find the lowest projected saturation level among loaded links.
    double level = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < n_active;) {
      LinkId l = s.active[k];
      if (s.load[l] == 0) {
        // Swap-remove links drained by freezes on other links.
        std::swap(s.active[k], s.active[--n_active]);
        std::swap(s.bidx[s.active[k]], s.bidx[s.active[n_active]]);
        std::swap(s.boff[k], s.boff[n_active]);  // offsets travel with the slot
        std::swap(s.blen[k], s.blen[n_active]);
        continue;
      }
      double proj = s.last[l] + s.residual[l] / static_cast<double>(s.load[l]);
      if (proj < level) level = proj;
      ++k;
    }
    if (!(level < std::numeric_limits<double>::infinity()))
      throw std::logic_error("allocate_rates: no progress");
    double eps = 1e-9 * (level > 1.0 ? level : 1.0);

    // Freeze every unfrozen flow crossing a link that saturates at this level.
    for (size_t k = 0; k < n_active; ++k) {
      LinkId l = s.active[k];
      if (s.load[l] == 0) continue;  // drained by a freeze earlier this round
      double proj = s.last[l] + s.residual[l] / static_cast<double>(s.load[l]);
      if (proj - level > eps) continue;
      uint32_t base = s.boff[k];
      for (uint32_t e = 0; e < s.blen[k];) {
        uint32_t i = s.bucket[base + e];
        if (s.frozen[i]) {  // compact away entries frozen in earlier rounds
          s.bucket[base + e] = s.bucket[base + --s.blen[k]];
          continue;
        }
        s.frozen[i] = 1;
        rate[i] = level;
        unfrozen--;
        for (LinkId l2 : *flow_links[i]) {
          // Bring the link's residual up to the current level before this
          // flow stops consuming; idempotent within a round.
          s.residual[l2] -= static_cast<double>(s.load[l2]) * (level - s.last[l2]);
          s.last[l2] = level;
          s.load[l2]--;
        }
        ++e;
      }
    }
  }
}

}  // namespace

std::vector<double> allocate_rates(const std::vector<std::vector<LinkId>>& flow_links,
                                   const std::vector<double>& capacity) {
  std::vector<const std::vector<LinkId>*> ptrs;
  ptrs.reserve(flow_links.size());
  for (const auto& links : flow_links) ptrs.push_back(&links);
  std::vector<double> rate;
  fill_rates(ptrs, capacity, rate);
  return rate;
}

std::vector<double> allocate_rates(const std::vector<const std::vector<LinkId>*>& flow_links,
                                   const std::vector<double>& capacity) {
  std::vector<double> rate;
  fill_rates(flow_links, capacity, rate);
  return rate;
}

}  // namespace ocsim
