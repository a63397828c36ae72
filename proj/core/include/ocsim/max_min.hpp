#pragma once

#include <vector>

#include "ocsim/units.hpp"

namespace ocsim {

// Max-min fair rates by progressive filling.  `flow_links[i]` lists the link
// ids flow i crosses (a link must appear at most once per flow);
// `capacity[l]` is indexed by link id.  Links no flow touches are ignored.
// Returns one rate per flow.
std::vector<double> allocate_rates(const std::vector<std::vector<LinkId>>& flow_links,
                                   const std::vector<double>& capacity);

// Identical semantics without copying the per-flow link lists; used on the
// simulator's hot path.
std::vector<double> allocate_rates(const std::vector<const std::vector<LinkId>*>& flow_links,
                                   const std::vector<double>& capacity);

}  // namespace ocsim
