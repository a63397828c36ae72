#pragma once

#include <string>
#include <vector>

#include "ocsim/experiment.hpp"

namespace ocsim {

// Named ready-to-run experiment configurations (topology + traffic + control
// settings + mode cells + seed sweep).  preset_config throws ConfigError for
// unknown names; preset_names lists them for --help output.
std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

}  // namespace ocsim
