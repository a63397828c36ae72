#pragma once

#include <stdexcept>
#include <string>

namespace ocsim {

// Bad user input: malformed config file, unknown preset, invalid CLI value.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural problems detected while building or using a topology.
struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent trace data.
struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal inconsistency during a run (invariant violation, stuck clock).
// The CLI maps this (and any other failure mid-run) to exit code 3.
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ocsim
