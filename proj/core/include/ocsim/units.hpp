#pragma once

#include <cstdint>
#include <limits>

namespace ocsim {

// Node ids share one space: switches occupy [0, n_switches), hosts follow.
typedef uint32_t NodeId;
typedef uint32_t SwitchId;
typedef uint32_t HostId;
typedef uint32_t LinkId;
typedef uint64_t FlowId;
typedef int64_t CoflowId;  // -1 for standalone flows
typedef uint32_t CircuitId;

// Simulation clock in integer microseconds since run start.
typedef int64_t SimTime;

constexpr CoflowId kNoCoflow = -1;
constexpr LinkId kInvalidLink = std::numeric_limits<LinkId>::max();
constexpr CircuitId kInvalidCircuit = std::numeric_limits<CircuitId>::max();
constexpr SimTime kNoTime = -1;

constexpr double kBitsPerByte = 8.0;
constexpr double kUsPerSec = 1e6;

enum class FlowClass : uint8_t { Mice = 0, Elephant = 1 };

inline const char* flow_class_name(FlowClass c) {
  return c == FlowClass::Mice ? "mice" : "elephant";
}

enum class CircuitMode : uint8_t { None = 0, Private = 1, Shared = 2 };

inline const char* circuit_mode_name(CircuitMode m) {
  switch (m) {
    case CircuitMode::None: return "none";
    case CircuitMode::Private: return "private";
    default: return "shared";
  }
}

enum class RuleMode : uint8_t { CShare = 0, PerFlow = 1 };

inline const char* rule_mode_name(RuleMode m) {
  return m == RuleMode::CShare ? "cshare" : "per_flow";
}

}  // namespace ocsim
