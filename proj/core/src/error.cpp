#include "hypmin/error.hpp"

namespace hypmin {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Resource: return "resource";
    case ErrorKind::MeshQuality: return "mesh-quality";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::IndeterminateKernel: return "indeterminate-kernel";
    case ErrorKind::LinearSolve: return "linear-solve";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Stagnation: return "stagnation";
    case ErrorKind::IndefiniteLinearization: return "indefinite-linearization";
    case ErrorKind::StaleSolution: return "stale-solution";
    case ErrorKind::DegenerateOrbit: return "degenerate-orbit";
    case ErrorKind::Format: return "format";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string module, std::string operation, const std::string& message,
             nlohmann::json payload)
    : std::runtime_error(module + "::" + operation + ": " + message),
      kind_(kind),
      module_(std::move(module)),
      operation_(std::move(operation)),
      payload_(std::move(payload)) {}

nlohmann::json Error::to_json() const {
  return {{"kind", to_string(kind_)},
          {"module", module_},
          {"operation", operation_},
          {"message", what()},
          {"payload", payload_}};
}

}  // namespace hypmin
