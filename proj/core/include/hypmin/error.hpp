#pragma once

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace hypmin {

enum class ErrorKind {
  InvalidParameter,
  Resource,
  MeshQuality,
  Shape,
  IndeterminateKernel,
  LinearSolve,
  NonConvergence,
  Stagnation,
  IndefiniteLinearization,
  StaleSolution,
  DegenerateOrbit,
  Format,
};

const char* to_string(ErrorKind kind);

// Every module failure carries the module and operation that raised it plus a
// structured payload (singular values, Newton traces, ...) for the report.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, std::string operation, const std::string& message,
        nlohmann::json payload = nlohmann::json::object());

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }
  const nlohmann::json& payload() const noexcept { return payload_; }

  nlohmann::json to_json() const;

 private:
  ErrorKind kind_;
  std::string module_;
  std::string operation_;
  nlohmann::json payload_;
};

}  // namespace hypmin
