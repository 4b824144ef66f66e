#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace glt {

enum class ErrorKind {
  InvalidArgument,
  InvalidGraph,
  InfeasibleTrace,
  ZeroProbability,
  CapExceeded,
  NoData,
  Numerical,
  Parse,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure the library reports carries a kind plus a machine-readable
// detail object (offending node, time step, line number, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        nlohmann::ordered_json details = nlohmann::ordered_json::object());

  ErrorKind kind() const noexcept { return kind_; }
  const nlohmann::ordered_json& details() const noexcept { return details_; }

  // {"error": {"kind": ..., "message": ..., "details": {...}}}
  nlohmann::ordered_json to_json() const;

 private:
  ErrorKind kind_;
  nlohmann::ordered_json details_;
};

}  // namespace glt
