#include "glt/error.hpp"

namespace glt {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidGraph: return "invalid-graph";
    case ErrorKind::InfeasibleTrace: return "infeasible-trace";
    case ErrorKind::ZeroProbability: return "zero-probability";
    case ErrorKind::CapExceeded: return "cap-exceeded";
    case ErrorKind::NoData: return "no-data";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, nlohmann::ordered_json details)
    : std::runtime_error(message), kind_(kind), details_(std::move(details)) {}

nlohmann::ordered_json Error::to_json() const {
  nlohmann::ordered_json inner;
  inner["kind"] = to_string(kind_);
  inner["message"] = what();
  inner["details"] = details_;
  nlohmann::ordered_json out;
  out["error"] = std::move(inner);
  return out;
}

}  // namespace glt
