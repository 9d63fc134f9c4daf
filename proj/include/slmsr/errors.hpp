#pragma once

#include <stdexcept>
#include <string>

namespace slmsr {

// invalid-argument conditions use std::invalid_argument directly.

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularGeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidConnectivityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PropagationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConformityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace slmsr
