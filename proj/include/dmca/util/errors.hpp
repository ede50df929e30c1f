#ifndef DMCA_UTIL_ERRORS_HPP
#define DMCA_UTIL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dmca {

// Bad configuration values or malformed config files.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or malformed input data (traces, histories, trajectories).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Required checkpoint or artifact file not found.
struct MissingArtifactError : std::runtime_error {
  explicit MissingArtifactError(const std::string& what) : std::runtime_error(what) {}
};

// Contract violations inside the computation graph or state machines
// (stale tape, corrupted state, out-of-range decisions, ...).
struct StateError : std::logic_error {
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace dmca

#endif
