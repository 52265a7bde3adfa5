#pragma once
// Error taxonomy shared by the library and the CLI. The CLI maps these to
// process exit codes: ConfigError -> 1, SolverError -> 2, IoError -> 3,
// InvariantError -> 4.

#include <stdexcept>
#include <string>

namespace wproj {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wproj
