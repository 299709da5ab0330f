#pragma once

#include <stdexcept>
#include <string>

namespace hysortk {

// Error classes map to distinct process exit codes in the CLI.
enum class ErrorKind : int {
  config = 2,
  ingest = 3,
  io = 4,
  wire = 5,
  internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct IngestError : Error {
  explicit IngestError(const std::string& what) : Error(ErrorKind::ingest, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

struct WireError : Error {
  explicit WireError(const std::string& what) : Error(ErrorKind::wire, what) {}
};

struct InternalError : Error {
  explicit InternalError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

}  // namespace hysortk
