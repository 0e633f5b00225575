#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xlemb {

enum class ErrorKind {
  Format,
  Io,
  EmptyInput,
  Dimension,
  UndefinedSimilarity,
  Config,
  InsufficientData,
  InsufficientOverlap,
  Singularity,
  NotFound,
  Domain,
  DegenerateData,
  Protocol,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as this type; `kind()` lets callers (the CLI in
// particular) map a failure onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

// Format error pointing at a 1-based line in a named file.
Error format_error(const std::string& path, std::size_t line, const std::string& what);

}  // namespace xlemb
