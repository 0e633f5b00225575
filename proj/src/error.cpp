#include "xlemb/error.hpp"

namespace xlemb {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::UndefinedSimilarity: return "undefined similarity";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::InsufficientOverlap: return "insufficient overlap";
    case ErrorKind::Singularity: return "singular covariance";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::DegenerateData: return "degenerate data";
    case ErrorKind::Protocol: return "protocol error";
  }
  return "error";
}

Error format_error(const std::string& path, std::size_t line, const std::string& what) {
  return Error(ErrorKind::Format, path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace xlemb
