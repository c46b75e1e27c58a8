#include "mwb/error.hpp"

namespace mwb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::Ambiguous: return "ambiguous";
    case ErrorCode::NameClash: return "name-clash";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::NotInstantiable: return "not-instantiable";
    case ErrorCode::TypeMismatch: return "type-mismatch";
    case ErrorCode::EmptyList: return "empty-list";
    case ErrorCode::BoundExceeded: return "bound-exceeded";
    case ErrorCode::Syntax: return "syntax";
    case ErrorCode::Navigation: return "navigation";
    case ErrorCode::NullAccess: return "null-access";
    case ErrorCode::PredicateType: return "predicate-type";
    case ErrorCode::Rejected: return "rejected";
    case ErrorCode::CascadeDivergence: return "cascade-divergence";
    case ErrorCode::EmptyStack: return "empty-stack";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Unauthorized: return "unauthorized";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, std::string message)
    : Error(code, std::move(message), SourcePos{}, {}) {}

Error::Error(ErrorCode code, std::string message, SourcePos pos, std::string path)
    : std::runtime_error(render(message, pos, path)),
      code_(code),
      message_(std::move(message)),
      pos_(pos),
      path_(std::move(path)) {}

std::string Error::render(const std::string& message, SourcePos pos, const std::string& path) {
  std::string out;
  if (pos.line > 0) {
    out = std::to_string(pos.line) + ":" + std::to_string(pos.column) + " ";
  }
  out += message;
  if (!path.empty()) out += " " + path;
  return out;
}

void fail(ErrorCode code, std::string message) { throw Error(code, std::move(message)); }

}  // namespace mwb
