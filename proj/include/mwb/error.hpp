#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mwb {

enum class ErrorCode {
  NotFound,
  Ambiguous,
  NameClash,
  InvalidArgument,
  NotInstantiable,
  TypeMismatch,
  EmptyList,
  BoundExceeded,
  Syntax,
  Navigation,
  NullAccess,
  PredicateType,
  Rejected,
  CascadeDivergence,
  EmptyStack,
  OutOfRange,
  Conflict,
  Unauthorized,
  Io,
};

std::string_view to_string(ErrorCode code);

struct SourcePos {
  int line = 0;  // 1-based; 0 when unknown
  int column = 0;
};

// All kernel failures surface as mwb::Error. Query errors carry a source
// position and the path segment that failed; what() renders them as
// "line:col message path".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message);
  Error(ErrorCode code, std::string message, SourcePos pos, std::string path = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const SourcePos& pos() const noexcept { return pos_; }
  const std::string& path() const noexcept { return path_; }

 private:
  static std::string render(const std::string& message, SourcePos pos, const std::string& path);

  ErrorCode code_;
  std::string message_;
  SourcePos pos_;
  std::string path_;
};

[[noreturn]] void fail(ErrorCode code, std::string message);

}  // namespace mwb
