#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cg {

enum class Errc {
  kMalformedToken,
  kEmptyShape,
  kOutOfRange,
  kTemplateMismatch,
  kDegenerateArc,
  kPrecondition,
  kMissingFile,
  kSchemaMismatch,
  kInsufficientImages,
  kCountExceedsSplit,
  kInvalidCondition,
  kMissingConcept,
  kImageFileMissing,
  kTimeout,
  kTransportError,
  kRateLimited,
  kAuthMissing,
  kUnsupportedModality,
  kConfigError,
  kEmptyGroup,
  kModelSetMismatch,
  kGroupTooSmall,
  kDegenerateMarginal,
  kMissingClass,
  kIoError,
};

std::string_view errc_name(Errc code);

// Every failure raised by the library is a cg::Error; callers that care about
// the category switch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Grammar fault with the byte offset into the offending token. shape/action are
// filled in when the token was parsed as part of an image (-1 otherwise).
class MalformedToken : public Error {
 public:
  MalformedToken(std::string token, std::size_t offset, const std::string& reason, int shape = -1,
                 int action = -1);

  const std::string& token() const noexcept { return token_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }
  int shape_index() const noexcept { return shape_; }
  int action_index() const noexcept { return action_; }

  MalformedToken at(int shape, int action) const { return {token_, offset_, reason_, shape, action}; }

 private:
  std::string token_;
  std::size_t offset_;
  std::string reason_;
  int shape_;
  int action_;
};

class TemplateMismatch : public Error {
 public:
  TemplateMismatch(std::size_t line, const std::string& reason)
      : Error(Errc::kTemplateMismatch, "line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cg
