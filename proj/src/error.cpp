#include "cg/error.hpp"

namespace cg {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kMalformedToken: return "MalformedToken";
    case Errc::kEmptyShape: return "EmptyShape";
    case Errc::kOutOfRange: return "OutOfRange";
    case Errc::kTemplateMismatch: return "TemplateMismatch";
    case Errc::kDegenerateArc: return "DegenerateArc";
    case Errc::kPrecondition: return "PreconditionViolation";
    case Errc::kMissingFile: return "MissingFile";
    case Errc::kSchemaMismatch: return "SchemaMismatch";
    case Errc::kInsufficientImages: return "InsufficientImages";
    case Errc::kCountExceedsSplit: return "CountExceedsSplit";
    case Errc::kInvalidCondition: return "InvalidCondition";
    case Errc::kMissingConcept: return "MissingConcept";
    case Errc::kImageFileMissing: return "ImageFileMissing";
    case Errc::kTimeout: return "Timeout";
    case Errc::kTransportError: return "TransportError";
    case Errc::kRateLimited: return "RateLimited";
    case Errc::kAuthMissing: return "AuthMissing";
    case Errc::kUnsupportedModality: return "UnsupportedModality";
    case Errc::kConfigError: return "ConfigError";
    case Errc::kEmptyGroup: return "EmptyGroup";
    case Errc::kModelSetMismatch: return "ModelSetMismatch";
    case Errc::kGroupTooSmall: return "GroupTooSmall";
    case Errc::kDegenerateMarginal: return "DegenerateMarginal";
    case Errc::kMissingClass: return "MissingClass";
    case Errc::kIoError: return "IoError";
  }
  return "Unknown";
}

MalformedToken::MalformedToken(std::string token, std::size_t offset, const std::string& reason, int shape,
                               int action)
    : Error(Errc::kMalformedToken,
            (shape >= 0 ? "shape " + std::to_string(shape) + " action " + std::to_string(action) + ": " : "") +
                "'" + token + "' at byte " + std::to_string(offset) + ": " + reason),
      token_(std::move(token)),
      offset_(offset),
      reason_(reason),
      shape_(shape),
      action_(action) {}

}  // namespace cg
