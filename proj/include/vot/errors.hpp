#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vot {

// Stable error codes shared across the toolkit. CLI layers map these to
// exit codes, tests assert on them directly.
enum class ErrorCode {
  InvalidArgument,

  // scene graph model
  DuplicateFrameIndex,
  MissingSourceFps,
  InvalidStsg,
  ParseFailure,
  EmptyInput,

  // graph queries
  UnknownInstance,
  FrameNotFound,
  EmptyTracklet,

  // grounding metrics
  FrameMismatch,

  // tuning data generation
  EmptyCorpus,
  MissingCaptions,
  SingletonCorpus,

  // chat backend
  Timeout,
  HttpStatus,
  NoScriptEntry,
  EmptyCompletion,

  // reasoning pipeline
  NoTargetsParsed,
  GroundingFailed,
  TooFewCandidates,
  ScoreNotFound,
  ScoreOutOfRange,
  AllExcluded,
  VerdictUnparseable,

  // io / datasets
  IoError,
  SchemaError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Error(ErrorCode code, const std::string& message, int http_status)
      : std::runtime_error(std::string(to_string(code)) + "(" + std::to_string(http_status) +
                           "): " + message),
        code_(code),
        http_status_(http_status) {}

  ErrorCode code() const { return code_; }
  // Only meaningful for ErrorCode::HttpStatus.
  int http_status() const { return http_status_; }

 private:
  ErrorCode code_;
  int http_status_ = 0;
};

// Grammar-level failure; carries the byte offset into the input and what the
// scanner expected there.
class TextParseError : public Error {
 public:
  TextParseError(std::size_t offset, const std::string& expected)
      : Error(ErrorCode::ParseFailure,
              "at byte " + std::to_string(offset) + ": expected " + expected),
        offset_(offset),
        expected_(expected) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::DuplicateFrameIndex: return "DUPLICATE_FRAME_INDEX";
    case ErrorCode::MissingSourceFps: return "MISSING_SOURCE_FPS";
    case ErrorCode::InvalidStsg: return "INVALID_STSG";
    case ErrorCode::ParseFailure: return "PARSE_ERROR";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::UnknownInstance: return "UNKNOWN_INSTANCE";
    case ErrorCode::FrameNotFound: return "FRAME_NOT_FOUND";
    case ErrorCode::EmptyTracklet: return "EMPTY_TRACKLET";
    case ErrorCode::FrameMismatch: return "FRAME_MISMATCH";
    case ErrorCode::EmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::MissingCaptions: return "MISSING_CAPTIONS";
    case ErrorCode::SingletonCorpus: return "SINGLETON_CORPUS";
    case ErrorCode::Timeout: return "TIMEOUT";
    case ErrorCode::HttpStatus: return "HTTP_STATUS";
    case ErrorCode::NoScriptEntry: return "NO_SCRIPT_ENTRY";
    case ErrorCode::EmptyCompletion: return "EMPTY_COMPLETION";
    case ErrorCode::NoTargetsParsed: return "NO_TARGETS_PARSED";
    case ErrorCode::GroundingFailed: return "GROUNDING_FAILED";
    case ErrorCode::TooFewCandidates: return "TOO_FEW_CANDIDATES";
    case ErrorCode::ScoreNotFound: return "SCORE_NOT_FOUND";
    case ErrorCode::ScoreOutOfRange: return "SCORE_OUT_OF_RANGE";
    case ErrorCode::AllExcluded: return "ALL_EXCLUDED";
    case ErrorCode::VerdictUnparseable: return "VERDICT_UNPARSEABLE";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace vot
