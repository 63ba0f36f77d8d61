#pragma once

#include <stdexcept>
#include <string>

namespace specbench {

enum class ErrorCode {
  kInvalidArgument = 1,
  kIo,
  kSchema,
  kUnsupportedSamplingMode,
  kMissingBaseline,
  kEmptyDatastore,
  kContextTooLong,
  kMissingPreviousAnswer,
  kInvalidProposal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define SPECBENCH_DEFINE_ERROR(Name, Code)                                 \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  };

SPECBENCH_DEFINE_ERROR(InvalidArgument, kInvalidArgument)
SPECBENCH_DEFINE_ERROR(IoError, kIo)
SPECBENCH_DEFINE_ERROR(UnsupportedSamplingMode, kUnsupportedSamplingMode)
SPECBENCH_DEFINE_ERROR(MissingBaseline, kMissingBaseline)
SPECBENCH_DEFINE_ERROR(EmptyDatastore, kEmptyDatastore)
SPECBENCH_DEFINE_ERROR(ContextTooLong, kContextTooLong)
SPECBENCH_DEFINE_ERROR(MissingPreviousAnswer, kMissingPreviousAnswer)
SPECBENCH_DEFINE_ERROR(InvalidProposal, kInvalidProposal)

#undef SPECBENCH_DEFINE_ERROR

// Schema errors carry the 1-based line number of the offending record (0 when
// the error is not tied to a line).
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::size_t line = 0)
      : Error(ErrorCode::kSchema, line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace specbench
