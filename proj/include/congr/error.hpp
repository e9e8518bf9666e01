#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace congr {

enum class ErrorCode {
  InvalidArgument,
  EmptyResponse,
  EmptySequence,
  DuplicateResponse,
  JudgeParse,
  JudgeTransport,
  RegionJudge,
  TooShort,
  Format,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when a judge call fails while resolving one region of a graph.
// The underlying judge failure is kept in cause().
class RegionJudgeError : public Error {
 public:
  RegionJudgeError(std::size_t region_index, std::size_t left_anchor, std::size_t right_anchor,
                   ErrorCode cause, const std::string& detail);

  std::size_t region_index() const noexcept { return region_index_; }
  std::size_t left_anchor() const noexcept { return left_anchor_; }
  std::size_t right_anchor() const noexcept { return right_anchor_; }
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::size_t region_index_;
  std::size_t left_anchor_;
  std::size_t right_anchor_;
  ErrorCode cause_;
};

}  // namespace congr
