#include "congr/error.hpp"

namespace congr {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyResponse: return "EmptyResponse";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::DuplicateResponse: return "DuplicateResponse";
    case ErrorCode::JudgeParse: return "JudgeParseError";
    case ErrorCode::JudgeTransport: return "JudgeTransportError";
    case ErrorCode::RegionJudge: return "RegionJudgeError";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

RegionJudgeError::RegionJudgeError(std::size_t region_index, std::size_t left_anchor,
                                   std::size_t right_anchor, ErrorCode cause,
                                   const std::string& detail)
    : Error(ErrorCode::RegionJudge,
            "region " + std::to_string(region_index) + " (anchors " + std::to_string(left_anchor) +
                " -> " + std::to_string(right_anchor) + "): " + detail),
      region_index_(region_index),
      left_anchor_(left_anchor),
      right_anchor_(right_anchor),
      cause_(cause) {}

}  // namespace congr
