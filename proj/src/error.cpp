#include "neurite/error.hpp"

namespace neurite {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingParent: return "DanglingParent";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoInstances: return "NoInstances";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::EmptySkeleton: return "EmptySkeleton";
    case ErrorCode::TooManyInstances: return "TooManyInstances";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace neurite
