#include "chakra/error.h"

namespace chakra {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MALFORMED_JSON: return "MALFORMED_JSON";
    case ErrorCode::MISSING_FIELD: return "MISSING_FIELD";
    case ErrorCode::TYPE_MISMATCH: return "TYPE_MISMATCH";
    case ErrorCode::UNKNOWN_NODE_TYPE: return "UNKNOWN_NODE_TYPE";
    case ErrorCode::INVALID_TRACE: return "INVALID_TRACE";
    case ErrorCode::DANGLING_PARENT: return "DANGLING_PARENT";
    case ErrorCode::DUPLICATE_ID: return "DUPLICATE_ID";
    case ErrorCode::DUPLICATE_RF_ID: return "DUPLICATE_RF_ID";
    case ErrorCode::UNMATCHED_EVENT_WAIT: return "UNMATCHED_EVENT_WAIT";
    case ErrorCode::CYCLE_DETECTED: return "CYCLE_DETECTED";
    case ErrorCode::UNKNOWN_GROUP: return "UNKNOWN_GROUP";
    case ErrorCode::GRAPH_TOO_LARGE_FOR_REDUCTION: return "GRAPH_TOO_LARGE_FOR_REDUCTION";
    case ErrorCode::EMPTY_TRACE: return "EMPTY_TRACE";
    case ErrorCode::DEADLOCK: return "DEADLOCK";
    case ErrorCode::UNKNOWN_ID: return "UNKNOWN_ID";
    case ErrorCode::DOUBLE_COMPLETE: return "DOUBLE_COMPLETE";
    case ErrorCode::INVALID_GROUP: return "INVALID_GROUP";
    case ErrorCode::GROUP_SEQUENCE_MISMATCH: return "GROUP_SEQUENCE_MISMATCH";
    case ErrorCode::TAG_MISMATCH: return "TAG_MISMATCH";
    case ErrorCode::UNPAIRED_SEND_RECV: return "UNPAIRED_SEND_RECV";
    case ErrorCode::MISSING_TIMING: return "MISSING_TIMING";
    case ErrorCode::INVALID_SPEC: return "INVALID_SPEC";
    case ErrorCode::INVALID_CONFIG: return "INVALID_CONFIG";
    case ErrorCode::IO_ERROR: return "IO_ERROR";
    case ErrorCode::USAGE: return "USAGE";
  }
  return "UNKNOWN";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail,
                    const std::string& message) {
  std::string out(to_string(code));
  if (!detail.empty()) out += "(" + detail + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail, std::string message,
             std::vector<uint64_t> ids)
    : std::runtime_error(compose(code, detail, message)),
      code_(code),
      detail_(std::move(detail)),
      ids_(std::move(ids)) {}

}  // namespace chakra
