#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chakra {

enum class ErrorCode {
  MALFORMED_JSON,
  MISSING_FIELD,
  TYPE_MISMATCH,
  UNKNOWN_NODE_TYPE,
  INVALID_TRACE,
  DANGLING_PARENT,
  DUPLICATE_ID,
  DUPLICATE_RF_ID,
  UNMATCHED_EVENT_WAIT,
  CYCLE_DETECTED,
  UNKNOWN_GROUP,
  GRAPH_TOO_LARGE_FOR_REDUCTION,
  EMPTY_TRACE,
  DEADLOCK,
  UNKNOWN_ID,
  DOUBLE_COMPLETE,
  INVALID_GROUP,
  GROUP_SEQUENCE_MISMATCH,
  TAG_MISMATCH,
  UNPAIRED_SEND_RECV,
  MISSING_TIMING,
  INVALID_SPEC,
  INVALID_CONFIG,
  IO_ERROR,
  USAGE,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library. `detail` carries the code's payload
// (a JSON path, an offending value or id) and `ids` an optional id list such
// as a cycle witness.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail, std::string message = {},
        std::vector<uint64_t> ids = {});

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }
  const std::vector<uint64_t>& ids() const { return ids_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::vector<uint64_t> ids_;
};

}  // namespace chakra
