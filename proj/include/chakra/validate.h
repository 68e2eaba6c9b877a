#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "chakra/schema.h"

namespace chakra {

enum class IssueCode {
  DANGLING_DEP,
  SELF_DEP,
  DUPLICATE_ID,
  DANGLING_TENSOR,
  DANGLING_STORAGE,
  MISSING_COMM_ATTR,
  UNKNOWN_GROUP,
  STORAGE_OVERFLOW,
  INVALID_RANK,
  INVALID_GROUP,
  INVALID_TENSOR,
  INVALID_STORAGE,
  INVALID_COMM_ATTR,
  DUPLICATE_DEP,  // warning only
};

std::string_view to_string(IssueCode code);

struct Issue {
  IssueCode code;
  std::string object;  // "node", "tensor", "storage", "group" or "trace"
  uint64_t id = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const { return errors.empty(); }
  size_t count(IssueCode code) const;
};

// Structural checks only; acyclicity is the converter's concern.
ValidationReport validate_trace(const ExecutionTrace& trace);

}  // namespace chakra
