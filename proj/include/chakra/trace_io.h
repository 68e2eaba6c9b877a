#pragma once

#include <string>
#include <string_view>

#include "chakra/schema.h"

namespace chakra {

// Parses one `.et.json` document. Nodes, tensors and storages keep file
// order; unknown node keys land in the node's attrs and unknown top-level
// keys in ExecutionTrace::extra.
ExecutionTrace parse_trace(std::string_view bytes);

// Canonical bytes: sorted keys, compact, id-sorted tables, sorted deps and a
// single trailing newline. Throws INVALID_TRACE if validation reports errors.
std::string serialize_trace(const ExecutionTrace& trace);

// Same encoding without the validation gate, for traces already known valid
// (e.g. converter output) or for debugging dumps.
std::string serialize_trace_unchecked(const ExecutionTrace& trace);

ExecutionTrace read_trace_file(const std::string& path);
void write_trace_file(const std::string& path, const ExecutionTrace& trace);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace chakra
