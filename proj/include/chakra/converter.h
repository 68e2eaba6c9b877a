#pragma once

// Verifies a linked graph and emits the canonical execution trace.

#include <cstdint>
#include <optional>
#include <vector>

#include "chakra/linker.h"
#include "chakra/schema.h"

namespace chakra {

struct ConvertOptions {
  bool full_transitive_reduction = false;
  uint64_t reduction_node_limit = 50'000;
  bool keep_host_ops = true;
  // Run the reduction kernel on all cores; the result is identical either way.
  bool parallel = true;
};

// Witness cycle as node ids, each consecutive pair an edge and the last id
// pointing back at the first.
std::optional<std::vector<uint64_t>> detect_cycle(const LinkedGraph& graph);

// Drops duplicate edges, collapses parallel edges of different types to the
// strongest one, drops edges implied by a same-stream chain, and optionally
// computes the full transitive reduction. Reachability is unchanged.
LinkedGraph prune_redundant_edges(LinkedGraph graph, const ConvertOptions& opts);

// Throws CYCLE_DETECTED (witness in Error::ids()), UNKNOWN_GROUP,
// GRAPH_TOO_LARGE_FOR_REDUCTION or INVALID_TRACE on a malformed graph.
ExecutionTrace convert(const LinkedGraph& graph, const std::vector<ProcessGroup>& groups,
                       const ConvertOptions& opts = {});

// Reads an emitted trace back as a linked graph, recovering dep types from
// the node attrs written by convert.
LinkedGraph trace_to_linked(const ExecutionTrace& trace);

}  // namespace chakra
