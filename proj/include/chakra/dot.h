#pragma once

#include <cstddef>
#include <string>

#include "chakra/schema.h"

namespace chakra {

enum class DotColorBy { dep_type, node_type };

struct DotOptions {
  size_t max_nodes = 2000;
  DotColorBy color_by = DotColorBy::dep_type;
};

// Data edges are solid, control edges dashed. Beyond max_nodes the lowest ids
// are kept and one summary node stands in for the rest.
std::string emit_dot(const ExecutionTrace& trace, const DotOptions& opts = {});

}  // namespace chakra
