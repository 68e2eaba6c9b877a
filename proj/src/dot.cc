#include "chakra/dot.h"

#include <algorithm>
#include <unordered_set>

namespace chakra {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

const char* node_color(NodeType t) {
  switch (t) {
    case NodeType::COMP: return "lightblue";
    case NodeType::MEM_LOAD:
    case NodeType::MEM_STORE: return "khaki";
    case NodeType::COMM_COLL: return "salmon";
    case NodeType::COMM_SEND:
    case NodeType::COMM_RECV: return "palegreen";
  }
  return "white";
}

}  // namespace

std::string emit_dot(const ExecutionTrace& trace, const DotOptions& opts) {
  if (trace.nodes.empty()) return "digraph { }\n";
  std::vector<const TraceNode*> nodes;
  for (const TraceNode& n : trace.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(), [](const TraceNode* a, const TraceNode* b) { return a->id < b->id; });
  const size_t kept = std::min(nodes.size(), opts.max_nodes);
  std::unordered_set<uint64_t> shown;
  for (size_t i = 0; i < kept; ++i) shown.insert(nodes[i]->id);

  std::string out = "digraph {\n";
  for (size_t i = 0; i < kept; ++i) {
    const TraceNode& n = *nodes[i];
    out += "  n" + std::to_string(n.id) + " [label=" + quoted(n.name);
    if (opts.color_by == DotColorBy::node_type) out += ", style=filled, fillcolor=" + std::string(node_color(n.type));
    out += "];\n";
  }
  if (kept < nodes.size())
    out += "  truncated [label=" + quoted("\xE2\x80\xA6+" + std::to_string(nodes.size() - kept) + " nodes") +
           ", shape=box];\n";
  for (size_t i = 0; i < kept; ++i) {
    const TraceNode& n = *nodes[i];
    std::vector<uint64_t> data = n.data_deps, ctrl = n.ctrl_deps;
    sort_unique(data);
    sort_unique(ctrl);
    for (uint64_t d : data)
      if (shown.count(d)) out += "  n" + std::to_string(d) + " -> n" + std::to_string(n.id) + ";\n";
    for (uint64_t d : ctrl)
      if (shown.count(d))
        out += "  n" + std::to_string(d) + " -> n" + std::to_string(n.id) + " [style=dashed" +
               (opts.color_by == DotColorBy::dep_type ? ", color=gray40" : "") + "];\n";
  }
  return out + "}\n";
}

}  // namespace chakra
