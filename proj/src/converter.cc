#include "chakra/converter.h"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "chakra/error.h"
#include "chakra/graph_kernels.h"
#include "chakra/validate.h"

namespace chakra {

using graph::Index;

namespace {

// Attr keys owned by the converter; everything else on a node passes through.
const std::set<std::string, std::less<>> kDerivedAttrs{
    "origin",          "linked_kind", "stream",     "comm_type",     "comm_group",
    "comm_tag",        "comm_size_bytes", "comm_peer", "tensor_ids", "dep_sync_srcs",
    "dep_merged_types", "sync_kind",  "event_id"};

struct NodeIndex {
  std::vector<const LinkedNode*> nodes;  // ascending id
  std::unordered_map<uint64_t, Index> index;

  Index at(uint64_t id) const { return index.at(id); }
};

NodeIndex index_graph(const LinkedGraph& g) {
  NodeIndex ix;
  ix.nodes.reserve(g.nodes.size());
  for (const auto& n : g.nodes) ix.nodes.push_back(&n);
  std::sort(ix.nodes.begin(), ix.nodes.end(),
            [](const LinkedNode* a, const LinkedNode* b) { return a->id < b->id; });
  ix.index.reserve(ix.nodes.size());
  for (size_t i = 0; i < ix.nodes.size(); ++i)
    if (!ix.index.emplace(ix.nodes[i]->id, static_cast<Index>(i)).second)
      throw Error(ErrorCode::INVALID_TRACE, "DUPLICATE_ID",
                  "linked graph node id " + std::to_string(ix.nodes[i]->id) + " repeats");
  for (const auto& e : g.edges) {
    if (!ix.index.contains(e.src) || !ix.index.contains(e.dst))
      throw Error(ErrorCode::INVALID_TRACE, "DANGLING_DEP",
                  "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                      " references a missing node");
  }
  return ix;
}

graph::Csr csr_of(const NodeIndex& ix, const std::vector<LinkedEdge>& edges) {
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(edges.size());
  for (const auto& e : edges) pairs.emplace_back(ix.at(e.src), ix.at(e.dst));
  return graph::build_csr(ix.nodes.size(), pairs);
}

// Parallel edges between one (src, dst) pair become one edge of the
// strongest type; the absorbed types are recorded in `merged`.
void collapse_parallel(std::vector<LinkedEdge>& edges) {
  dedup_edges(edges);
  std::vector<LinkedEdge> out;
  out.reserve(edges.size());
  size_t i = 0;
  while (i < edges.size()) {
    size_t j = i;
    LinkedEdge best = edges[i];
    uint8_t mask = 0;
    for (; j < edges.size() && edges[j].src == edges[i].src && edges[j].dst == edges[i].dst; ++j) {
      mask |= dep_bit(edges[j].dep_type) | edges[j].merged;
      if (dep_priority(edges[j].dep_type) > dep_priority(best.dep_type)) best.dep_type = edges[j].dep_type;
    }
    best.merged = (j - i > 1 || edges[i].merged) ? mask : 0;
    out.push_back(best);
    i = j;
  }
  edges = std::move(out);
}

// Removes u -> v when u and v sit on one stream segment that is chained by
// consecutive edges and v is not u's immediate successor there.
void drop_stream_implied(const LinkedGraph& g, std::vector<LinkedEdge>& edges) {
  std::map<uint32_t, std::vector<const LinkedNode*>> streams;
  for (const auto& n : g.nodes)
    if (n.origin == Origin::device && n.stream) streams[*n.stream].push_back(&n);
  if (streams.empty()) return;

  std::set<std::pair<uint64_t, uint64_t>> present;
  for (const auto& e : edges) present.emplace(e.src, e.dst);

  struct Slot {
    uint32_t stream;
    size_t pos;
    size_t segment;
  };
  std::unordered_map<uint64_t, Slot> slot;
  size_t segment = 0;
  for (auto& [s, list] : streams) {
    std::sort(list.begin(), list.end(), [](const LinkedNode* a, const LinkedNode* b) {
      return std::make_pair(a->ts.value_or(0), a->id) < std::make_pair(b->ts.value_or(0), b->id);
    });
    for (size_t i = 0; i < list.size(); ++i) {
      if (i == 0 || !present.contains({list[i - 1]->id, list[i]->id})) ++segment;
      slot[list[i]->id] = {s, i, segment};
    }
  }
  std::erase_if(edges, [&](const LinkedEdge& e) {
    auto a = slot.find(e.src), b = slot.find(e.dst);
    if (a == slot.end() || b == slot.end()) return false;
    return a->second.stream == b->second.stream && a->second.segment == b->second.segment &&
           b->second.pos > a->second.pos + 1;
  });
}

void full_reduction(const LinkedGraph& g, std::vector<LinkedEdge>& edges,
                    const ConvertOptions& opts) {
  if (g.nodes.size() > opts.reduction_node_limit)
    throw Error(ErrorCode::GRAPH_TOO_LARGE_FOR_REDUCTION, std::to_string(g.nodes.size()),
                "limit is " + std::to_string(opts.reduction_node_limit) + " nodes");
  NodeIndex ix = index_graph(g);
  graph::Csr csr = csr_of(ix, edges);
  std::vector<char> keep = opts.parallel ? graph::transitive_reduction_parallel(csr)
                                         : graph::transitive_reduction_serial(csr);
  std::erase_if(edges, [&](const LinkedEdge& e) {
    Index u = ix.at(e.src), v = ix.at(e.dst);
    auto row = csr.row(u);
    auto it = std::lower_bound(row.begin(), row.end(), v);
    return !keep[csr.offsets[u] + static_cast<size_t>(it - row.begin())];
  });
}

// Drops host nodes, bridging each device predecessor to every device node it
// reached through host-only paths.
LinkedGraph contract_host(const LinkedGraph& g) {
  NodeIndex ix = index_graph(g);
  graph::Csr csr = csr_of(ix, g.edges);
  auto is_host = [&](Index i) { return ix.nodes[i]->origin == Origin::host; };

  LinkedGraph out;
  out.rank = g.rank;
  out.num_ranks = g.num_ranks;
  out.process_groups = g.process_groups;
  out.warnings = g.warnings;
  for (const auto& n : g.nodes)
    if (n.origin != Origin::host) out.nodes.push_back(n);
  for (const auto& e : g.edges)
    if (!is_host(ix.at(e.src)) && !is_host(ix.at(e.dst))) out.edges.push_back(e);

  std::vector<uint32_t> seen(ix.nodes.size(), 0);
  std::vector<Index> stack;
  for (Index u = 0; u < ix.nodes.size(); ++u) {
    if (is_host(u)) continue;
    const uint32_t stamp = u + 1;
    for (Index h : csr.row(u))
      if (is_host(h) && seen[h] != stamp) {
        seen[h] = stamp;
        stack.push_back(h);
      }
    while (!stack.empty()) {
      Index h = stack.back();
      stack.pop_back();
      for (Index v : csr.row(h)) {
        if (seen[v] == stamp) continue;
        seen[v] = stamp;
        if (is_host(v))
          stack.push_back(v);
        else
          out.edges.push_back({ix.nodes[u]->id, ix.nodes[v]->id, DepType::control});
      }
    }
  }
  return out;
}

NodeType emitted_type(const LinkedNode& n) {
  switch (n.kind) {
    case LinkedKind::memcpy_h2d: return NodeType::MEM_LOAD;
    case LinkedKind::memcpy_d2h: return NodeType::MEM_STORE;
    case LinkedKind::comm:
      if (n.comm && n.comm->attrs.comm_type == CommType::PointToPoint)
        return n.comm->direction == P2PDirection::recv ? NodeType::COMM_RECV : NodeType::COMM_SEND;
      return NodeType::COMM_COLL;
    default: return NodeType::COMP;
  }
}

Json merged_list(uint8_t mask) {
  Json arr = Json::array();
  for (auto d : {DepType::control, DepType::data, DepType::sync})
    if (mask & dep_bit(d)) arr.push_back(std::string(to_string(d)));
  return arr;
}

}  // namespace

std::optional<std::vector<uint64_t>> detect_cycle(const LinkedGraph& g) {
  NodeIndex ix = index_graph(g);
  auto cycle = graph::find_cycle(csr_of(ix, g.edges));
  if (!cycle) return std::nullopt;
  std::vector<uint64_t> ids;
  ids.reserve(cycle->size());
  for (Index i : *cycle) ids.push_back(ix.nodes[i]->id);
  return ids;
}

LinkedGraph prune_redundant_edges(LinkedGraph g, const ConvertOptions& opts) {
  collapse_parallel(g.edges);
  drop_stream_implied(g, g.edges);
  if (opts.full_transitive_reduction) full_reduction(g, g.edges, opts);
  return g;
}

ExecutionTrace convert(const LinkedGraph& input, const std::vector<ProcessGroup>& groups,
                       const ConvertOptions& opts) {
  if (opts.reduction_node_limit == 0)
    throw Error(ErrorCode::INVALID_CONFIG, "reduction_node_limit", "must be positive");
  index_graph(input);
  if (auto cycle = detect_cycle(input)) {
    std::string witness;
    for (uint64_t id : *cycle) witness += (witness.empty() ? "" : ",") + std::to_string(id);
    throw Error(ErrorCode::CYCLE_DETECTED, witness, "", *cycle);
  }

  LinkedGraph g = prune_redundant_edges(input, opts);
  if (!opts.keep_host_ops) g = prune_redundant_edges(contract_host(g), opts);

  NodeIndex ix = index_graph(g);
  std::vector<Index> order = graph::min_index_topo_order(csr_of(ix, g.edges));
  std::vector<uint64_t> new_id(ix.nodes.size());
  for (size_t k = 0; k < order.size(); ++k) new_id[order[k]] = k + 1;

  std::set<uint64_t> group_ids;
  for (const auto& pg : groups) group_ids.insert(pg.id);

  ExecutionTrace t;
  t.rank = g.rank;
  t.num_ranks = g.num_ranks;
  t.process_groups = groups;
  t.nodes.resize(order.size());

  // node index -> incoming edges
  std::vector<std::vector<const LinkedEdge*>> incoming(ix.nodes.size());
  for (const auto& e : g.edges) incoming[ix.at(e.dst)].push_back(&e);

  std::map<uint64_t, TensorDesc> tensors;
  std::map<uint64_t, StorageDesc> storages;
  auto record_buffer = [&](const BufferRef& b, Origin origin) {
    auto [it, fresh] = tensors.try_emplace(b.tensor_id);
    if (fresh) {
      TensorDesc& td = it->second;
      td.id = b.tensor_id;
      td.storage_id = b.storage_id;
      td.storage_offset = b.storage_offset;
      td.shape = b.shape;
      td.stride = contiguous_stride(b.shape);
      td.dtype = b.dtype;
      td.size_bytes = b.size_bytes;
    }
    const TensorDesc& td = it->second;
    uint64_t end = td.storage_offset * dtype_width(td.dtype) +
                   std::max(tensor_extent_bytes(td), td.size_bytes);
    StorageDesc& sd = storages[td.storage_id];
    sd.id = td.storage_id;
    sd.size_bytes = std::max({sd.size_bytes, end, uint64_t{1}});
    if (origin == Origin::device)
      sd.device = "gpu:" + std::to_string(g.rank);
    else if (sd.device.empty())
      sd.device = "cpu";
  };

  for (size_t k = 0; k < order.size(); ++k) {
    const LinkedNode& ln = *ix.nodes[order[k]];
    TraceNode& n = t.nodes[k];
    n.id = k + 1;
    n.name = ln.name;
    n.type = emitted_type(ln);
    n.start_time_micros = ln.ts;
    n.duration_micros = ln.dur;
    for (const auto& [key, v] : ln.attrs)
      if (!kDerivedAttrs.contains(key)) n.attrs[key] = v;
    if (!n.attrs.contains("orig_id")) n.attrs["orig_id"] = ln.id;
    n.attrs["origin"] = std::string(to_string(ln.origin));
    n.attrs["linked_kind"] = std::string(to_string(ln.kind));
    if (ln.stream) n.attrs["stream"] = *ln.stream;
    if (ln.sync_kind) n.attrs["sync_kind"] = std::string(to_string(*ln.sync_kind));
    if (ln.event_id) n.attrs["event_id"] = *ln.event_id;

    if (ln.kind == LinkedKind::comm && ln.comm) {
      const CommAttrs& c = ln.comm->attrs;
      if (n.type == NodeType::COMM_COLL && (!c.comm_group || !group_ids.contains(*c.comm_group)))
        throw Error(ErrorCode::UNKNOWN_GROUP,
                    c.comm_group ? std::to_string(*c.comm_group) : std::string("none"),
                    "comm node " + std::to_string(ln.id) + " references an absent group");
      set_comm_attrs(n, c);
    }

    for (const auto& b : ln.inputs) {
      record_buffer(b, ln.origin);
      n.inputs.push_back(b.tensor_id);
    }
    for (const auto& b : ln.outputs) {
      record_buffer(b, ln.origin);
      n.outputs.push_back(b.tensor_id);
    }

    std::vector<uint64_t> sync_srcs;
    Json merged = Json::array();
    std::vector<const LinkedEdge*>& in = incoming[order[k]];
    std::sort(in.begin(), in.end(), [&](const LinkedEdge* a, const LinkedEdge* b) {
      return new_id[ix.at(a->src)] < new_id[ix.at(b->src)];
    });
    for (const LinkedEdge* e : in) {
      uint64_t src = new_id[ix.at(e->src)];
      if (e->dep_type == DepType::data)
        n.data_deps.push_back(src);
      else
        n.ctrl_deps.push_back(src);
      if (e->dep_type == DepType::sync) sync_srcs.push_back(src);
      if (e->merged) merged.push_back(Json::array({src, merged_list(e->merged)}));
    }
    if (!sync_srcs.empty()) n.attrs["dep_sync_srcs"] = sync_srcs;
    if (!merged.empty()) n.attrs["dep_merged_types"] = std::move(merged);
  }

  for (auto& [id, td] : tensors) t.tensors.push_back(std::move(td));
  for (auto& [id, sd] : storages) t.storages.push_back(std::move(sd));
  canonicalize(t);

  ValidationReport report = validate_trace(t);
  if (!report.ok()) {
    const Issue& e = report.errors.front();
    throw Error(ErrorCode::INVALID_TRACE, std::string(to_string(e.code)),
                e.object + " " + std::to_string(e.id) + ": " + e.message);
  }
  return t;
}

LinkedGraph trace_to_linked(const ExecutionTrace& trace) {
  LinkedGraph g;
  g.rank = trace.rank;
  g.num_ranks = trace.num_ranks;
  g.process_groups = trace.process_groups;

  std::unordered_map<uint64_t, const TensorDesc*> tensors;
  for (const auto& td : trace.tensors) tensors.emplace(td.id, &td);
  auto to_ref = [&](uint64_t tid) {
    BufferRef b;
    b.tensor_id = tid;
    if (auto it = tensors.find(tid); it != tensors.end()) {
      b.storage_id = it->second->storage_id;
      b.storage_offset = it->second->storage_offset;
      b.shape = it->second->shape;
      b.dtype = it->second->dtype;
      b.size_bytes = it->second->size_bytes;
    }
    return b;
  };

  g.nodes.reserve(trace.nodes.size());
  for (const auto& tn : trace.nodes) {
    LinkedNode n;
    n.id = tn.id;
    n.name = tn.name;
    n.ts = tn.start_time_micros;
    n.dur = tn.duration_micros;
    auto str_attr = [&](const char* key) -> std::optional<std::string> {
      auto it = tn.attrs.find(key);
      if (it == tn.attrs.end() || !it->second.is_string()) return std::nullopt;
      return it->second.get<std::string>();
    };
    auto u64_attr = [&](const char* key) -> std::optional<uint64_t> {
      auto it = tn.attrs.find(key);
      if (it == tn.attrs.end() || !it->second.is_number_unsigned()) return std::nullopt;
      return it->second.get<uint64_t>();
    };
    auto origin = str_attr("origin");
    n.origin = (origin ? parse_origin(*origin) : std::nullopt).value_or(Origin::device);
    auto kind_name = str_attr("linked_kind");
    if (auto k = kind_name ? parse_linked_kind(*kind_name) : std::nullopt) {
      n.kind = *k;
    } else {
      switch (tn.type) {
        case NodeType::MEM_LOAD: n.kind = LinkedKind::memcpy_h2d; break;
        case NodeType::MEM_STORE: n.kind = LinkedKind::memcpy_d2h; break;
        case NodeType::COMP: n.kind = n.origin == Origin::host ? LinkedKind::call : LinkedKind::kernel; break;
        default: n.kind = LinkedKind::comm; break;
      }
    }
    if (auto s = u64_attr("stream")) n.stream = static_cast<uint32_t>(*s);
    if (auto sk = str_attr("sync_kind")) n.sync_kind = parse_sync_kind(*sk);
    n.event_id = u64_attr("event_id");
    if (is_comm(tn.type)) {
      if (auto c = comm_attrs(tn)) {
        DeviceComm dc;
        dc.attrs = *c;
        if (tn.type == NodeType::COMM_SEND) dc.direction = P2PDirection::send;
        if (tn.type == NodeType::COMM_RECV) dc.direction = P2PDirection::recv;
        n.comm = std::move(dc);
      }
    }
    for (uint64_t tid : tn.inputs) n.inputs.push_back(to_ref(tid));
    for (uint64_t tid : tn.outputs) n.outputs.push_back(to_ref(tid));
    for (const auto& [key, v] : tn.attrs)
      if (!kDerivedAttrs.contains(key)) n.attrs[key] = v;

    std::set<uint64_t> sync_srcs;
    if (auto it = tn.attrs.find("dep_sync_srcs"); it != tn.attrs.end() && it->second.is_array())
      for (const auto& v : it->second)
        if (v.is_number_unsigned()) sync_srcs.insert(v.get<uint64_t>());
    std::map<uint64_t, uint8_t> merged;
    if (auto it = tn.attrs.find("dep_merged_types"); it != tn.attrs.end() && it->second.is_array())
      for (const auto& entry : it->second) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_unsigned() ||
            !entry[1].is_array())
          continue;
        uint8_t mask = 0;
        for (const auto& d : entry[1])
          if (d.is_string())
            if (auto dt = parse_dep_type(d.get<std::string>())) mask |= dep_bit(*dt);
        merged[entry[0].get<uint64_t>()] = mask;
      }
    auto merged_of = [&](uint64_t src) {
      auto it = merged.find(src);
      return it == merged.end() ? uint8_t{0} : it->second;
    };
    for (uint64_t d : tn.data_deps) g.edges.push_back({d, tn.id, DepType::data, merged_of(d)});
    for (uint64_t d : tn.ctrl_deps)
      g.edges.push_back({d, tn.id, sync_srcs.contains(d) ? DepType::sync : DepType::control,
                         merged_of(d)});
    g.nodes.push_back(std::move(n));
  }
  dedup_edges(g.edges);
  return g;
}

}  // namespace chakra
