#include <algorithm>

#include "chakra/json_util.h"
#include "chakra/linker.h"

namespace chakra {

using namespace jsonutil;

namespace {

Json buffers_json(const std::vector<BufferRef>& bs) {
  Json arr = Json::array();
  for (const auto& b : bs)
    arr.push_back(Json{{"dtype", std::string(to_string(b.dtype))},
                       {"shape", b.shape},
                       {"size_bytes", b.size_bytes},
                       {"storage_id", b.storage_id},
                       {"storage_offset", b.storage_offset},
                       {"tensor_id", b.tensor_id}});
  return arr;
}

std::vector<BufferRef> parse_buffers(const Json& obj, std::string_view key,
                                     const std::string& path) {
  std::vector<BufferRef> out;
  const Json* arr = find(obj, key);
  if (arr == nullptr) return out;
  std::string p = child_path(path, key);
  expect_array(*arr, p);
  for (size_t i = 0; i < arr->size(); ++i) {
    const Json& j = (*arr)[i];
    std::string bp = index_path(p, i);
    expect_object(j, bp);
    BufferRef b;
    b.tensor_id = req_u64(j, "tensor_id", bp);
    b.storage_id = req_u64(j, "storage_id", bp);
    b.storage_offset = opt_u64(j, "storage_offset", bp).value_or(0);
    if (const Json* s = find(j, "shape")) b.shape = as_i64_list(*s, child_path(bp, "shape"));
    if (auto dt = opt_string(j, "dtype", bp)) {
      auto parsed = parse_dtype(*dt);
      if (!parsed) throw Error(ErrorCode::TYPE_MISMATCH, child_path(bp, "dtype"));
      b.dtype = *parsed;
    }
    b.size_bytes = req_u64(j, "size_bytes", bp);
    out.push_back(std::move(b));
  }
  return out;
}

template <typename E, typename F>
E req_enum(const Json& obj, std::string_view key, std::string_view path, F&& parse) {
  std::string s = req_string(obj, key, path);
  auto v = parse(s);
  if (!v) throw Error(ErrorCode::TYPE_MISMATCH, child_path(path, key), "unknown value '" + s + "'");
  return *v;
}

Json merged_json(uint8_t mask) {
  Json arr = Json::array();
  for (auto d : {DepType::control, DepType::data, DepType::sync})
    if (mask & dep_bit(d)) arr.push_back(std::string(to_string(d)));
  return arr;
}

}  // namespace

std::string serialize_linked(const LinkedGraph& g) {
  std::vector<const LinkedNode*> nodes;
  for (const auto& n : g.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(),
            [](const LinkedNode* a, const LinkedNode* b) { return a->id < b->id; });
  std::vector<LinkedEdge> edges = g.edges;
  dedup_edges(edges);

  Json jn = Json::array();
  for (const LinkedNode* n : nodes) {
    Json j = Json::object();
    j["id"] = n->id;
    j["origin"] = std::string(to_string(n->origin));
    j["name"] = n->name;
    j["kind"] = std::string(to_string(n->kind));
    if (n->stream) j["stream"] = *n->stream;
    if (n->ts) j["ts"] = *n->ts;
    if (n->dur) j["dur"] = *n->dur;
    j["inputs"] = buffers_json(n->inputs);
    j["outputs"] = buffers_json(n->outputs);
    if (n->comm) {
      Json c = Json::object();
      c["comm_type"] = std::string(to_string(n->comm->attrs.comm_type));
      c["comm_size_bytes"] = n->comm->attrs.comm_size_bytes;
      if (n->comm->attrs.comm_group) c["comm_group"] = *n->comm->attrs.comm_group;
      if (n->comm->attrs.comm_tag) c["comm_tag"] = *n->comm->attrs.comm_tag;
      if (n->comm->attrs.comm_peer) c["comm_peer"] = *n->comm->attrs.comm_peer;
      if (!n->comm->attrs.tensor_ids.empty()) c["tensor_ids"] = n->comm->attrs.tensor_ids;
      if (n->comm->direction) c["direction"] = std::string(to_string(*n->comm->direction));
      j["comm"] = std::move(c);
    }
    if (n->sync_kind) j["sync_kind"] = std::string(to_string(*n->sync_kind));
    if (n->event_id) j["event_id"] = *n->event_id;
    if (n->parent) j["parent"] = *n->parent;
    if (n->launch) j["launch"] = *n->launch;
    if (!n->attrs.empty()) j["attrs"] = Json(n->attrs);
    jn.push_back(std::move(j));
  }
  Json je = Json::array();
  for (const auto& e : edges) {
    Json j = {{"src", e.src}, {"dst", e.dst}, {"dep_type", std::string(to_string(e.dep_type))}};
    if (e.merged) j["merged"] = merged_json(e.merged);
    je.push_back(std::move(j));
  }
  Json groups = Json::array();
  for (const auto& pg : g.process_groups) groups.push_back(Json{{"id", pg.id}, {"ranks", pg.ranks}});
  Json doc = {{"rank", g.rank},           {"num_ranks", g.num_ranks},
              {"process_groups", groups}, {"nodes", std::move(jn)},
              {"edges", std::move(je)},   {"warnings", g.warnings}};
  return doc.dump() + "\n";
}

LinkedGraph parse_linked(std::string_view bytes) {
  Json doc = parse_document(bytes);
  expect_object(doc, "");
  LinkedGraph g;
  g.rank = opt_u64(doc, "rank", "").value_or(0);
  g.num_ranks = opt_u64(doc, "num_ranks", "").value_or(g.rank + 1);
  if (const Json* groups = find(doc, "process_groups")) {
    expect_array(*groups, "process_groups");
    for (size_t i = 0; i < groups->size(); ++i) {
      std::string p = index_path("process_groups", i);
      ProcessGroup pg;
      pg.id = req_u64((*groups)[i], "id", p);
      pg.ranks = as_u64_list(require((*groups)[i], "ranks", p), child_path(p, "ranks"));
      g.process_groups.push_back(std::move(pg));
    }
  }
  const Json& nodes = require(doc, "nodes", "");
  expect_array(nodes, "nodes");
  for (size_t i = 0; i < nodes.size(); ++i) {
    std::string p = index_path("nodes", i);
    const Json& j = nodes[i];
    expect_object(j, p);
    LinkedNode n;
    n.id = req_u64(j, "id", p);
    n.origin = req_enum<Origin>(j, "origin", p, parse_origin);
    n.name = req_string(j, "name", p);
    n.kind = req_enum<LinkedKind>(j, "kind", p, parse_linked_kind);
    if (auto s = opt_u64(j, "stream", p)) n.stream = static_cast<uint32_t>(*s);
    n.ts = opt_u64(j, "ts", p);
    n.dur = opt_u64(j, "dur", p);
    n.inputs = parse_buffers(j, "inputs", p);
    n.outputs = parse_buffers(j, "outputs", p);
    if (const Json* c = find(j, "comm")) {
      std::string cp = child_path(p, "comm");
      expect_object(*c, cp);
      DeviceComm dc;
      dc.attrs.comm_type = req_enum<CommType>(*c, "comm_type", cp, parse_comm_type);
      dc.attrs.comm_size_bytes = req_u64(*c, "comm_size_bytes", cp);
      dc.attrs.comm_group = opt_u64(*c, "comm_group", cp);
      dc.attrs.comm_tag = opt_string(*c, "comm_tag", cp);
      dc.attrs.comm_peer = opt_u64(*c, "comm_peer", cp);
      dc.attrs.tensor_ids = opt_u64_list(*c, "tensor_ids", cp);
      if (find(*c, "direction"))
        dc.direction = req_enum<P2PDirection>(*c, "direction", cp, parse_p2p_direction);
      n.comm = std::move(dc);
    }
    if (find(j, "sync_kind")) n.sync_kind = req_enum<SyncKind>(j, "sync_kind", p, parse_sync_kind);
    n.event_id = opt_u64(j, "event_id", p);
    n.parent = opt_u64(j, "parent", p);
    n.launch = opt_u64(j, "launch", p);
    if (const Json* a = find(j, "attrs")) {
      expect_object(*a, child_path(p, "attrs"));
      for (auto it = a->begin(); it != a->end(); ++it) n.attrs.emplace(it.key(), it.value());
    }
    g.nodes.push_back(std::move(n));
  }
  const Json& edges = require(doc, "edges", "");
  expect_array(edges, "edges");
  for (size_t i = 0; i < edges.size(); ++i) {
    std::string p = index_path("edges", i);
    const Json& j = edges[i];
    expect_object(j, p);
    LinkedEdge e;
    e.src = req_u64(j, "src", p);
    e.dst = req_u64(j, "dst", p);
    e.dep_type = req_enum<DepType>(j, "dep_type", p, parse_dep_type);
    if (const Json* m = find(j, "merged")) {
      expect_array(*m, child_path(p, "merged"));
      for (size_t k = 0; k < m->size(); ++k) {
        auto d = parse_dep_type(as_string((*m)[k], index_path(child_path(p, "merged"), k)));
        if (!d) throw Error(ErrorCode::TYPE_MISMATCH, index_path(child_path(p, "merged"), k));
        e.merged |= dep_bit(*d);
      }
    }
    g.edges.push_back(e);
  }
  if (const Json* w = find(doc, "warnings")) {
    expect_array(*w, "warnings");
    for (size_t i = 0; i < w->size(); ++i) g.warnings.push_back(as_string((*w)[i], index_path("warnings", i)));
  }
  return g;
}

}  // namespace chakra
