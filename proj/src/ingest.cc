#include "chakra/ingest.h"

#include <algorithm>
#include <numeric>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "chakra/json_util.h"

namespace chakra {

using namespace jsonutil;

std::string_view to_string(HostOpKind k) {
  switch (k) {
    case HostOpKind::call: return "call";
    case HostOpKind::kernel_launch: return "kernel_launch";
    case HostOpKind::sync: return "sync";
  }
  return "?";
}

std::string_view to_string(SyncKind k) {
  switch (k) {
    case SyncKind::device: return "device";
    case SyncKind::stream: return "stream";
    case SyncKind::event_record: return "event_record";
    case SyncKind::event_wait: return "event_wait";
  }
  return "?";
}

std::string_view to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::kernel: return "kernel";
    case DeviceKind::memcpy_h2d: return "memcpy_h2d";
    case DeviceKind::memcpy_d2h: return "memcpy_d2h";
    case DeviceKind::comm: return "comm";
  }
  return "?";
}

std::string_view to_string(P2PDirection d) {
  return d == P2PDirection::send ? "send" : "recv";
}

std::optional<HostOpKind> parse_host_op_kind(std::string_view s) {
  if (s == "call") return HostOpKind::call;
  if (s == "kernel_launch") return HostOpKind::kernel_launch;
  if (s == "sync") return HostOpKind::sync;
  return std::nullopt;
}

std::optional<SyncKind> parse_sync_kind(std::string_view s) {
  if (s == "device") return SyncKind::device;
  if (s == "stream") return SyncKind::stream;
  if (s == "event_record") return SyncKind::event_record;
  if (s == "event_wait") return SyncKind::event_wait;
  return std::nullopt;
}

std::optional<DeviceKind> parse_device_kind(std::string_view s) {
  if (s == "kernel") return DeviceKind::kernel;
  if (s == "memcpy_h2d") return DeviceKind::memcpy_h2d;
  if (s == "memcpy_d2h") return DeviceKind::memcpy_d2h;
  if (s == "comm") return DeviceKind::comm;
  return std::nullopt;
}

std::optional<P2PDirection> parse_p2p_direction(std::string_view s) {
  if (s == "send") return P2PDirection::send;
  if (s == "recv") return P2PDirection::recv;
  return std::nullopt;
}

namespace {

template <typename E, typename F>
E req_enum(const Json& obj, std::string_view key, std::string_view path, F&& parse) {
  std::string s = req_string(obj, key, path);
  auto v = parse(s);
  if (!v) throw Error(ErrorCode::TYPE_MISMATCH, child_path(path, key), "unknown value '" + s + "'");
  return *v;
}

BufferRef parse_buffer(const Json& j, const std::string& path) {
  expect_object(j, path);
  BufferRef b;
  b.tensor_id = req_u64(j, "tensor_id", path);
  b.storage_id = req_u64(j, "storage_id", path);
  b.storage_offset = opt_u64(j, "storage_offset", path).value_or(0);
  if (const Json* shape = find(j, "shape")) b.shape = as_i64_list(*shape, child_path(path, "shape"));
  if (find(j, "dtype")) b.dtype = req_enum<DType>(j, "dtype", path, parse_dtype);
  b.size_bytes = req_u64(j, "size_bytes", path);
  return b;
}

std::vector<BufferRef> parse_buffers(const Json& obj, std::string_view key,
                                     const std::string& path) {
  std::vector<BufferRef> out;
  const Json* arr = find(obj, key);
  if (arr == nullptr) return out;
  std::string p = child_path(path, key);
  expect_array(*arr, p);
  for (size_t i = 0; i < arr->size(); ++i) out.push_back(parse_buffer((*arr)[i], index_path(p, i)));
  return out;
}

Json buffer_to_json(const BufferRef& b) {
  return Json{{"dtype", std::string(to_string(b.dtype))},
              {"shape", b.shape},
              {"size_bytes", b.size_bytes},
              {"storage_id", b.storage_id},
              {"storage_offset", b.storage_offset},
              {"tensor_id", b.tensor_id}};
}

Json buffers_to_json(const std::vector<BufferRef>& bs) {
  Json arr = Json::array();
  for (const auto& b : bs) arr.push_back(buffer_to_json(b));
  return arr;
}

DeviceComm parse_device_comm(const Json& j, const std::string& path) {
  expect_object(j, path);
  DeviceComm c;
  c.attrs.comm_type = req_enum<CommType>(j, "comm_type", path, parse_comm_type);
  c.attrs.comm_group = opt_u64(j, "comm_group", path);
  c.attrs.comm_tag = opt_string(j, "comm_tag", path);
  c.attrs.comm_size_bytes = req_u64(j, "comm_size_bytes", path);
  c.attrs.comm_peer = opt_u64(j, "comm_peer", path);
  c.attrs.tensor_ids = opt_u64_list(j, "tensor_ids", path);
  if (find(j, "direction"))
    c.direction = req_enum<P2PDirection>(j, "direction", path, parse_p2p_direction);
  if (c.attrs.comm_type == CommType::PointToPoint) {
    if (!c.direction) throw Error(ErrorCode::MISSING_FIELD, child_path(path, "direction"));
    if (!c.attrs.comm_peer) throw Error(ErrorCode::MISSING_FIELD, child_path(path, "comm_peer"));
  } else if (!c.attrs.comm_group) {
    throw Error(ErrorCode::MISSING_FIELD, child_path(path, "comm_group"));
  }
  return c;
}

Json device_comm_to_json(const DeviceComm& c) {
  Json j = Json::object();
  j["comm_type"] = std::string(to_string(c.attrs.comm_type));
  j["comm_size_bytes"] = c.attrs.comm_size_bytes;
  if (c.attrs.comm_group) j["comm_group"] = *c.attrs.comm_group;
  if (c.attrs.comm_tag) j["comm_tag"] = *c.attrs.comm_tag;
  if (c.attrs.comm_peer) j["comm_peer"] = *c.attrs.comm_peer;
  if (!c.attrs.tensor_ids.empty()) j["tensor_ids"] = c.attrs.tensor_ids;
  if (c.direction) j["direction"] = std::string(to_string(*c.direction));
  return j;
}

ProcessGroup parse_group(const Json& j, const std::string& path) {
  expect_object(j, path);
  ProcessGroup g;
  g.id = req_u64(j, "id", path);
  g.ranks = as_u64_list(require(j, "ranks", path), child_path(path, "ranks"));
  return g;
}

void validate_call_stacks(const std::vector<HostOp>& ops) {
  std::unordered_map<uint64_t, const HostOp*> by_id;
  for (const auto& op : ops)
    if (!by_id.emplace(op.id, &op).second)
      throw Error(ErrorCode::DUPLICATE_ID, std::to_string(op.id), "duplicate host op id");
  for (const auto& op : ops) {
    if (!op.parent) continue;
    if (*op.parent == op.id)
      throw Error(ErrorCode::DANGLING_PARENT, std::to_string(op.id), "op is its own parent");
    if (!by_id.contains(*op.parent))
      throw Error(ErrorCode::DANGLING_PARENT, std::to_string(op.id),
                  "parent " + std::to_string(*op.parent) + " does not exist");
  }
  // Parent chains must terminate: walk each chain with a step budget.
  std::unordered_map<uint64_t, uint8_t> state;  // 1 = on path, 2 = known rooted
  for (const auto& op : ops) {
    std::vector<uint64_t> path;
    const HostOp* cur = &op;
    while (cur != nullptr && state[cur->id] == 0) {
      state[cur->id] = 1;
      path.push_back(cur->id);
      cur = cur->parent ? by_id[*cur->parent] : nullptr;
    }
    if (cur != nullptr && state[cur->id] == 1)
      throw Error(ErrorCode::DANGLING_PARENT, std::to_string(cur->id), "call-stack parents form a cycle");
    for (uint64_t id : path) state[id] = 2;
  }
}

}  // namespace

HostTrace parse_host_trace(std::string_view bytes) {
  Json doc = parse_document(bytes);
  expect_object(doc, "");
  HostTrace t;
  t.rank = req_u64(doc, "rank", "");
  t.num_ranks = opt_u64(doc, "num_ranks", "").value_or(t.rank + 1);
  if (const Json* groups = find(doc, "process_groups")) {
    expect_array(*groups, "process_groups");
    for (size_t i = 0; i < groups->size(); ++i)
      t.process_groups.push_back(parse_group((*groups)[i], index_path("process_groups", i)));
  }
  const Json& ops = require(doc, "ops", "");
  expect_array(ops, "ops");
  t.ops.reserve(ops.size());
  for (size_t i = 0; i < ops.size(); ++i) {
    std::string path = index_path("ops", i);
    const Json& j = ops[i];
    expect_object(j, path);
    HostOp op;
    op.id = req_u64(j, "id", path);
    op.name = req_string(j, "name", path);
    op.parent = opt_u64(j, "parent", path);
    op.kind = req_enum<HostOpKind>(j, "kind", path, parse_host_op_kind);
    op.rf_id = opt_u64(j, "rf_id", path);
    if (find(j, "sync_kind")) op.sync_kind = req_enum<SyncKind>(j, "sync_kind", path, parse_sync_kind);
    if (auto s = opt_u64(j, "stream", path)) op.stream = static_cast<uint32_t>(*s);
    op.event_id = opt_u64(j, "event_id", path);
    op.ts = req_u64(j, "ts", path);
    op.dur = req_u64(j, "dur", path);
    op.inputs = parse_buffers(j, "inputs", path);
    op.outputs = parse_buffers(j, "outputs", path);

    if (op.kind == HostOpKind::kernel_launch && !op.rf_id)
      throw Error(ErrorCode::MISSING_FIELD, child_path(path, "rf_id"));
    if (op.kind == HostOpKind::sync) {
      if (!op.sync_kind) throw Error(ErrorCode::MISSING_FIELD, child_path(path, "sync_kind"));
      bool needs_stream = *op.sync_kind != SyncKind::device;
      bool needs_event = *op.sync_kind == SyncKind::event_record ||
                         *op.sync_kind == SyncKind::event_wait;
      if (needs_stream && !op.stream) throw Error(ErrorCode::MISSING_FIELD, child_path(path, "stream"));
      if (needs_event && !op.event_id) throw Error(ErrorCode::MISSING_FIELD, child_path(path, "event_id"));
    }
    t.ops.push_back(std::move(op));
  }
  validate_call_stacks(t.ops);
  return t;
}

DeviceTrace parse_device_trace(std::string_view bytes) {
  Json doc = parse_document(bytes);
  expect_object(doc, "");
  DeviceTrace t;
  t.rank = req_u64(doc, "rank", "");
  const Json& events = require(doc, "events", "");
  expect_array(events, "events");
  t.events.reserve(events.size());
  for (size_t i = 0; i < events.size(); ++i) {
    std::string path = index_path("events", i);
    const Json& j = events[i];
    expect_object(j, path);
    DeviceEvent e;
    e.correlation = req_u64(j, "correlation", path);
    e.name = req_string(j, "name", path);
    e.stream = static_cast<uint32_t>(req_u64(j, "stream", path));
    e.ts = req_u64(j, "ts", path);
    e.dur = req_u64(j, "dur", path);
    e.kind = req_enum<DeviceKind>(j, "kind", path, parse_device_kind);
    if (const Json* c = find(j, "comm")) e.comm = parse_device_comm(*c, child_path(path, "comm"));
    if (e.kind == DeviceKind::comm && !e.comm)
      throw Error(ErrorCode::MISSING_FIELD, child_path(path, "comm"));
    e.inputs = parse_buffers(j, "inputs", path);
    e.outputs = parse_buffers(j, "outputs", path);
    t.events.push_back(std::move(e));
  }
  return t;
}

std::string serialize_host_trace(const HostTrace& t) {
  Json ops = Json::array();
  for (const auto& op : t.ops) {
    Json j = Json::object();
    j["id"] = op.id;
    j["name"] = op.name;
    j["kind"] = std::string(to_string(op.kind));
    if (op.parent) j["parent"] = *op.parent;
    if (op.rf_id) j["rf_id"] = *op.rf_id;
    if (op.sync_kind) j["sync_kind"] = std::string(to_string(*op.sync_kind));
    if (op.stream) j["stream"] = *op.stream;
    if (op.event_id) j["event_id"] = *op.event_id;
    j["ts"] = op.ts;
    j["dur"] = op.dur;
    if (!op.inputs.empty()) j["inputs"] = buffers_to_json(op.inputs);
    if (!op.outputs.empty()) j["outputs"] = buffers_to_json(op.outputs);
    ops.push_back(std::move(j));
  }
  Json groups = Json::array();
  for (const auto& g : t.process_groups) groups.push_back(Json{{"id", g.id}, {"ranks", g.ranks}});
  Json doc = {{"rank", t.rank}, {"num_ranks", t.num_ranks},
              {"process_groups", std::move(groups)}, {"ops", std::move(ops)}};
  return doc.dump() + "\n";
}

std::string serialize_device_trace(const DeviceTrace& t) {
  Json events = Json::array();
  for (const auto& e : t.events) {
    Json j = Json::object();
    j["correlation"] = e.correlation;
    j["name"] = e.name;
    j["stream"] = e.stream;
    j["ts"] = e.ts;
    j["dur"] = e.dur;
    j["kind"] = std::string(to_string(e.kind));
    if (e.comm) j["comm"] = device_comm_to_json(*e.comm);
    if (!e.inputs.empty()) j["inputs"] = buffers_to_json(e.inputs);
    if (!e.outputs.empty()) j["outputs"] = buffers_to_json(e.outputs);
    events.push_back(std::move(j));
  }
  Json doc = {{"rank", t.rank}, {"events", std::move(events)}};
  return doc.dump() + "\n";
}

std::vector<uint64_t> assign_device_ids(const HostTrace& host, const DeviceTrace& device) {
  uint64_t base = 1;
  for (const auto& op : host.ops) base = std::max(base, op.id + 1);
  std::vector<size_t> order(device.events.size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto key = [&](size_t i) {
    const auto& e = device.events[i];
    return std::tie(e.ts, e.stream, e.correlation, e.kind, e.name, e.dur);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return key(a) < key(b); });
  std::vector<uint64_t> ids(device.events.size());
  for (size_t k = 0; k < order.size(); ++k) ids[order[k]] = base + k;
  return ids;
}

CorrelationMap correlate(const HostTrace& host, const DeviceTrace& device) {
  CorrelationMap out;
  std::unordered_map<uint64_t, uint64_t> launch_by_rf;
  for (const auto& op : host.ops) {
    if (op.kind != HostOpKind::kernel_launch) continue;
    if (!launch_by_rf.emplace(*op.rf_id, op.id).second)
      throw Error(ErrorCode::DUPLICATE_RF_ID, std::to_string(*op.rf_id),
                  "launches " + std::to_string(launch_by_rf[*op.rf_id]) + " and " +
                      std::to_string(op.id) + " share an rf_id");
  }

  std::vector<uint64_t> ids = assign_device_ids(host, device);
  for (size_t i = 0; i < device.events.size(); ++i) {
    uint64_t corr = device.events[i].correlation;
    auto it = launch_by_rf.find(corr);
    if (it == launch_by_rf.end()) {
      out.orphans_device.push_back({corr, ids[i]});
      continue;
    }
    auto& match = out.pairs[corr];
    match.host_op = it->second;
    match.device_events.push_back(ids[i]);
  }
  for (auto& [rf, match] : out.pairs) std::sort(match.device_events.begin(), match.device_events.end());
  std::sort(out.orphans_device.begin(), out.orphans_device.end());

  for (const auto& [rf, op_id] : launch_by_rf)
    if (!out.pairs.contains(rf)) out.orphans_host.push_back(op_id);
  std::sort(out.orphans_host.begin(), out.orphans_host.end());
  for (uint64_t op_id : out.orphans_host)
    out.warnings.push_back("launch " + std::to_string(op_id) + " has no device event");
  return out;
}

}  // namespace chakra
