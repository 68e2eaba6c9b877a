#include "chakra/trace_io.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "chakra/json_util.h"
#include "chakra/validate.h"

namespace chakra {

using namespace jsonutil;

namespace {

const std::set<std::string, std::less<>> kTopKeys{
    "schema_version", "rank", "num_ranks", "process_groups",
    "tensors", "storages", "nodes"};

const std::set<std::string, std::less<>> kNodeKeys{
    "id", "name", "type", "ctrl_deps", "data_deps", "start_time_micros",
    "duration_micros", "inputs", "outputs", "attrs"};

ProcessGroup parse_group(const Json& j, const std::string& path) {
  expect_object(j, path);
  ProcessGroup g;
  g.id = req_u64(j, "id", path);
  g.ranks = as_u64_list(require(j, "ranks", path), child_path(path, "ranks"));
  return g;
}

StorageDesc parse_storage(const Json& j, const std::string& path) {
  expect_object(j, path);
  StorageDesc s;
  s.id = req_u64(j, "id", path);
  s.size_bytes = req_u64(j, "size_bytes", path);
  s.device = req_string(j, "device", path);
  return s;
}

TensorDesc parse_tensor(const Json& j, const std::string& path) {
  expect_object(j, path);
  TensorDesc t;
  t.id = req_u64(j, "id", path);
  t.storage_id = req_u64(j, "storage_id", path);
  t.storage_offset = opt_u64(j, "storage_offset", path).value_or(0);
  t.shape = as_i64_list(require(j, "shape", path), child_path(path, "shape"));
  if (const Json* s = find(j, "stride"))
    t.stride = as_i64_list(*s, child_path(path, "stride"));
  else
    t.stride = contiguous_stride(t.shape);
  std::string dt = req_string(j, "dtype", path);
  auto dtype = parse_dtype(dt);
  if (!dtype) throw Error(ErrorCode::TYPE_MISMATCH, child_path(path, "dtype"),
                          "unknown dtype '" + dt + "'");
  t.dtype = *dtype;
  t.size_bytes = req_u64(j, "size_bytes", path);
  return t;
}

TraceNode parse_node(const Json& j, const std::string& path) {
  expect_object(j, path);
  TraceNode n;
  n.id = req_u64(j, "id", path);
  n.name = req_string(j, "name", path);
  std::string type = req_string(j, "type", path);
  auto t = parse_node_type(type);
  if (!t) throw Error(ErrorCode::UNKNOWN_NODE_TYPE, type);
  n.type = *t;
  n.ctrl_deps = opt_u64_list(j, "ctrl_deps", path);
  n.data_deps = opt_u64_list(j, "data_deps", path);
  n.start_time_micros = opt_u64(j, "start_time_micros", path);
  n.duration_micros = opt_u64(j, "duration_micros", path);
  n.inputs = opt_u64_list(j, "inputs", path);
  n.outputs = opt_u64_list(j, "outputs", path);
  if (const Json* attrs = find(j, "attrs")) {
    expect_object(*attrs, child_path(path, "attrs"));
    for (auto it = attrs->begin(); it != attrs->end(); ++it)
      n.attrs.emplace(it.key(), it.value());
  }
  // Forward compatibility: unknown keys ride along in attrs. An explicit
  // attrs entry of the same name takes precedence.
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kNodeKeys.contains(it.key())) n.attrs.emplace(it.key(), it.value());
  return n;
}

template <typename T, typename F>
std::vector<T> parse_list(const Json& doc, std::string_view key, F&& f) {
  std::vector<T> out;
  const Json* arr = find(doc, key);
  if (arr == nullptr) return out;
  std::string path(key);
  expect_array(*arr, path);
  out.reserve(arr->size());
  for (size_t i = 0; i < arr->size(); ++i) out.push_back(f((*arr)[i], index_path(path, i)));
  return out;
}

void dump_to(std::string& out, const Json& j) {
  out += j.dump(-1, ' ', false, Json::error_handler_t::strict);
}

Json node_to_json(const TraceNode& n) {
  Json j = Json::object();
  Json attrs = Json::object();
  for (const auto& [k, v] : n.attrs) attrs[k] = v;
  j["attrs"] = std::move(attrs);
  std::vector<uint64_t> ctrl = n.ctrl_deps, data = n.data_deps;
  sort_unique(ctrl);
  sort_unique(data);
  j["ctrl_deps"] = ctrl;
  j["data_deps"] = data;
  if (n.duration_micros) j["duration_micros"] = *n.duration_micros;
  j["id"] = n.id;
  j["inputs"] = n.inputs;
  j["name"] = n.name;
  j["outputs"] = n.outputs;
  if (n.start_time_micros) j["start_time_micros"] = *n.start_time_micros;
  j["type"] = std::string(to_string(n.type));
  return j;
}

Json tensor_to_json(const TensorDesc& t) {
  return Json{{"dtype", std::string(to_string(t.dtype))},
              {"id", t.id},
              {"shape", t.shape},
              {"size_bytes", t.size_bytes},
              {"storage_id", t.storage_id},
              {"storage_offset", t.storage_offset},
              {"stride", t.stride}};
}

Json storage_to_json(const StorageDesc& s) {
  return Json{{"device", s.device}, {"id", s.id}, {"size_bytes", s.size_bytes}};
}

Json group_to_json(const ProcessGroup& g) {
  std::vector<uint64_t> ranks = g.ranks;
  sort_unique(ranks);
  return Json{{"id", g.id}, {"ranks", ranks}};
}

template <typename T, typename F>
void write_array(std::string& out, const std::vector<T>& items, F&& to_json) {
  std::vector<const T*> sorted;
  sorted.reserve(items.size());
  for (const auto& it : items) sorted.push_back(&it);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const T* a, const T* b) { return a->id < b->id; });
  out += '[';
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i) out += ',';
    dump_to(out, to_json(*sorted[i]));
  }
  out += ']';
}

}  // namespace

ExecutionTrace parse_trace(std::string_view bytes) {
  Json doc = parse_document(bytes);
  expect_object(doc, "");
  ExecutionTrace t;
  t.schema_version = req_string(doc, "schema_version", "");
  t.rank = req_u64(doc, "rank", "");
  t.num_ranks = req_u64(doc, "num_ranks", "");
  t.process_groups = parse_list<ProcessGroup>(doc, "process_groups", parse_group);
  t.tensors = parse_list<TensorDesc>(doc, "tensors", parse_tensor);
  t.storages = parse_list<StorageDesc>(doc, "storages", parse_storage);
  require(doc, "nodes", "");
  t.nodes = parse_list<TraceNode>(doc, "nodes", parse_node);
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!kTopKeys.contains(it.key())) t.extra.emplace(it.key(), it.value());
  return t;
}

std::string serialize_trace_unchecked(const ExecutionTrace& t) {
  // Assembled by hand so that huge traces never materialize as one DOM.
  using Writer = std::function<void(std::string&)>;
  std::map<std::string, Writer> fields;
  for (const auto& [k, v] : t.extra) {
    if (kTopKeys.contains(k)) continue;
    fields[k] = [&v](std::string& out) { dump_to(out, v); };
  }
  fields["nodes"] = [&](std::string& out) { write_array(out, t.nodes, node_to_json); };
  fields["num_ranks"] = [&](std::string& out) { out += std::to_string(t.num_ranks); };
  fields["process_groups"] = [&](std::string& out) {
    write_array(out, t.process_groups, group_to_json);
  };
  fields["rank"] = [&](std::string& out) { out += std::to_string(t.rank); };
  fields["schema_version"] = [&](std::string& out) { dump_to(out, Json(t.schema_version)); };
  fields["storages"] = [&](std::string& out) { write_array(out, t.storages, storage_to_json); };
  fields["tensors"] = [&](std::string& out) { write_array(out, t.tensors, tensor_to_json); };

  std::string out;
  out.reserve(256 + t.nodes.size() * 160);
  out += '{';
  bool first = true;
  for (const auto& [key, write] : fields) {
    if (!first) out += ',';
    first = false;
    dump_to(out, Json(key));
    out += ':';
    write(out);
  }
  out += "}\n";
  return out;
}

std::string serialize_trace(const ExecutionTrace& trace) {
  ValidationReport report = validate_trace(trace);
  if (!report.ok()) {
    const auto& e = report.errors.front();
    throw Error(ErrorCode::INVALID_TRACE, std::string(to_string(e.code)),
                std::to_string(report.errors.size()) + " validation error(s); first: " +
                    e.message);
  }
  return serialize_trace_unchecked(trace);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IO_ERROR, path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IO_ERROR, path, "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IO_ERROR, path, "write failed");
}

ExecutionTrace read_trace_file(const std::string& path) {
  return parse_trace(read_file(path));
}

void write_trace_file(const std::string& path, const ExecutionTrace& trace) {
  write_file(path, serialize_trace(trace));
}

}  // namespace chakra
