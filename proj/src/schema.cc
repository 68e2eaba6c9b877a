#include "chakra/schema.h"

#include <algorithm>
#include <array>
#include <utility>

namespace chakra {

namespace {

constexpr std::array<std::pair<NodeType, std::string_view>, 6> kNodeTypes{{
    {NodeType::COMP, "COMP"},
    {NodeType::MEM_LOAD, "MEM_LOAD"},
    {NodeType::MEM_STORE, "MEM_STORE"},
    {NodeType::COMM_COLL, "COMM_COLL"},
    {NodeType::COMM_SEND, "COMM_SEND"},
    {NodeType::COMM_RECV, "COMM_RECV"},
}};

constexpr std::array<std::pair<CommType, std::string_view>, 7> kCommTypes{{
    {CommType::AllReduce, "AllReduce"},
    {CommType::AllGather, "AllGather"},
    {CommType::ReduceScatter, "ReduceScatter"},
    {CommType::Broadcast, "Broadcast"},
    {CommType::PointToPoint, "PointToPoint"},
    {CommType::All2All, "All2All"},
    {CommType::Barrier, "Barrier"},
}};

constexpr std::array<std::pair<DType, std::string_view>, 6> kDTypes{{
    {DType::fp16, "fp16"},
    {DType::bf16, "bf16"},
    {DType::fp32, "fp32"},
    {DType::int8, "int8"},
    {DType::int32, "int32"},
    {DType::int64, "int64"},
}};

template <typename Table, typename E>
std::string_view lookup_name(const Table& table, E value) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "?";
}

template <typename E, typename Table>
std::optional<E> lookup_value(const Table& table, std::string_view s) {
  for (const auto& [v, name] : table)
    if (name == s) return v;
  return std::nullopt;
}

template <typename T>
void sort_by_id(std::vector<T>& v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const T& a, const T& b) { return a.id < b.id; });
}

}  // namespace

std::string_view to_string(NodeType t) { return lookup_name(kNodeTypes, t); }
std::string_view to_string(CommType t) { return lookup_name(kCommTypes, t); }
std::string_view to_string(DType t) { return lookup_name(kDTypes, t); }

std::optional<NodeType> parse_node_type(std::string_view s) {
  return lookup_value<NodeType>(kNodeTypes, s);
}
std::optional<CommType> parse_comm_type(std::string_view s) {
  return lookup_value<CommType>(kCommTypes, s);
}
std::optional<DType> parse_dtype(std::string_view s) {
  return lookup_value<DType>(kDTypes, s);
}

uint64_t tensor_extent_bytes(const TensorDesc& t) {
  if (t.shape.empty()) return dtype_width(t.dtype);  // scalar
  int64_t span = 1;
  for (size_t i = 0; i < t.shape.size(); ++i) {
    if (t.shape[i] <= 0) return 0;
    int64_t stride = i < t.stride.size() ? t.stride[i] : 0;
    span += (t.shape[i] - 1) * (stride < 0 ? -stride : stride);
  }
  return static_cast<uint64_t>(span) * dtype_width(t.dtype);
}

std::vector<int64_t> contiguous_stride(const std::vector<int64_t>& shape) {
  std::vector<int64_t> stride(shape.size(), 1);
  for (size_t i = shape.size(); i-- > 1;)
    stride[i - 1] = stride[i] * std::max<int64_t>(shape[i], 1);
  return stride;
}

std::optional<CommAttrs> comm_attrs(const TraceNode& node) {
  auto get_u64 = [&](const char* key) -> std::optional<uint64_t> {
    auto it = node.attrs.find(key);
    if (it == node.attrs.end() || !it->second.is_number_unsigned())
      return std::nullopt;
    return it->second.get<uint64_t>();
  };
  auto type_it = node.attrs.find("comm_type");
  if (type_it == node.attrs.end() || !type_it->second.is_string())
    return std::nullopt;
  auto type = parse_comm_type(type_it->second.get<std::string>());
  if (!type) return std::nullopt;

  CommAttrs out;
  out.comm_type = *type;
  out.comm_group = get_u64("comm_group");
  out.comm_size_bytes = get_u64("comm_size_bytes").value_or(0);
  out.comm_peer = get_u64("comm_peer");
  if (auto it = node.attrs.find("comm_tag");
      it != node.attrs.end() && it->second.is_string())
    out.comm_tag = it->second.get<std::string>();
  if (auto it = node.attrs.find("tensor_ids");
      it != node.attrs.end() && it->second.is_array()) {
    for (const auto& v : it->second)
      if (v.is_number_unsigned()) out.tensor_ids.push_back(v.get<uint64_t>());
  }
  return out;
}

void set_comm_attrs(TraceNode& node, const CommAttrs& comm) {
  node.attrs["comm_type"] = std::string(to_string(comm.comm_type));
  node.attrs["comm_size_bytes"] = comm.comm_size_bytes;
  if (comm.comm_group) node.attrs["comm_group"] = *comm.comm_group;
  if (comm.comm_tag) node.attrs["comm_tag"] = *comm.comm_tag;
  if (comm.comm_peer) node.attrs["comm_peer"] = *comm.comm_peer;
  if (!comm.tensor_ids.empty()) node.attrs["tensor_ids"] = comm.tensor_ids;
}

void sort_unique(std::vector<uint64_t>& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

void canonicalize(ExecutionTrace& trace) {
  for (auto& g : trace.process_groups) sort_unique(g.ranks);
  for (auto& n : trace.nodes) {
    sort_unique(n.ctrl_deps);
    sort_unique(n.data_deps);
  }
  sort_by_id(trace.process_groups);
  sort_by_id(trace.tensors);
  sort_by_id(trace.storages);
  sort_by_id(trace.nodes);
}

ExecutionTrace canonicalized(ExecutionTrace trace) {
  canonicalize(trace);
  return trace;
}

}  // namespace chakra
