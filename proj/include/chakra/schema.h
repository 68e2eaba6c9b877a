#pragma once

// Canonical execution-trace data model: one rank's DAG of typed operations
// plus its tensor, storage and process-group tables.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace chakra {

using Json = nlohmann::json;
using AttrMap = std::map<std::string, Json>;

enum class NodeType { COMP, MEM_LOAD, MEM_STORE, COMM_COLL, COMM_SEND, COMM_RECV };

enum class CommType {
  AllReduce,
  AllGather,
  ReduceScatter,
  Broadcast,
  PointToPoint,
  All2All,
  Barrier,
};

enum class DType { fp16, bf16, fp32, int8, int32, int64 };

std::string_view to_string(NodeType t);
std::string_view to_string(CommType t);
std::string_view to_string(DType t);
std::optional<NodeType> parse_node_type(std::string_view s);
std::optional<CommType> parse_comm_type(std::string_view s);
std::optional<DType> parse_dtype(std::string_view s);

constexpr bool is_comm(NodeType t) {
  return t == NodeType::COMM_COLL || t == NodeType::COMM_SEND ||
         t == NodeType::COMM_RECV;
}

constexpr uint64_t dtype_width(DType t) {
  switch (t) {
    case DType::fp16:
    case DType::bf16: return 2;
    case DType::fp32:
    case DType::int32: return 4;
    case DType::int8: return 1;
    case DType::int64: return 8;
  }
  return 1;
}

struct ProcessGroup {
  uint64_t id = 0;
  std::vector<uint64_t> ranks;

  bool operator==(const ProcessGroup&) const = default;
};

struct StorageDesc {
  uint64_t id = 0;
  uint64_t size_bytes = 0;
  std::string device;

  bool operator==(const StorageDesc&) const = default;
};

struct TensorDesc {
  uint64_t id = 0;
  uint64_t storage_id = 0;
  uint64_t storage_offset = 0;  // elements
  std::vector<int64_t> shape;
  std::vector<int64_t> stride;
  DType dtype = DType::fp32;
  uint64_t size_bytes = 0;

  bool operator==(const TensorDesc&) const = default;
};

// Bytes spanned by a strided view: (1 + sum (shape_i - 1) * stride_i) * width,
// zero when any dimension is empty.
uint64_t tensor_extent_bytes(const TensorDesc& t);
std::vector<int64_t> contiguous_stride(const std::vector<int64_t>& shape);

struct TraceNode {
  uint64_t id = 0;
  std::string name;
  NodeType type = NodeType::COMP;
  std::vector<uint64_t> ctrl_deps;
  std::vector<uint64_t> data_deps;
  std::optional<uint64_t> start_time_micros;
  std::optional<uint64_t> duration_micros;
  std::vector<uint64_t> inputs;   // tensor ids
  std::vector<uint64_t> outputs;  // tensor ids
  AttrMap attrs;

  bool operator==(const TraceNode&) const = default;
};

struct ExecutionTrace {
  std::string schema_version = "1.0";
  uint64_t rank = 0;
  uint64_t num_ranks = 1;
  std::vector<ProcessGroup> process_groups;
  std::vector<TensorDesc> tensors;
  std::vector<StorageDesc> storages;
  std::vector<TraceNode> nodes;
  // Unknown top-level keys, written back verbatim beside the known ones.
  AttrMap extra;

  bool operator==(const ExecutionTrace&) const = default;
};

// Communication attributes as stored in TraceNode::attrs.
struct CommAttrs {
  CommType comm_type = CommType::AllReduce;
  std::optional<uint64_t> comm_group;
  std::optional<std::string> comm_tag;
  uint64_t comm_size_bytes = 0;
  std::optional<uint64_t> comm_peer;
  std::vector<uint64_t> tensor_ids;

  bool operator==(const CommAttrs&) const = default;
};

// Reads the comm_* attributes; nullopt if comm_type is absent or unparsable.
std::optional<CommAttrs> comm_attrs(const TraceNode& node);
void set_comm_attrs(TraceNode& node, const CommAttrs& comm);

// Sorted, duplicate-free dep lists; tables and nodes sorted by id; group
// rank lists sorted.
void canonicalize(ExecutionTrace& trace);
ExecutionTrace canonicalized(ExecutionTrace trace);

void sort_unique(std::vector<uint64_t>& ids);

}  // namespace chakra
