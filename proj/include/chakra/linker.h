#pragma once

// Merges a host trace and a device trace into one dependency graph with
// typed control / data / sync edges.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chakra/ingest.h"
#include "chakra/schema.h"

namespace chakra {

enum class Origin { host, device };
enum class LinkedKind { call, kernel_launch, sync, kernel, memcpy_h2d, memcpy_d2h, comm };
// Collapse priority when parallel edges disagree: data > sync > control.
enum class DepType { control, data, sync };

std::string_view to_string(Origin o);
std::string_view to_string(LinkedKind k);
std::string_view to_string(DepType d);
std::optional<Origin> parse_origin(std::string_view s);
std::optional<LinkedKind> parse_linked_kind(std::string_view s);
std::optional<DepType> parse_dep_type(std::string_view s);

int dep_priority(DepType d);
constexpr uint8_t dep_bit(DepType d) { return static_cast<uint8_t>(1u << static_cast<int>(d)); }

struct LinkedNode {
  uint64_t id = 0;
  Origin origin = Origin::host;
  std::string name;
  LinkedKind kind = LinkedKind::call;
  std::optional<uint32_t> stream;
  std::optional<uint64_t> ts;
  std::optional<uint64_t> dur;
  std::vector<BufferRef> inputs;
  std::vector<BufferRef> outputs;
  std::optional<DeviceComm> comm;
  std::optional<SyncKind> sync_kind;
  std::optional<uint64_t> event_id;
  std::optional<uint64_t> parent;  // host call-stack parent
  std::optional<uint64_t> launch;  // host launch op that issued this device event
  AttrMap attrs;                   // carried into the emitted trace node

  bool operator==(const LinkedNode&) const = default;
};

struct LinkedEdge {
  uint64_t src = 0;
  uint64_t dst = 0;
  DepType dep_type = DepType::control;
  // Bitmask of dep types that were collapsed into this edge; 0 if none.
  uint8_t merged = 0;

  bool operator==(const LinkedEdge&) const = default;
};

struct LinkedGraph {
  uint64_t rank = 0;
  uint64_t num_ranks = 1;
  std::vector<ProcessGroup> process_groups;
  std::vector<LinkedNode> nodes;
  std::vector<LinkedEdge> edges;
  std::vector<std::string> warnings;
};

// Parent -> child call-stack edges and launch -> device-event edges.
std::vector<LinkedEdge> build_control_edges(const LinkedGraph& graph);

// Last-writer -> reader edges over (storage_id, storage_offset), plus the
// per-stream chain of device events. Overlapping writers to one buffer add a
// WRITE_WRITE_RACE warning.
std::vector<LinkedEdge> build_data_edges(const LinkedGraph& graph,
                                         std::vector<std::string>* warnings = nullptr);

// Device/stream synchronization and event record/wait edges; the only
// source of device -> host edges. Throws UNMATCHED_EVENT_WAIT.
std::vector<LinkedEdge> build_sync_edges(const LinkedGraph& graph);

// Node table only (no edges): host ops followed by device events with ids
// from assign_device_ids.
LinkedGraph make_node_table(const HostTrace& host, const DeviceTrace& device,
                            const CorrelationMap& cmap);

LinkedGraph link(const HostTrace& host, const DeviceTrace& device, const CorrelationMap& cmap);

// Sorts by (src, dst, dep_type) and drops exact duplicates.
void dedup_edges(std::vector<LinkedEdge>& edges);

std::string serialize_linked(const LinkedGraph& graph);
LinkedGraph parse_linked(std::string_view bytes);

}  // namespace chakra
