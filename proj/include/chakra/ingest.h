#pragma once

// Simplified host-side (observer-style) and device-side (kernel-timeline
// style) trace inputs, and launch/kernel correlation between them.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chakra/schema.h"

namespace chakra {

// A tensor reference as it appears in host/device records. Buffer identity
// for data dependencies is (storage_id, storage_offset).
struct BufferRef {
  uint64_t tensor_id = 0;
  uint64_t storage_id = 0;
  uint64_t storage_offset = 0;
  std::vector<int64_t> shape;
  DType dtype = DType::fp32;
  uint64_t size_bytes = 0;

  std::pair<uint64_t, uint64_t> key() const { return {storage_id, storage_offset}; }
  bool operator==(const BufferRef&) const = default;
};

enum class HostOpKind { call, kernel_launch, sync };
enum class SyncKind { device, stream, event_record, event_wait };
enum class DeviceKind { kernel, memcpy_h2d, memcpy_d2h, comm };
enum class P2PDirection { send, recv };

std::string_view to_string(HostOpKind k);
std::string_view to_string(SyncKind k);
std::string_view to_string(DeviceKind k);
std::string_view to_string(P2PDirection d);
std::optional<HostOpKind> parse_host_op_kind(std::string_view s);
std::optional<SyncKind> parse_sync_kind(std::string_view s);
std::optional<DeviceKind> parse_device_kind(std::string_view s);
std::optional<P2PDirection> parse_p2p_direction(std::string_view s);

struct HostOp {
  uint64_t id = 0;
  std::string name;
  std::optional<uint64_t> parent;
  HostOpKind kind = HostOpKind::call;
  std::optional<uint64_t> rf_id;
  std::optional<SyncKind> sync_kind;
  std::optional<uint32_t> stream;
  std::optional<uint64_t> event_id;
  uint64_t ts = 0;
  uint64_t dur = 0;
  std::vector<BufferRef> inputs;
  std::vector<BufferRef> outputs;
};

struct HostTrace {
  uint64_t rank = 0;
  // Optional in the file; num_ranks defaults to rank + 1.
  uint64_t num_ranks = 1;
  std::vector<ProcessGroup> process_groups;
  std::vector<HostOp> ops;
};

// Communication payload of a device comm event. PointToPoint events also
// carry the transfer direction.
struct DeviceComm {
  CommAttrs attrs;
  std::optional<P2PDirection> direction;

  bool operator==(const DeviceComm&) const = default;
};

struct DeviceEvent {
  uint64_t correlation = 0;
  std::string name;
  uint32_t stream = 0;
  uint64_t ts = 0;
  uint64_t dur = 0;
  DeviceKind kind = DeviceKind::kernel;
  std::optional<DeviceComm> comm;
  std::vector<BufferRef> inputs;
  std::vector<BufferRef> outputs;
};

struct DeviceTrace {
  uint64_t rank = 0;
  std::vector<DeviceEvent> events;
};

HostTrace parse_host_trace(std::string_view bytes);
DeviceTrace parse_device_trace(std::string_view bytes);
std::string serialize_host_trace(const HostTrace& trace);
std::string serialize_device_trace(const DeviceTrace& trace);

// Fresh node ids for device events, disjoint from host op ids. Assigned in
// (ts, stream, correlation, kind, name, dur) order so the result does not
// depend on how the events were listed; returned indexed like `events`.
std::vector<uint64_t> assign_device_ids(const HostTrace& host, const DeviceTrace& device);

struct LaunchMatch {
  uint64_t host_op = 0;
  std::vector<uint64_t> device_events;  // assigned device ids, ascending

  bool operator==(const LaunchMatch&) const = default;
};

struct OrphanDevice {
  uint64_t correlation = 0;
  uint64_t device_event = 0;

  auto operator<=>(const OrphanDevice&) const = default;
};

struct CorrelationMap {
  std::map<uint64_t, LaunchMatch> pairs;  // rf_id -> match
  std::vector<uint64_t> orphans_host;     // launch op ids, ascending
  std::vector<OrphanDevice> orphans_device;
  std::vector<std::string> warnings;
};

CorrelationMap correlate(const HostTrace& host, const DeviceTrace& device);

}  // namespace chakra
