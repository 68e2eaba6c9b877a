#include <algorithm>
#include <functional>
#include <map>

#include "chakra/error.h"
#include "chakra/generator.h"

namespace chakra {

namespace {

BufferRef buf(uint64_t tensor, uint64_t storage, uint64_t offset = 0) {
  BufferRef b;
  b.tensor_id = tensor;
  b.storage_id = storage;
  b.storage_offset = offset;
  b.shape = {256};
  b.dtype = DType::fp32;
  b.size_bytes = 1024;
  return b;
}

HostOp call(uint64_t id, std::string name, uint64_t ts, uint64_t dur,
            std::optional<uint64_t> parent = std::nullopt) {
  HostOp op;
  op.id = id;
  op.name = std::move(name);
  op.kind = HostOpKind::call;
  op.parent = parent;
  op.ts = ts;
  op.dur = dur;
  return op;
}

HostOp launch(uint64_t id, uint64_t rf, uint64_t ts, std::optional<uint64_t> parent = std::nullopt) {
  HostOp op = call(id, "cudaLaunchKernel", ts, 1, parent);
  op.kind = HostOpKind::kernel_launch;
  op.rf_id = rf;
  return op;
}

HostOp sync(uint64_t id, SyncKind kind, uint64_t ts, std::optional<uint32_t> stream = std::nullopt,
            std::optional<uint64_t> event = std::nullopt) {
  static const std::map<SyncKind, std::string> names{{SyncKind::device, "cudaDeviceSynchronize"},
                                                     {SyncKind::stream, "cudaStreamSynchronize"},
                                                     {SyncKind::event_record, "cudaEventRecord"},
                                                     {SyncKind::event_wait, "cudaStreamWaitEvent"}};
  HostOp op = call(id, names.at(kind), ts, 1);
  op.kind = HostOpKind::sync;
  op.sync_kind = kind;
  op.stream = stream;
  op.event_id = event;
  return op;
}

DeviceEvent kernel(uint64_t corr, std::string name, uint32_t stream, uint64_t ts, uint64_t dur,
                   std::vector<BufferRef> in = {}, std::vector<BufferRef> out = {}) {
  DeviceEvent e;
  e.correlation = corr;
  e.name = std::move(name);
  e.stream = stream;
  e.ts = ts;
  e.dur = dur;
  e.inputs = std::move(in);
  e.outputs = std::move(out);
  return e;
}

using Maker = std::function<void(HostDeviceFixture&)>;

const std::vector<std::pair<std::string, Maker>>& makers() {
  static const std::vector<std::pair<std::string, Maker>> table{
      {"call_launch_kernel",
       [](HostDeviceFixture& f) {
         f.host.ops = {call(1, "aten::linear", 0, 20), launch(2, 100, 2, 1)};
         f.device.events = {kernel(100, "gemm_kernel", 0, 10, 5)};
       }},
      {"call_stack",
       [](HostDeviceFixture& f) {
         f.host.ops = {call(1, "forward", 0, 30), call(2, "aten::linear", 1, 20, 1),
                       call(3, "aten::addmm", 2, 10, 2)};
       }},
      {"multi_kernel_launch",
       [](HostDeviceFixture& f) {
         f.host.ops = {launch(1, 7, 0)};
         f.device.events = {kernel(7, "split_k_part0", 0, 10, 5), kernel(7, "split_k_part1", 0, 20, 5)};
       }},
      {"producer_consumer",
       [](HostDeviceFixture& f) {
         f.device.events = {kernel(1, "producer", 0, 0, 5, {}, {buf(1, 5)}),
                            kernel(2, "consumer", 1, 10, 5, {buf(1, 5)}, {})};
       }},
      {"host_to_device",
       [](HostDeviceFixture& f) {
         HostOp h = call(1, "fill_input", 0, 5);
         h.outputs = {buf(1, 7)};
         f.host.ops = {h};
         f.device.events = {kernel(9, "reader", 0, 10, 5, {buf(1, 7)}, {})};
       }},
      {"intra_stream",
       [](HostDeviceFixture& f) {
         f.device.events = {kernel(1, "k1", 3, 0, 5), kernel(2, "k2", 3, 10, 5), kernel(3, "k3", 3, 20, 5)};
       }},
      {"inter_stream_comm",
       [](HostDeviceFixture& f) {
         f.host.process_groups = {{0, {0}}};
         DeviceEvent g = kernel(1, "gemm", 0, 0, 10, {}, {buf(1, 1)});
         DeviceEvent c = kernel(2, "allreduce", 1, 12, 4, {buf(1, 1)}, {});
         c.kind = DeviceKind::comm;
         DeviceComm dc;
         dc.attrs.comm_type = CommType::AllReduce;
         dc.attrs.comm_group = 0;
         dc.attrs.comm_size_bytes = 1024;
         dc.attrs.tensor_ids = {1};
         c.comm = dc;
         f.device.events = {g, c};
       }},
      {"read_read",
       [](HostDeviceFixture& f) {
         f.device.events = {kernel(1, "writer", 0, 0, 5, {}, {buf(1, 4)}),
                            kernel(2, "reader_a", 1, 10, 5, {buf(1, 4)}, {}),
                            kernel(3, "reader_b", 2, 20, 5, {buf(1, 4)}, {})};
       }},
      {"write_after_write",
       [](HostDeviceFixture& f) {
         f.device.events = {kernel(1, "writer_a", 0, 0, 5, {}, {buf(1, 2)}),
                            kernel(2, "writer_b", 1, 10, 5, {}, {buf(2, 2)}),
                            kernel(3, "reader", 2, 20, 5, {buf(2, 2)}, {})};
       }},
      {"device_sync",
       [](HostDeviceFixture& f) {
         f.host.ops = {sync(1, SyncKind::device, 30)};
         f.device.events = {kernel(1, "k1", 0, 0, 5), kernel(2, "k2", 0, 10, 5), kernel(3, "k3", 1, 5, 5)};
       }},
      {"stream_sync",
       [](HostDeviceFixture& f) {
         f.host.ops = {sync(1, SyncKind::stream, 20, 1)};
         f.device.events = {kernel(1, "k1", 0, 0, 5), kernel(2, "k2", 1, 5, 5)};
       }},
      {"record_wait",
       [](HostDeviceFixture& f) {
         f.host.ops = {sync(1, SyncKind::event_record, 10, 1, 5), sync(2, SyncKind::event_wait, 12, 2, 5)};
         f.device.events = {kernel(1, "k1", 1, 0, 5), kernel(2, "k3", 2, 20, 5)};
       }},
      {"orphans",
       [](HostDeviceFixture& f) {
         f.host.ops = {launch(1, 1, 0)};
         f.device.events = {kernel(99, "stray", 0, 10, 5)};
       }},
      {"memcpy_chain",
       [](HostDeviceFixture& f) {
         HostOp h = call(1, "prepare_batch", 0, 5);
         h.outputs = {buf(1, 1)};
         f.host.ops = {h};
         DeviceEvent m = kernel(1, "memcpy_h2d", 0, 10, 3, {buf(1, 1)}, {buf(2, 2)});
         m.kind = DeviceKind::memcpy_h2d;
         f.device.events = {m, kernel(2, "consume", 0, 20, 5, {buf(2, 2)}, {})};
       }},
  };
  return table;
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const auto& [name, make] : makers()) names.push_back(name);
  return names;
}

HostDeviceFixture make_fixture(const std::string& name) {
  for (const auto& [n, make] : makers()) {
    if (n != name) continue;
    HostDeviceFixture f;
    f.name = name;
    make(f);
    return f;
  }
  throw Error(ErrorCode::INVALID_SPEC, name, "unknown fixture '" + name + "'");
}

std::vector<HostDeviceFixture> transformer_fixture(const GenSpec& spec) {
  std::vector<ExecutionTrace> traces = generate_transformer(spec);
  std::vector<HostDeviceFixture> out;
  for (const ExecutionTrace& t : traces) {
    HostDeviceFixture f;
    f.name = "transformer.rank" + std::to_string(t.rank);
    f.host.rank = f.device.rank = t.rank;
    f.host.num_ranks = t.num_ranks;
    f.host.process_groups = t.process_groups;

    // Generated ids are already a topological order.
    const uint64_t n = t.nodes.size();
    std::vector<uint64_t> end(n + 1, 0);
    uint64_t last_ts = 0;
    for (const TraceNode& node : t.nodes) {
      HostOp l = launch(node.id, node.id, node.id);
      f.host.ops.push_back(l);

      // Dependency-free nodes start where the previous node started.
      uint64_t ts = std::max(n + 1, last_ts);
      for (uint64_t d : node.data_deps) ts = std::max(ts, end[d]);
      DeviceEvent e = kernel(node.id, node.name, 0, ts, std::max<uint64_t>(1, node.duration_micros.value_or(1)));
      for (uint64_t d : node.data_deps) e.inputs.push_back(buf(d, d));
      e.outputs.push_back(buf(node.id, node.id));
      if (is_comm(node.type)) {
        CommAttrs c = *comm_attrs(node);
        e.kind = DeviceKind::comm;
        DeviceComm dc;
        dc.attrs = c;
        dc.attrs.tensor_ids.clear();
        for (uint64_t d : node.data_deps) dc.attrs.tensor_ids.push_back(d);
        if (node.type == NodeType::COMM_SEND) dc.direction = P2PDirection::send;
        if (node.type == NodeType::COMM_RECV) dc.direction = P2PDirection::recv;
        e.comm = dc;
        // TP collectives, DP buckets, sends and receives use separate streams.
        if (node.type == NodeType::COMM_SEND)
          e.stream = 3;
        else if (node.type == NodeType::COMM_RECV)
          e.stream = 4;
        else if (c.comm_tag && c.comm_tag->rfind("dp_bucket", 0) == 0)
          e.stream = 2;
        else
          e.stream = 1;
      }
      end[node.id] = e.ts + e.dur;
      last_ts = e.ts;
      f.device.events.push_back(std::move(e));
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace chakra
