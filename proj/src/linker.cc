#include "chakra/linker.h"

#include <algorithm>
#include <map>
#include <tuple>
#include <unordered_map>

#include "chakra/error.h"

namespace chakra {

std::string_view to_string(Origin o) { return o == Origin::host ? "host" : "device"; }

std::string_view to_string(LinkedKind k) {
  switch (k) {
    case LinkedKind::call: return "call";
    case LinkedKind::kernel_launch: return "kernel_launch";
    case LinkedKind::sync: return "sync";
    case LinkedKind::kernel: return "kernel";
    case LinkedKind::memcpy_h2d: return "memcpy_h2d";
    case LinkedKind::memcpy_d2h: return "memcpy_d2h";
    case LinkedKind::comm: return "comm";
  }
  return "?";
}

std::string_view to_string(DepType d) {
  switch (d) {
    case DepType::control: return "control";
    case DepType::data: return "data";
    case DepType::sync: return "sync";
  }
  return "?";
}

std::optional<Origin> parse_origin(std::string_view s) {
  if (s == "host") return Origin::host;
  if (s == "device") return Origin::device;
  return std::nullopt;
}

std::optional<LinkedKind> parse_linked_kind(std::string_view s) {
  for (auto k : {LinkedKind::call, LinkedKind::kernel_launch, LinkedKind::sync,
                 LinkedKind::kernel, LinkedKind::memcpy_h2d, LinkedKind::memcpy_d2h,
                 LinkedKind::comm})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<DepType> parse_dep_type(std::string_view s) {
  for (auto d : {DepType::control, DepType::data, DepType::sync})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

int dep_priority(DepType d) {
  switch (d) {
    case DepType::data: return 2;
    case DepType::sync: return 1;
    case DepType::control: return 0;
  }
  return 0;
}

void dedup_edges(std::vector<LinkedEdge>& edges) {
  auto key = [](const LinkedEdge& e) { return std::tie(e.src, e.dst, e.dep_type); };
  std::sort(edges.begin(), edges.end(),
            [&](const LinkedEdge& a, const LinkedEdge& b) { return key(a) < key(b); });
  std::vector<LinkedEdge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    if (!out.empty() && key(out.back()) == key(e))
      out.back().merged |= e.merged;
    else
      out.push_back(e);
  }
  edges = std::move(out);
}

namespace {

uint64_t ts_of(const LinkedNode& n) { return n.ts.value_or(0); }

// Global order used by every builder: (ts, origin, id), host before device.
bool before(const LinkedNode* a, const LinkedNode* b) {
  return std::make_tuple(ts_of(*a), a->origin, a->id) <
         std::make_tuple(ts_of(*b), b->origin, b->id);
}

std::vector<const LinkedNode*> time_ordered(const LinkedGraph& g) {
  std::vector<const LinkedNode*> out;
  out.reserve(g.nodes.size());
  for (const auto& n : g.nodes) out.push_back(&n);
  std::sort(out.begin(), out.end(), before);
  return out;
}

// Device events of each stream in (ts, id) order.
std::map<uint32_t, std::vector<const LinkedNode*>> streams_of(const LinkedGraph& g) {
  std::map<uint32_t, std::vector<const LinkedNode*>> out;
  for (const auto& n : g.nodes)
    if (n.origin == Origin::device && n.stream) out[*n.stream].push_back(&n);
  for (auto& [s, list] : out) std::sort(list.begin(), list.end(), before);
  return out;
}

// Last event on the stream whose ts is strictly below `t`.
const LinkedNode* last_before(const std::vector<const LinkedNode*>& events, uint64_t t) {
  auto it = std::lower_bound(events.begin(), events.end(), t,
                             [](const LinkedNode* n, uint64_t v) { return ts_of(*n) < v; });
  return it == events.begin() ? nullptr : *std::prev(it);
}

// First event on the stream whose ts is at or after `t`.
const LinkedNode* first_at_or_after(const std::vector<const LinkedNode*>& events, uint64_t t) {
  auto it = std::lower_bound(events.begin(), events.end(), t,
                             [](const LinkedNode* n, uint64_t v) { return ts_of(*n) < v; });
  return it == events.end() ? nullptr : *it;
}

LinkedKind host_kind(HostOpKind k) {
  switch (k) {
    case HostOpKind::call: return LinkedKind::call;
    case HostOpKind::kernel_launch: return LinkedKind::kernel_launch;
    case HostOpKind::sync: return LinkedKind::sync;
  }
  return LinkedKind::call;
}

LinkedKind device_kind(DeviceKind k) {
  switch (k) {
    case DeviceKind::kernel: return LinkedKind::kernel;
    case DeviceKind::memcpy_h2d: return LinkedKind::memcpy_h2d;
    case DeviceKind::memcpy_d2h: return LinkedKind::memcpy_d2h;
    case DeviceKind::comm: return LinkedKind::comm;
  }
  return LinkedKind::kernel;
}

}  // namespace

std::vector<LinkedEdge> build_control_edges(const LinkedGraph& g) {
  std::vector<LinkedEdge> out;
  for (const auto& n : g.nodes) {
    if (n.parent) out.push_back({*n.parent, n.id, DepType::control});
    if (n.launch) out.push_back({*n.launch, n.id, DepType::control});
  }
  return out;
}

std::vector<LinkedEdge> build_data_edges(const LinkedGraph& g,
                                         std::vector<std::string>* warnings) {
  std::vector<LinkedEdge> out;
  std::map<std::pair<uint64_t, uint64_t>, const LinkedNode*> last_writer;
  for (const LinkedNode* n : time_ordered(g)) {
    for (const auto& in : n->inputs) {
      auto it = last_writer.find(in.key());
      if (it != last_writer.end() && it->second != n)
        out.push_back({it->second->id, n->id, DepType::data});
    }
    for (const auto& o : n->outputs) {
      auto& w = last_writer[o.key()];
      if (w != nullptr && w != n && warnings != nullptr) {
        uint64_t w_end = ts_of(*w) + w->dur.value_or(0);
        uint64_t n_end = ts_of(*n) + n->dur.value_or(0);
        if (ts_of(*n) < w_end && ts_of(*w) < n_end)
          warnings->push_back("WRITE_WRITE_RACE: nodes " + std::to_string(w->id) + " and " +
                              std::to_string(n->id) + " overlap writing storage " +
                              std::to_string(o.storage_id) + "+" +
                              std::to_string(o.storage_offset));
      }
      w = n;
    }
  }
  for (const auto& [stream, events] : streams_of(g))
    for (size_t i = 1; i < events.size(); ++i)
      out.push_back({events[i - 1]->id, events[i]->id, DepType::data});
  return out;
}

std::vector<LinkedEdge> build_sync_edges(const LinkedGraph& g) {
  std::vector<LinkedEdge> out;
  auto streams = streams_of(g);
  static const std::vector<const LinkedNode*> kNone;
  auto stream_events = [&](uint32_t s) -> const std::vector<const LinkedNode*>& {
    auto it = streams.find(s);
    return it == streams.end() ? kNone : it->second;
  };

  std::vector<const LinkedNode*> syncs;
  for (const auto& n : g.nodes)
    if (n.origin == Origin::host && n.kind == LinkedKind::sync && n.sync_kind) syncs.push_back(&n);
  std::sort(syncs.begin(), syncs.end(), before);

  // event id -> device event that was last on the recording stream, if any
  std::unordered_map<uint64_t, const LinkedNode*> recorded;
  for (const LinkedNode* s : syncs) {
    uint64_t t = ts_of(*s);
    switch (*s->sync_kind) {
      case SyncKind::device:
        for (const auto& [stream, events] : streams)
          if (const LinkedNode* last = last_before(events, t))
            out.push_back({last->id, s->id, DepType::sync});
        break;
      case SyncKind::stream:
        if (const LinkedNode* last = last_before(stream_events(*s->stream), t))
          out.push_back({last->id, s->id, DepType::sync});
        break;
      case SyncKind::event_record:
        recorded[*s->event_id] = last_before(stream_events(*s->stream), t);
        break;
      case SyncKind::event_wait: {
        auto it = recorded.find(*s->event_id);
        if (it == recorded.end())
          throw Error(ErrorCode::UNMATCHED_EVENT_WAIT, std::to_string(*s->event_id),
                      "wait op " + std::to_string(s->id) + " has no prior record");
        const LinkedNode* next = first_at_or_after(stream_events(*s->stream), t);
        if (it->second != nullptr && next != nullptr && it->second != next)
          out.push_back({it->second->id, next->id, DepType::sync});
        break;
      }
    }
  }
  return out;
}

LinkedGraph make_node_table(const HostTrace& host, const DeviceTrace& device,
                            const CorrelationMap& cmap) {
  LinkedGraph g;
  g.rank = host.rank;
  g.num_ranks = std::max(host.num_ranks, host.rank + 1);
  g.process_groups = host.process_groups;
  g.warnings = cmap.warnings;
  g.nodes.reserve(host.ops.size() + device.events.size());
  for (const auto& op : host.ops) {
    LinkedNode n;
    n.id = op.id;
    n.origin = Origin::host;
    n.name = op.name;
    n.kind = host_kind(op.kind);
    n.stream = op.stream;
    n.ts = op.ts;
    n.dur = op.dur;
    n.inputs = op.inputs;
    n.outputs = op.outputs;
    n.sync_kind = op.sync_kind;
    n.event_id = op.event_id;
    n.parent = op.parent;
    g.nodes.push_back(std::move(n));
  }

  std::unordered_map<uint64_t, uint64_t> launch_of;  // device id -> launch op
  for (const auto& [rf, match] : cmap.pairs)
    for (uint64_t d : match.device_events) launch_of[d] = match.host_op;

  std::vector<uint64_t> ids = assign_device_ids(host, device);
  for (size_t i = 0; i < device.events.size(); ++i) {
    const auto& e = device.events[i];
    LinkedNode n;
    n.id = ids[i];
    n.origin = Origin::device;
    n.name = e.name;
    n.kind = device_kind(e.kind);
    n.stream = e.stream;
    n.ts = e.ts;
    n.dur = e.dur;
    n.inputs = e.inputs;
    n.outputs = e.outputs;
    n.comm = e.comm;
    if (auto it = launch_of.find(n.id); it != launch_of.end()) n.launch = it->second;
    g.nodes.push_back(std::move(n));
  }
  std::sort(g.nodes.begin(), g.nodes.end(),
            [](const LinkedNode& a, const LinkedNode& b) { return a.id < b.id; });
  return g;
}

LinkedGraph link(const HostTrace& host, const DeviceTrace& device, const CorrelationMap& cmap) {
  LinkedGraph g = make_node_table(host, device, cmap);

  // The three builders only read the node table; run them side by side.
  std::vector<LinkedEdge> control, data, sync;
  std::vector<std::string> data_warnings;
  std::exception_ptr failure;
#pragma omp parallel sections
  {
#pragma omp section
    control = build_control_edges(g);
#pragma omp section
    data = build_data_edges(g, &data_warnings);
#pragma omp section
    {
      try {
        sync = build_sync_edges(g);
      } catch (...) {
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  g.edges.reserve(control.size() + data.size() + sync.size());
  for (auto* part : {&control, &data, &sync})
    g.edges.insert(g.edges.end(), part->begin(), part->end());
  dedup_edges(g.edges);
  g.warnings.insert(g.warnings.end(), data_warnings.begin(), data_warnings.end());
  return g;
}

}  // namespace chakra
