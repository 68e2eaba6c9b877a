#include "chakra/simulator.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <functional>
#include <queue>
#include <tuple>
#include <unordered_map>

#include <omp.h>

#include "chakra/error.h"
#include "chakra/feeder.h"
#include "chakra/graph_kernels.h"
#include "chakra/intervals.h"

namespace chakra {

namespace {

// Node indices of `trace` in smallest-id-first topological order.
std::vector<uint32_t> canonical_order(const ExecutionTrace& trace) {
  const size_t n = trace.nodes.size();
  std::vector<uint32_t> by_id(n);
  for (uint32_t i = 0; i < n; ++i) by_id[i] = i;
  std::sort(by_id.begin(), by_id.end(),
            [&](uint32_t a, uint32_t b) { return trace.nodes[a].id < trace.nodes[b].id; });
  // Dense index = rank of the id, so min-index Kahn is min-id Kahn.
  std::unordered_map<uint64_t, graph::Index> dense;
  dense.reserve(n);
  for (uint32_t i = 0; i < n; ++i) dense.emplace(trace.nodes[by_id[i]].id, i);
  std::vector<std::pair<graph::Index, graph::Index>> edges;
  for (uint32_t i = 0; i < n; ++i) {
    const TraceNode& node = trace.nodes[by_id[i]];
    for (const auto* deps : {&node.ctrl_deps, &node.data_deps})
      for (uint64_t d : *deps) {
        auto it = dense.find(d);
        if (it == dense.end())
          throw Error(ErrorCode::INVALID_TRACE, "DANGLING_DEP",
                      "rank " + std::to_string(trace.rank) + " node " + std::to_string(node.id) +
                          " depends on missing node " + std::to_string(d));
        edges.emplace_back(it->second, i);
      }
  }
  graph::Csr g = graph::build_csr(n, edges);
  std::vector<graph::Index> order = graph::min_index_topo_order(g);
  if (order.size() != n)
    throw Error(ErrorCode::CYCLE_DETECTED, "rank" + std::to_string(trace.rank), "trace is cyclic");
  std::vector<uint32_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = by_id[order[i]];
  return out;
}

std::vector<std::vector<uint32_t>> canonical_orders(const std::vector<ExecutionTrace>& traces) {
  std::vector<std::vector<uint32_t>> orders(traces.size());
  std::exception_ptr err;
  size_t err_at = traces.size();
#pragma omp parallel for schedule(dynamic, 1)
  for (int64_t r = 0; r < static_cast<int64_t>(traces.size()); ++r) {
    try {
      orders[r] = canonical_order(traces[r]);
    } catch (...) {
#pragma omp critical(chakra_sim_err)
      if (static_cast<size_t>(r) < err_at) {
        err_at = static_cast<size_t>(r);
        err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  return orders;
}

std::string ids_text(const std::vector<uint64_t>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::map<uint64_t, size_t> rank_slots(const std::vector<ExecutionTrace>& traces) {
  std::map<uint64_t, size_t> slots;
  for (size_t i = 0; i < traces.size(); ++i)
    if (!slots.emplace(traces[i].rank, i).second)
      throw Error(ErrorCode::INVALID_TRACE, "DUPLICATE_RANK",
                  "two traces for rank " + std::to_string(traces[i].rank));
  return slots;
}

MatchResult match_impl(const std::vector<ExecutionTrace>& traces,
                       const std::vector<std::vector<uint32_t>>& orders) {
  MatchResult out;
  const auto slots = rank_slots(traces);

  std::map<uint64_t, std::vector<uint64_t>> groups;
  for (const ExecutionTrace& t : traces)
    for (const ProcessGroup& g : t.process_groups) {
      std::vector<uint64_t> ranks = g.ranks;
      std::sort(ranks.begin(), ranks.end());
      auto [it, fresh] = groups.emplace(g.id, ranks);
      if (!fresh && it->second != ranks)
        throw Error(ErrorCode::INVALID_GROUP, std::to_string(g.id),
                    "process group defined differently across ranks");
    }

  // group -> rank -> node indices in sequence order
  std::map<uint64_t, std::map<uint64_t, std::vector<uint32_t>>> coll;
  using P2PKey = std::tuple<uint64_t, uint64_t, std::optional<std::string>>;
  std::map<P2PKey, std::vector<std::pair<uint64_t, uint32_t>>> sends, recvs;  // (rank, node index)
  std::map<std::pair<uint64_t, uint64_t>, uint8_t> tag_usage;  // bit0 untagged, bit1 tagged

  for (size_t s = 0; s < traces.size(); ++s) {
    const ExecutionTrace& t = traces[s];
    for (uint32_t i : orders[s]) {
      const TraceNode& node = t.nodes[i];
      if (!is_comm(node.type)) continue;
      auto c = comm_attrs(node);
      if (!c)
        throw Error(ErrorCode::INVALID_TRACE, "MISSING_COMM_ATTR",
                    "rank " + std::to_string(t.rank) + " node " + std::to_string(node.id));
      if (node.type == NodeType::COMM_COLL) {
        if (!c->comm_group || !groups.count(*c->comm_group))
          throw Error(ErrorCode::UNKNOWN_GROUP, c->comm_group ? std::to_string(*c->comm_group) : "",
                      "rank " + std::to_string(t.rank) + " node " + std::to_string(node.id));
        coll[*c->comm_group][t.rank].push_back(i);
        continue;
      }
      if (!c->comm_peer)
        throw Error(ErrorCode::INVALID_TRACE, "MISSING_COMM_ATTR",
                    "rank " + std::to_string(t.rank) + " node " + std::to_string(node.id) + " has no comm_peer");
      const bool send = node.type == NodeType::COMM_SEND;
      uint64_t src = send ? t.rank : *c->comm_peer;
      uint64_t dst = send ? *c->comm_peer : t.rank;
      (send ? sends : recvs)[P2PKey{src, dst, c->comm_tag}].emplace_back(t.rank, i);
      tag_usage[{src, dst}] |= c->comm_tag ? 2 : 1;
    }
  }

  auto node_at = [&](uint64_t rank, uint32_t idx) -> const TraceNode& {
    return traces[slots.at(rank)].nodes[idx];
  };

  for (const auto& [gid, per_rank] : coll) {
    const std::vector<uint64_t>& members = groups.at(gid);
    size_t expected = per_rank.begin()->second.size();
    for (uint64_t r : members) {
      auto it = per_rank.find(r);
      size_t have = it == per_rank.end() ? 0 : it->second.size();
      if (have != expected || !slots.count(r))
        throw Error(ErrorCode::GROUP_SEQUENCE_MISMATCH, std::to_string(gid),
                    "ranks of group " + std::to_string(gid) + " issue different numbers of collectives");
    }
    for (const auto& [r, list] : per_rank)
      if (!std::binary_search(members.begin(), members.end(), r))
        throw Error(ErrorCode::GROUP_SEQUENCE_MISMATCH, std::to_string(gid),
                    "rank " + std::to_string(r) + " is not a member of group " + std::to_string(gid));

    for (size_t k = 0; k < expected; ++k) {
      CollectiveInstance inst;
      inst.group = gid;
      inst.ranks = members;
      inst.sequence = k;
      bool first = true;
      bool size_mismatch = false;
      for (uint64_t r : members) {
        const TraceNode& node = node_at(r, per_rank.at(r)[k]);
        CommAttrs c = *comm_attrs(node);
        if (first) {
          inst.comm_type = c.comm_type;
          inst.size_bytes = c.comm_size_bytes;
        } else {
          if (c.comm_type != inst.comm_type)
            throw Error(ErrorCode::GROUP_SEQUENCE_MISMATCH, std::to_string(gid),
                        "collective " + std::to_string(k) + " of group " + std::to_string(gid) +
                            " mixes " + std::string(to_string(inst.comm_type)) + " and " +
                            std::string(to_string(c.comm_type)));
          if (c.comm_size_bytes != inst.size_bytes) size_mismatch = true;
          inst.size_bytes = std::max(inst.size_bytes, c.comm_size_bytes);
        }
        if (c.comm_tag) {
          if (inst.tag && *inst.tag != *c.comm_tag)
            throw Error(ErrorCode::TAG_MISMATCH, std::to_string(gid),
                        "collective " + std::to_string(k) + " of group " + std::to_string(gid) +
                            " has tags '" + *inst.tag + "' and '" + *c.comm_tag + "'");
          inst.tag = c.comm_tag;
        }
        inst.members.emplace(r, node.id);
        first = false;
      }
      if (size_mismatch)
        out.warnings.push_back("PAYLOAD_MISMATCH: group " + std::to_string(gid) + " collective " +
                               std::to_string(k) + " uses the largest comm_size_bytes " +
                               std::to_string(inst.size_bytes));
      out.collectives.push_back(std::move(inst));
    }
  }

  for (const auto& [pair, usage] : tag_usage)
    if (usage == 3)
      out.warnings.push_back("MIXED_TAGS: sends " + std::to_string(pair.first) + "->" +
                             std::to_string(pair.second) + " mix tagged and untagged nodes");

  std::vector<uint64_t> unpaired;
  auto collect_unpaired = [&](const auto& side, const auto& other) {
    for (const auto& [key, list] : side) {
      auto it = other.find(key);
      size_t matched = it == other.end() ? 0 : std::min(list.size(), it->second.size());
      for (size_t k = matched; k < list.size(); ++k)
        unpaired.push_back(node_at(list[k].first, list[k].second).id);
    }
  };
  collect_unpaired(sends, recvs);
  collect_unpaired(recvs, sends);
  if (!unpaired.empty()) {
    std::sort(unpaired.begin(), unpaired.end());
    throw Error(ErrorCode::UNPAIRED_SEND_RECV, ids_text(unpaired), "sends and receives do not pair up",
                unpaired);
  }

  for (const auto& [key, list] : sends) {
    const auto& rl = recvs.at(key);
    for (size_t k = 0; k < list.size(); ++k) {
      const TraceNode& s = node_at(list[k].first, list[k].second);
      const TraceNode& r = node_at(rl[k].first, rl[k].second);
      if (!slots.count(std::get<1>(key)) || !slots.count(std::get<0>(key)))
        throw Error(ErrorCode::UNPAIRED_SEND_RECV, std::to_string(s.id), "peer rank has no trace");
      P2PInstance p;
      std::tie(p.src, p.dst, p.tag) = key;
      p.sequence = k;
      p.send_node = s.id;
      p.recv_node = r.id;
      uint64_t ss = comm_attrs(s)->comm_size_bytes, rs = comm_attrs(r)->comm_size_bytes;
      p.size_bytes = std::max(ss, rs);
      if (ss != rs)
        out.warnings.push_back("PAYLOAD_MISMATCH: send " + std::to_string(p.src) + "->" +
                               std::to_string(p.dst) + " #" + std::to_string(k) +
                               " uses the largest comm_size_bytes " + std::to_string(p.size_bytes));
      out.p2p.push_back(std::move(p));
    }
  }
  return out;
}

enum class Res : uint8_t { compute, coll, p2p };

struct RankState {
  const ExecutionTrace* trace = nullptr;
  std::unordered_map<uint64_t, uint32_t> index;
  std::vector<uint64_t> dur;
  std::vector<Res> res;
  std::vector<uint32_t> canon;  // position in canonical order
  std::vector<int64_t> inst;    // collective or p2p instance
  std::optional<Feeder> feeder;
  std::deque<uint32_t> compute_q;
  std::priority_queue<std::pair<uint32_t, uint32_t>, std::vector<std::pair<uint32_t, uint32_t>>,
                      std::greater<>>
      comm_q;
  uint32_t free_compute = 0;
  uint32_t free_comm = 0;
  std::vector<NodeTiming> timing;
  std::vector<char> done;
  size_t remaining = 0;
  size_t untimed = 0;
};

struct Pending {
  // (rank slot, node index) of each member
  std::vector<std::pair<size_t, uint32_t>> members;
  size_t issued = 0;
  uint64_t max_issue = 0;
  uint64_t time = 0;
  double latency = 0;
};

struct Event {
  uint64_t time;
  uint64_t rank;
  uint64_t id;
  size_t slot;
  uint32_t idx;
  bool operator>(const Event& o) const {
    return std::tie(time, rank, id) > std::tie(o.time, o.rank, o.id);
  }
};

}  // namespace

MatchResult match_collectives(const std::vector<ExecutionTrace>& traces) {
  return match_impl(traces, canonical_orders(traces));
}

const NodeTiming* SimReport::timing(uint64_t rank, uint64_t id) const {
  for (const RankReport& r : per_rank) {
    if (r.rank != rank) continue;
    auto it = std::lower_bound(r.nodes.begin(), r.nodes.end(), id,
                               [](const NodeTiming& t, uint64_t v) { return t.id < v; });
    if (it != r.nodes.end() && it->id == id) return &*it;
  }
  return nullptr;
}

SimReport simulate(const std::vector<ExecutionTrace>& traces, const SimConfig& config) {
  check_network(config.network);
  if (!(config.compute_scale > 0) || !std::isfinite(config.compute_scale))
    throw Error(ErrorCode::INVALID_CONFIG, "compute_scale", "compute_scale must be > 0");
  if (config.compute_streams == 0 || config.comm_streams == 0)
    throw Error(ErrorCode::INVALID_CONFIG, "streams_per_rank", "each rank needs at least one stream");

  const auto orders = canonical_orders(traces);
  MatchResult match = match_impl(traces, orders);
  const auto slots = rank_slots(traces);

  SimReport report;
  report.warnings = match.warnings;

  std::vector<RankState> ranks(traces.size());
  for (size_t s = 0; s < traces.size(); ++s) {
    RankState& st = ranks[s];
    const ExecutionTrace& t = traces[s];
    const size_t n = t.nodes.size();
    st.trace = &t;
    st.index.reserve(n);
    st.dur.resize(n);
    st.res.resize(n);
    st.canon.resize(n);
    st.inst.assign(n, -1);
    st.timing.resize(n);
    st.done.assign(n, 0);
    st.remaining = n;
    st.free_compute = config.compute_streams;
    st.free_comm = config.comm_streams;
    for (uint32_t i = 0; i < n; ++i) {
      const TraceNode& node = t.nodes[i];
      st.index.emplace(node.id, i);
      st.timing[i].id = node.id;
      switch (node.type) {
        case NodeType::COMM_COLL: st.res[i] = Res::coll; break;
        case NodeType::COMM_SEND:
        case NodeType::COMM_RECV: st.res[i] = Res::p2p; break;
        default:
          st.res[i] = Res::compute;
          if (!node.duration_micros) ++st.untimed;
          st.dur[i] = round_half_up(static_cast<double>(node.duration_micros.value_or(0)) *
                                    config.compute_scale);
      }
    }
    for (uint32_t pos = 0; pos < n; ++pos) st.canon[orders[s][pos]] = pos;
    if (st.untimed)
      report.warnings.push_back("MISSING_DURATION: rank " + std::to_string(t.rank) + " has " +
                                std::to_string(st.untimed) + " untimed nodes, simulated as 0 us");
  }

  std::vector<Pending> pending;
  pending.reserve(match.collectives.size() + match.p2p.size());
  for (const CollectiveInstance& c : match.collectives) {
    Pending p;
    for (const auto& [r, id] : c.members) {
      size_t s = slots.at(r);
      uint32_t idx = ranks[s].index.at(id);
      ranks[s].inst[idx] = static_cast<int64_t>(pending.size());
      p.members.emplace_back(s, idx);
    }
    uint64_t n = c.ranks.size();
    p.time = collective_time(c.comm_type, n, c.size_bytes, config.network);
    p.latency = collective_latency_exact(c.comm_type, n, config.network);
    pending.push_back(std::move(p));
  }
  for (const P2PInstance& c : match.p2p) {
    Pending p;
    for (auto [r, id] : {std::pair{c.src, c.send_node}, std::pair{c.dst, c.recv_node}}) {
      size_t s = slots.at(r);
      uint32_t idx = ranks[s].index.at(id);
      ranks[s].inst[idx] = static_cast<int64_t>(pending.size());
      p.members.emplace_back(s, idx);
    }
    p.time = collective_time(CommType::PointToPoint, 2, c.size_bytes, config.network);
    p.latency = collective_latency_exact(CommType::PointToPoint, 2, config.network);
    pending.push_back(std::move(p));
  }

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::vector<uint64_t> inst_start(pending.size(), 0);

  auto push_done = [&](size_t s, uint32_t idx, uint64_t time) {
    ranks[s].timing[idx].end = time;
    events.push(Event{time, ranks[s].trace->rank, ranks[s].trace->nodes[idx].id, s, idx});
  };

  auto issue_comm = [&](size_t s, uint32_t idx, uint64_t now) {
    ranks[s].timing[idx].issue = now;
    Pending& p = pending[static_cast<size_t>(ranks[s].inst[idx])];
    ++p.issued;
    p.max_issue = std::max(p.max_issue, now);
    if (p.issued < p.members.size()) return;
    const uint64_t start = p.max_issue;
    inst_start[static_cast<size_t>(ranks[s].inst[idx])] = start;
    for (auto [ms, midx] : p.members) {
      ranks[ms].timing[midx].start = start;
      push_done(ms, midx, start + p.time);
    }
  };

  auto dispatch = [&](size_t s, uint64_t now) {
    RankState& st = ranks[s];
    if (st.feeder) {
      while (auto node = st.feeder->next_ready()) {
        uint32_t idx = st.index.at(node->id);
        switch (st.res[idx]) {
          case Res::compute: st.compute_q.push_back(idx); break;
          case Res::coll: st.comm_q.emplace(st.canon[idx], idx); break;
          case Res::p2p: issue_comm(s, idx, now); break;
        }
      }
    }
    while (st.free_compute > 0 && !st.compute_q.empty()) {
      uint32_t idx = st.compute_q.front();
      st.compute_q.pop_front();
      --st.free_compute;
      st.timing[idx].issue = st.timing[idx].start = now;
      push_done(s, idx, now + st.dur[idx]);
    }
    while (st.free_comm > 0 && !st.comm_q.empty()) {
      uint32_t idx = st.comm_q.top().second;
      st.comm_q.pop();
      --st.free_comm;
      issue_comm(s, idx, now);
    }
  };

  // Per-rank feeders are independent until the event loop starts.
  {
    std::exception_ptr err;
    size_t err_at = ranks.size();
#pragma omp parallel for schedule(dynamic, 1)
    for (int64_t s = 0; s < static_cast<int64_t>(ranks.size()); ++s) {
      if (traces[s].nodes.empty()) continue;
      try {
        ranks[s].feeder.emplace(std::make_unique<SpanSource>(traces[s].nodes),
                                FeederConfig{4096, FeedPolicy::fifo});
      } catch (...) {
#pragma omp critical(chakra_sim_err)
        if (static_cast<size_t>(s) < err_at) {
          err_at = static_cast<size_t>(s);
          err = std::current_exception();
        }
      }
    }
    if (err) std::rethrow_exception(err);
  }
  std::vector<size_t> order_by_rank;
  for (const auto& [r, s] : slots) order_by_rank.push_back(s);
  for (size_t s : order_by_rank) dispatch(s, 0);

  while (!events.empty()) {
    const Event head = events.top();
    const size_t s = head.slot;
    RankState& st = ranks[s];
    while (!events.empty() && events.top().time == head.time && events.top().slot == s) {
      Event e = events.top();
      events.pop();
      st.done[e.idx] = 1;
      --st.remaining;
      switch (st.res[e.idx]) {
        case Res::compute: ++st.free_compute; break;
        case Res::coll: ++st.free_comm; break;
        case Res::p2p: break;
      }
      st.feeder->complete(e.id);
    }
    dispatch(s, head.time);
  }

  std::vector<uint64_t> stuck;
  for (const RankState& st : ranks)
    for (size_t i = 0; i < st.done.size(); ++i)
      if (!st.done[i]) stuck.push_back(st.trace->nodes[i].id);
  if (!stuck.empty()) {
    std::sort(stuck.begin(), stuck.end());
    stuck.erase(std::unique(stuck.begin(), stuck.end()), stuck.end());
    throw Error(ErrorCode::DEADLOCK, "", std::to_string(stuck.size()) + " node ids never completed",
                stuck);
  }

  for (size_t s : order_by_rank) {
    RankState& st = ranks[s];
    RankReport rr;
    rr.rank = st.trace->rank;
    std::vector<Interval> compute, comm;
    for (size_t i = 0; i < st.timing.size(); ++i) {
      const NodeTiming& t = st.timing[i];
      rr.makespan = std::max(rr.makespan, t.end);
      (st.res[i] == Res::compute ? compute : comm).push_back({t.start, t.end});
    }
    BusyBreakdown b = busy_breakdown(std::move(compute), std::move(comm), 0, rr.makespan);
    rr.compute_busy = b.compute_busy;
    rr.exposed_comm = b.exposed_comm;
    rr.idle = b.idle;
    rr.nodes = std::move(st.timing);
    std::sort(rr.nodes.begin(), rr.nodes.end(),
              [](const NodeTiming& a, const NodeTiming& b) { return a.id < b.id; });
    report.total_time = std::max(report.total_time, rr.makespan);
    report.per_rank.push_back(std::move(rr));
  }

  size_t k = 0;
  for (const CollectiveInstance& c : match.collectives) {
    CommRecord rec;
    rec.group = c.group;
    rec.sequence = c.sequence;
    rec.comm_type = c.comm_type;
    rec.ranks = c.ranks;
    rec.size_bytes = c.size_bytes;
    rec.start = inst_start[k];
    rec.end = rec.start + pending[k].time;
    rec.bus_time = pending[k].time;
    rec.latency_term = pending[k].latency;
    report.total_comm_time += rec.bus_time;
    report.per_collective.push_back(std::move(rec));
    ++k;
  }
  for (const P2PInstance& c : match.p2p) {
    CommRecord rec;
    rec.p2p = true;
    rec.sequence = c.sequence;
    rec.comm_type = CommType::PointToPoint;
    rec.ranks = {c.src, c.dst};
    rec.size_bytes = c.size_bytes;
    rec.start = inst_start[k];
    rec.end = rec.start + pending[k].time;
    rec.bus_time = pending[k].time;
    rec.latency_term = pending[k].latency;
    report.total_comm_time += rec.bus_time;
    report.per_collective.push_back(std::move(rec));
    ++k;
  }
  return report;
}

std::vector<ExecutionTrace> apply_sim_times(const std::vector<ExecutionTrace>& traces,
                                            const SimReport& report) {
  std::vector<ExecutionTrace> out = traces;
  for (ExecutionTrace& t : out)
    for (TraceNode& n : t.nodes) {
      const NodeTiming* tm = report.timing(t.rank, n.id);
      if (!tm)
        throw Error(ErrorCode::UNKNOWN_ID, std::to_string(n.id),
                    "rank " + std::to_string(t.rank) + " node missing from the report");
      n.start_time_micros = tm->start;
      n.duration_micros = tm->end - tm->start;
    }
  return out;
}

std::vector<SweepPoint> sweep(const std::vector<ExecutionTrace>& traces, const SimConfig& base,
                              SweepAxis axis, const std::vector<std::string>& values) {
  std::vector<SimConfig> configs;
  for (const std::string& v : values) {
    SimConfig cfg = base;
    if (axis == SweepAxis::topology) {
      auto t = parse_topology(v);
      if (!t) throw Error(ErrorCode::INVALID_CONFIG, v, "unknown topology");
      cfg.network.topology = *t;
    } else {
      size_t used = 0;
      double mult = 0;
      try {
        mult = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.size() || !(mult > 0))
        throw Error(ErrorCode::INVALID_CONFIG, v, "bandwidth multiplier must be a positive number");
      cfg.network.link_bandwidth = base.network.link_bandwidth * mult;
    }
    configs.push_back(cfg);
  }

  std::vector<SweepPoint> points(values.size());
  std::exception_ptr err;
  size_t err_at = values.size();
  // Each point runs a serial simulation.
#pragma omp parallel for schedule(dynamic, 1)
  for (int64_t i = 0; i < static_cast<int64_t>(values.size()); ++i) {
    try {
      points[i].value = values[i];
      points[i].report = simulate(traces, configs[i]);
    } catch (...) {
#pragma omp critical(chakra_sweep_err)
      if (static_cast<size_t>(i) < err_at) {
        err_at = static_cast<size_t>(i);
        err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "value,total_time,total_comm_time\n";
  for (const SweepPoint& p : points)
    out += p.value + "," + std::to_string(p.report.total_time) + "," +
           std::to_string(p.report.total_comm_time) + "\n";
  return out;
}

std::string collectives_csv(const SimReport& report) {
  std::string out = "kind,group,sequence,comm_type,ranks,size_bytes,start,end,bus_time\n";
  for (const CommRecord& c : report.per_collective) {
    std::string ranks;
    for (size_t i = 0; i < c.ranks.size(); ++i) {
      if (i) ranks += ';';
      ranks += std::to_string(c.ranks[i]);
    }
    out += std::string(c.p2p ? "p2p" : "collective") + "," +
           (c.group ? std::to_string(*c.group) : "") + "," + std::to_string(c.sequence) + "," +
           std::string(to_string(c.comm_type)) + "," + ranks + "," + std::to_string(c.size_bytes) +
           "," + std::to_string(c.start) + "," + std::to_string(c.end) + "," +
           std::to_string(c.bus_time) + "\n";
  }
  return out;
}

Json report_to_json(const SimReport& report, bool include_nodes) {
  Json j;
  j["total_time"] = report.total_time;
  j["total_comm_time"] = report.total_comm_time;
  Json ranks = Json::array();
  for (const RankReport& r : report.per_rank) {
    Json jr{{"rank", r.rank},
            {"makespan", r.makespan},
            {"compute_busy", r.compute_busy},
            {"exposed_comm", r.exposed_comm},
            {"idle", r.idle}};
    if (include_nodes) {
      Json nodes = Json::array();
      for (const NodeTiming& t : r.nodes)
        nodes.push_back({{"id", t.id}, {"issue", t.issue}, {"sim_start", t.start}, {"sim_end", t.end}});
      jr["nodes"] = std::move(nodes);
    }
    ranks.push_back(std::move(jr));
  }
  j["per_rank"] = std::move(ranks);
  Json colls = Json::array();
  for (const CommRecord& c : report.per_collective) {
    Json jc{{"kind", c.p2p ? "p2p" : "collective"},
            {"sequence", c.sequence},
            {"comm_type", std::string(to_string(c.comm_type))},
            {"ranks", c.ranks},
            {"size_bytes", c.size_bytes},
            {"start", c.start},
            {"end", c.end},
            {"bus_time", c.bus_time}};
    if (c.group) jc["group"] = *c.group;
    colls.push_back(std::move(jc));
  }
  j["per_collective"] = std::move(colls);
  j["warnings"] = report.warnings;
  return j;
}

}  // namespace chakra
