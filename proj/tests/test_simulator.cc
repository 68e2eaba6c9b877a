#include "doctest.h"

#include "chakra/error.h"
#include "chakra/generator.h"
#include "chakra/simulator.h"

using namespace chakra;

namespace {

TraceNode comp(uint64_t id, uint64_t dur, std::vector<uint64_t> deps = {}) {
  TraceNode n;
  n.id = id;
  n.name = "comp" + std::to_string(id);
  n.duration_micros = dur;
  n.data_deps = std::move(deps);
  return n;
}

TraceNode coll(uint64_t id, uint64_t group, uint64_t bytes, std::vector<uint64_t> deps = {},
               std::optional<std::string> tag = std::nullopt, CommType type = CommType::AllReduce) {
  TraceNode n;
  n.id = id;
  n.name = "coll" + std::to_string(id);
  n.type = NodeType::COMM_COLL;
  n.data_deps = std::move(deps);
  set_comm_attrs(n, CommAttrs{type, group, tag, bytes, std::nullopt, {}});
  return n;
}

TraceNode p2p(uint64_t id, bool send, uint64_t peer, uint64_t bytes, std::vector<uint64_t> deps = {},
              std::optional<std::string> tag = std::nullopt) {
  TraceNode n;
  n.id = id;
  n.name = send ? "send" : "recv";
  n.type = send ? NodeType::COMM_SEND : NodeType::COMM_RECV;
  n.data_deps = std::move(deps);
  set_comm_attrs(n, CommAttrs{CommType::PointToPoint, std::nullopt, tag, bytes, peer, {}});
  return n;
}

std::vector<ExecutionTrace> ranks(std::vector<std::vector<TraceNode>> per_rank,
                                  std::vector<ProcessGroup> groups = {{0, {0, 1}}}) {
  std::vector<ExecutionTrace> out;
  for (size_t r = 0; r < per_rank.size(); ++r) {
    ExecutionTrace t;
    t.rank = r;
    t.num_ranks = per_rank.size();
    t.process_groups = groups;
    t.nodes = per_rank[r];
    out.push_back(t);
  }
  return out;
}

SimConfig config(double bw, double alpha, Topology topo = Topology::switch_) {
  SimConfig c;
  c.network.topology = topo;
  c.network.link_bandwidth = bw;
  c.network.latency_alpha = alpha;
  return c;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::USAGE;
}

// Every edge u -> v satisfies end(u) <= start(v), and every collective instance
// starts and ends at the same time on all members.
void check_schedule(const std::vector<ExecutionTrace>& traces, const SimReport& rep) {
  for (const ExecutionTrace& t : traces)
    for (const TraceNode& n : t.nodes) {
      const NodeTiming* v = rep.timing(t.rank, n.id);
      REQUIRE(v);
      CHECK(v->issue <= v->start);
      for (const auto* deps : {&n.data_deps, &n.ctrl_deps})
        for (uint64_t d : *deps) CHECK(rep.timing(t.rank, d)->end <= v->start);
    }
  MatchResult m = match_collectives(traces);
  for (const CollectiveInstance& c : m.collectives) {
    const NodeTiming* first = rep.timing(c.members.begin()->first, c.members.begin()->second);
    for (const auto& [r, id] : c.members) {
      CHECK(rep.timing(r, id)->start == first->start);
      CHECK(rep.timing(r, id)->end == first->end);
    }
  }
}

}  // namespace

TEST_CASE("serial chain on one rank") {
  auto tr = ranks({{comp(1, 10), comp(2, 10, {1})}}, {});
  SimReport rep = simulate(tr, config(100, 0));
  CHECK(rep.total_time == 20);
  CHECK(rep.per_rank[0].compute_busy == 20);
  CHECK(rep.per_rank[0].idle == 0);
}

TEST_CASE("compute overlaps an independent collective") {
  // AllReduce over 2 ranks at alpha 0: 2 * (1/2) * 600 / 100 = 6 us.
  auto tr = ranks({{comp(1, 10), coll(2, 0, 600)}, {coll(1, 0, 600)}});
  SimReport rep = simulate(tr, config(100, 0));
  CHECK(rep.per_rank[0].makespan == 10);
  CHECK(rep.per_rank[0].exposed_comm == 0);
  CHECK(rep.per_rank[0].compute_busy == 10);
  CHECK(rep.timing(0, 2)->end == 6);
  CHECK(rep.total_time == 10);
  CHECK(rep.total_comm_time == 6);
}

TEST_CASE("collective starts at the latest issue") {
  auto tr = ranks({{coll(1, 0, 600)}, {comp(1, 5), coll(2, 0, 600, {1})}});
  SimReport rep = simulate(tr, config(100, 0));
  CHECK(rep.timing(0, 1)->issue == 0);
  CHECK(rep.timing(0, 1)->start == 5);
  CHECK(rep.timing(1, 2)->start == 5);
  CHECK(rep.timing(0, 1)->end == 11);
  CHECK(rep.timing(1, 2)->end == 11);
  // rank 0 waits 0..5 idle, then 6 us exposed
  CHECK(rep.per_rank[0].idle == 5);
  CHECK(rep.per_rank[0].exposed_comm == 6);
  check_schedule(tr, rep);
}

TEST_CASE("matching") {
  MatchResult m = match_collectives(ranks({{coll(1, 0, 64)}, {coll(1, 0, 64)}}));
  REQUIRE(m.collectives.size() == 1);
  CHECK(m.collectives[0].members.size() == 2);

  CHECK(code_of([] { match_collectives(ranks({{coll(1, 0, 64), coll(2, 0, 64, {1})}, {coll(1, 0, 64)}})); }) ==
        ErrorCode::GROUP_SEQUENCE_MISMATCH);
  CHECK(code_of([] {
          match_collectives(ranks({{coll(1, 0, 64, {}, "fwd")}, {coll(1, 0, 64, {}, "bwd")}}));
        }) == ErrorCode::TAG_MISMATCH);
  CHECK(code_of([] {
          match_collectives(ranks({{coll(1, 0, 64, {}, std::nullopt, CommType::AllGather)}, {coll(1, 0, 64)}}));
        }) == ErrorCode::GROUP_SEQUENCE_MISMATCH);

  MatchResult pm = match_collectives(ranks({{coll(1, 0, 64)}, {coll(1, 0, 128)}}));
  CHECK(pm.collectives[0].size_bytes == 128);
  CHECK(!pm.warnings.empty());
}

TEST_CASE("group definitions must agree across ranks") {
  auto tr = ranks({{coll(1, 0, 64)}, {coll(1, 0, 64)}});
  tr[1].process_groups[0].ranks = {0, 1, 2};
  tr[1].num_ranks = 3;
  CHECK_THROWS_AS(match_collectives(tr), Error);
}

TEST_CASE("point-to-point pairing and timing") {
  // P2P at alpha 0 on a switch: 1 * 500 / 100 = 5 us after both sides issue.
  auto tr = ranks({{comp(1, 3), p2p(2, true, 1, 500, {1})}, {p2p(1, false, 0, 500), comp(2, 1, {1})}});
  MatchResult m = match_collectives(tr);
  REQUIRE(m.p2p.size() == 1);
  CHECK(m.p2p[0].src == 0);
  CHECK(m.p2p[0].send_node == 2);
  SimReport rep = simulate(tr, config(100, 0));
  CHECK(rep.timing(1, 1)->start == 3);
  CHECK(rep.timing(1, 1)->end == 8);
  CHECK(rep.timing(1, 2)->start == 8);
  check_schedule(tr, rep);

  auto unpaired = ranks({{p2p(1, true, 1, 8)}, {}});
  CHECK(code_of([&] { match_collectives(unpaired); }) == ErrorCode::UNPAIRED_SEND_RECV);
}

TEST_CASE("bidirectional exchange does not deadlock") {
  auto tr = ranks({{p2p(1, true, 1, 100), p2p(2, false, 1, 100)}, {p2p(1, true, 0, 100), p2p(2, false, 0, 100)}});
  SimReport rep = simulate(tr, config(100, 0));
  CHECK(rep.total_time == 1);
}

TEST_CASE("cross-rank deadlock is reported") {
  // Rank 0 runs group 0 then group 1, rank 1 the reverse.
  std::vector<ProcessGroup> g{{0, {0, 1}}, {1, {0, 1}}};
  auto tr = ranks({{coll(1, 0, 8), coll(2, 1, 8, {1})}, {coll(1, 1, 8), coll(2, 0, 8, {1})}}, g);
  CHECK(code_of([&] { simulate(tr, config(100, 0)); }) == ErrorCode::DEADLOCK);
}

TEST_CASE("missing durations warn and count as zero") {
  TraceNode n = comp(1, 0);
  n.duration_micros.reset();
  auto tr = ranks({{n, comp(2, 4, {1})}}, {});
  SimReport rep = simulate(tr, config(100, 0));
  CHECK(rep.total_time == 4);
  CHECK(!rep.warnings.empty());
}

TEST_CASE("compute scale") {
  auto tr = ranks({{comp(1, 10), comp(2, 10, {1})}}, {});
  SimConfig c = config(100, 0);
  c.compute_scale = 0.5;
  CHECK(simulate(tr, c).total_time == 10);
}

TEST_CASE("generated workloads respect edges and synchrony") {
  GenSpec s;
  s.layers = 2;
  s.tp = 2;
  s.dp = 2;
  s.pp = 2;
  s.microbatches = 2;
  s.grad_buckets = 2;
  s.skew_us = 30;
  s.seed = 5;
  auto tr = generate_transformer(s);
  SimReport rep = simulate(tr, config(1000, 2, Topology::ring));
  check_schedule(tr, rep);
  for (const RankReport& r : rep.per_rank)
    CHECK(r.compute_busy + r.exposed_comm + r.idle == r.makespan);
  CHECK(simulate(tr, config(1000, 2, Topology::ring)).total_time == rep.total_time);
}

TEST_CASE("doubling bandwidth halves comm time at alpha 0") {
  GenSpec s;
  s.layers = 2;
  s.tp = 4;
  s.hidden_bytes = 1 << 20;
  auto tr = generate_transformer(s);
  SimReport a = simulate(tr, config(1024, 0));
  SimReport b = simulate(tr, config(2048, 0));
  CHECK(a.total_comm_time == 2 * b.total_comm_time);
}

TEST_CASE("sweep keeps the value order and matches direct runs") {
  auto tr = generate_micro({MicroKind::comm_pair});
  SimConfig base = config(100, 1);
  auto pts = sweep(tr, base, SweepAxis::bandwidth, {"1", "2", "4"});
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].value == "1");
  SimConfig c2 = base;
  c2.network.link_bandwidth = 200;
  CHECK(pts[1].report.total_comm_time == simulate(tr, c2).total_comm_time);
  auto topo = sweep(tr, base, SweepAxis::topology, {"switch", "ring", "fully_connected"});
  CHECK(topo.size() == 3);
  CHECK(sweep_csv(pts).rfind("value,total_time,total_comm_time\n", 0) == 0);
  CHECK(collectives_csv(pts[0].report).rfind("kind,group,sequence,comm_type,ranks,size_bytes,start,end,bus_time\n", 0) == 0);
}

TEST_CASE("apply_sim_times writes simulated timing back") {
  auto tr = ranks({{comp(1, 10), comp(2, 10, {1})}}, {});
  SimReport rep = simulate(tr, config(100, 0));
  auto timed = apply_sim_times(tr, rep);
  CHECK(timed[0].nodes[1].start_time_micros == 10u);
  CHECK(timed[0].nodes[1].duration_micros == 10u);
  Json j = report_to_json(rep);
  CHECK(j["total_time"] == 20);
}
