#include "doctest.h"

#include <random>

#include "chakra/error.h"
#include "chakra/feeder.h"
#include "chakra/generator.h"
#include "oracles.h"

using namespace chakra;

namespace {

TraceNode node(uint64_t id, std::vector<uint64_t> deps = {}, NodeType type = NodeType::COMP) {
  TraceNode n;
  n.id = id;
  n.name = "n" + std::to_string(id);
  n.type = type;
  n.data_deps = std::move(deps);
  return n;
}

ExecutionTrace trace_of(std::vector<TraceNode> nodes) {
  ExecutionTrace t;
  t.nodes = std::move(nodes);
  return t;
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

}  // namespace

TEST_CASE("chain with window 1 opens with the head ready") {
  ExecutionTrace t = trace_of({node(1), node(2, {1}), node(3, {2})});
  Feeder f = open_feeder(t.nodes, {1, FeedPolicy::fifo});
  CHECK(f.ready() == 1);
  auto n = f.next_ready();
  REQUIRE(n);
  CHECK(n->id == 1);
  CHECK_FALSE(f.next_ready());
  f.complete(1);
  CHECK(f.next_ready()->id == 2);
}

TEST_CASE("window extends to reach a later parent") {
  ExecutionTrace t = trace_of({node(1, {2}), node(2)});
  Feeder f = open_feeder(t.nodes, {1, FeedPolicy::fifo});
  CHECK(f.stats().extensions >= 1);
  CHECK(f.next_ready()->id == 2);
  f.complete(2);
  CHECK(f.next_ready()->id == 1);
  f.complete(1);
  CHECK(f.finished());
}

TEST_CASE("mutual dependency deadlocks") {
  ExecutionTrace t = trace_of({node(1, {2}), node(2, {1})});
  try {
    open_feeder(t.nodes, {4, FeedPolicy::fifo});
    FAIL("expected DEADLOCK");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DEADLOCK);
    CHECK(e.ids() == std::vector<uint64_t>{1, 2});
  }
  ExecutionTrace missing = trace_of({node(1), node(2, {9})});
  CHECK(code_of([&] { drain_order(missing, FeedPolicy::fifo); }) == ErrorCode::DEADLOCK);
}

TEST_CASE("policies arbitrate among ready nodes") {
  ExecutionTrace t = trace_of({node(1), node(2, {1}), node(3, {1})});
  CHECK(drain_order(t, FeedPolicy::fifo) == std::vector<uint64_t>{1, 2, 3});
  t.nodes[1].start_time_micros = 9;
  t.nodes[2].start_time_micros = 5;
  CHECK(drain_order(t, FeedPolicy::start_time) == std::vector<uint64_t>{1, 3, 2});
  ExecutionTrace c = trace_of({node(1), node(2, {1}), node(3, {1}, NodeType::COMM_COLL)});
  CHECK(drain_order(c, FeedPolicy::comm_priority) == std::vector<uint64_t>{1, 3, 2});
}

TEST_CASE("complete errors") {
  ExecutionTrace t = trace_of({node(1), node(2, {1})});
  Feeder f = open_feeder(t.nodes, {});
  auto a = f.next_ready();
  CHECK(code_of([&] { f.complete(2); }) == ErrorCode::UNKNOWN_ID);
  f.complete(a->id);
  CHECK(f.ready() == 1);
  CHECK(code_of([&] { f.complete(1); }) == ErrorCode::DOUBLE_COMPLETE);
  CHECK(code_of([&] { f.complete(77); }) == ErrorCode::UNKNOWN_ID);
}

TEST_CASE("config and input errors") {
  ExecutionTrace empty;
  CHECK(code_of([&] { open_feeder(empty.nodes, {}); }) == ErrorCode::EMPTY_TRACE);
  ExecutionTrace one = trace_of({node(1)});
  CHECK(code_of([&] { open_feeder(one.nodes, {0, FeedPolicy::fifo}); }) == ErrorCode::INVALID_CONFIG);
  ExecutionTrace dup = trace_of({node(1), node(1)});
  CHECK(code_of([&] { drain_order(dup, FeedPolicy::fifo); }) == ErrorCode::DUPLICATE_ID);
  CHECK(parse_feed_policy("comm-priority") == FeedPolicy::comm_priority);
  CHECK_FALSE(parse_feed_policy("lifo"));
}

TEST_CASE("diamond and reversed chain") {
  ExecutionTrace d = trace_of({node(1), node(2, {1}), node(3, {1}), node(4, {2, 3})});
  CHECK(drain_order(d, FeedPolicy::fifo) == std::vector<uint64_t>{1, 2, 3, 4});
  ExecutionTrace r = trace_of({node(1, {2}), node(2, {3}), node(3, {4}), node(4, {5}), node(5)});
  for (FeedPolicy p : {FeedPolicy::fifo, FeedPolicy::start_time, FeedPolicy::comm_priority})
    for (size_t w : {1, 2, 16}) CHECK(drain_order(r, p, w) == std::vector<uint64_t>{5, 4, 3, 2, 1});
}

TEST_CASE("random DAGs: valid orders under every policy and window") {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    RandomDagSpec rs;
    rs.n = 300;
    rs.edge_prob = 0.02;
    rs.seed = seed;
    rs.comm_fraction = 0.3;
    rs.ctrl_fraction = 0.3;
    ExecutionTrace t = generate_random_dag(rs);
    std::mt19937_64 rng(seed);
    std::shuffle(t.nodes.begin(), t.nodes.end(), rng);
    for (FeedPolicy p : {FeedPolicy::fifo, FeedPolicy::start_time, FeedPolicy::comm_priority})
      for (size_t w : {1, 7, 64, 4096}) {
        auto order = drain_order(t, p, w);
        CHECK(oracle::is_topological(order, t));
        CHECK(drain_order(t, p, w) == order);
      }
  }
}

TEST_CASE("resident set stays within window for dependency-forward input") {
  RandomDagSpec rs;
  rs.n = 2000;
  rs.edge_prob = 0.005;
  rs.seed = 3;
  ExecutionTrace t = generate_random_dag(rs);
  for (size_t w : {1, 8, 100}) {
    FeederStats st;
    drain_order(t, FeedPolicy::fifo, w, &st);
    CHECK(st.peak_resident <= w);
    CHECK(st.extensions == 0);
    CHECK(st.nodes_read == rs.n);
  }
}
