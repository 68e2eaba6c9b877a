#include "doctest.h"

#include "chakra/error.h"
#include "chakra/generator.h"
#include "chakra/trace_io.h"
#include "chakra/validate.h"

using namespace chakra;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::USAGE;
}

std::string detail_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.detail();
  }
  FAIL("expected an error");
  return {};
}

TraceNode comp(uint64_t id, std::vector<uint64_t> data = {}) {
  TraceNode n;
  n.id = id;
  n.name = "op" + std::to_string(id);
  n.data_deps = std::move(data);
  return n;
}

}  // namespace

TEST_CASE("minimal document parses to an empty trace") {
  auto t = parse_trace(
      R"({"schema_version":"1.0","rank":0,"num_ranks":1,"process_groups":[],"tensors":[],"storages":[],"nodes":[]})");
  CHECK(t.rank == 0);
  CHECK(t.nodes.empty());
  CHECK(validate_trace(t).ok());
}

TEST_CASE("missing node id names the path") {
  auto bad = R"({"schema_version":"1.0","rank":0,"num_ranks":1,"process_groups":[],"tensors":[],
                 "storages":[],"nodes":[{"name":"a","type":"COMP"}]})";
  CHECK(code_of([&] { parse_trace(bad); }) == ErrorCode::MISSING_FIELD);
  CHECK(detail_of([&] { parse_trace(bad); }) == "nodes[0].id");
}

TEST_CASE("malformed json and wrong types") {
  CHECK(code_of([] { parse_trace("{"); }) == ErrorCode::MALFORMED_JSON);
  auto bad_type = R"({"schema_version":"1.0","rank":"zero","num_ranks":1,"nodes":[]})";
  CHECK(code_of([&] { parse_trace(bad_type); }) == ErrorCode::TYPE_MISMATCH);
  auto bad_node = R"({"schema_version":"1.0","rank":0,"num_ranks":1,"nodes":[{"id":1,"name":"a","type":"GPU"}]})";
  CHECK(code_of([&] { parse_trace(bad_node); }) == ErrorCode::UNKNOWN_NODE_TYPE);
}

TEST_CASE("data_deps map to exactly one edge") {
  auto t = parse_trace(R"({"schema_version":"1.0","rank":0,"num_ranks":1,"nodes":[
      {"id":1,"name":"a","type":"COMP"},{"id":2,"name":"b","type":"COMP","data_deps":[1]}]})");
  REQUIRE(t.nodes.size() == 2);
  CHECK(t.nodes[0].data_deps.empty());
  CHECK(t.nodes[1].data_deps == std::vector<uint64_t>{1});
  CHECK(t.nodes[1].ctrl_deps.empty());
}

TEST_CASE("canonical form sorts nodes and dedups deps") {
  ExecutionTrace t;
  t.nodes = {comp(3), comp(2), comp(1)};
  t.nodes[0].ctrl_deps = {2, 1, 1};
  std::string s = serialize_trace(t);
  ExecutionTrace back = parse_trace(s);
  REQUIRE(back.nodes.size() == 3);
  CHECK(back.nodes[0].id == 1);
  CHECK(back.nodes[2].ctrl_deps == std::vector<uint64_t>{1, 2});
  CHECK(serialize_trace(back) == s);
  CHECK(s.back() == '\n');
}

TEST_CASE("unknown keys survive a round trip") {
  std::string in = R"({"schema_version":"1.0","rank":0,"num_ranks":1,"custom":{"x":1},"nodes":[
      {"id":1,"name":"a","type":"COMP","vendor_field":[1,2]}]})";
  ExecutionTrace t = parse_trace(in);
  CHECK(t.extra.count("custom") == 1);
  CHECK(t.nodes[0].attrs.count("vendor_field") == 1);
  CHECK(parse_trace(serialize_trace(t)) == canonicalized(t));
}

TEST_CASE("serialize rejects invalid traces") {
  ExecutionTrace t;
  t.nodes = {comp(1, {99})};
  CHECK(code_of([&] { serialize_trace(t); }) == ErrorCode::INVALID_TRACE);
  CHECK_NOTHROW(serialize_trace_unchecked(t));
}

TEST_CASE("validate: chain, dangling dep, missing comm attr") {
  ExecutionTrace t;
  t.nodes = {comp(1), comp(2, {1}), comp(3, {2})};
  CHECK(validate_trace(t).ok());

  ExecutionTrace d;
  d.nodes = {comp(1, {99})};
  auto rep = validate_trace(d);
  CHECK(rep.errors.size() == 1);
  CHECK(rep.count(IssueCode::DANGLING_DEP) == 1);

  ExecutionTrace c;
  c.process_groups = {{0, {0}}};
  TraceNode n = comp(1);
  n.type = NodeType::COMM_COLL;
  set_comm_attrs(n, CommAttrs{CommType::AllReduce, 0, std::nullopt, 64, std::nullopt, {}});
  n.attrs.erase("comm_type");
  c.nodes = {n};
  auto rc = validate_trace(c);
  CHECK(rc.errors.size() == 1);
  CHECK(rc.count(IssueCode::MISSING_COMM_ATTR) == 1);
}

TEST_CASE("validate: self dep, duplicate id, unknown group") {
  ExecutionTrace t;
  t.nodes = {comp(1, {1}), comp(1)};
  auto rep = validate_trace(t);
  CHECK(rep.count(IssueCode::SELF_DEP) == 1);
  CHECK(rep.count(IssueCode::DUPLICATE_ID) == 1);

  ExecutionTrace g;
  TraceNode n = comp(1);
  n.type = NodeType::COMM_COLL;
  set_comm_attrs(n, CommAttrs{CommType::AllReduce, 7, std::nullopt, 64, std::nullopt, {}});
  g.nodes = {n};
  CHECK(validate_trace(g).count(IssueCode::UNKNOWN_GROUP) == 1);
  g.process_groups = {{7, {0}}};
  CHECK(validate_trace(g).ok());
}

TEST_CASE("validate: tensors, storages and overflow") {
  ExecutionTrace t;
  t.storages = {{1, 16, "cuda:0"}};
  TensorDesc td;
  td.id = 5;
  td.storage_id = 1;
  td.shape = {8};
  td.stride = {1};
  td.dtype = DType::fp32;
  td.size_bytes = 32;
  t.tensors = {td};
  TraceNode n = comp(1);
  n.outputs = {5};
  t.nodes = {n};
  CHECK(validate_trace(t).count(IssueCode::STORAGE_OVERFLOW) == 1);
  t.storages[0].size_bytes = 32;
  CHECK(validate_trace(t).ok());
  t.nodes[0].inputs = {6};
  CHECK(validate_trace(t).count(IssueCode::DANGLING_TENSOR) == 1);
  t.nodes[0].inputs.clear();
  t.tensors[0].storage_id = 2;
  CHECK(validate_trace(t).count(IssueCode::DANGLING_STORAGE) == 1);
}

TEST_CASE("strided extent") {
  TensorDesc t;
  t.shape = {2, 3};
  t.stride = {4, 1};
  t.dtype = DType::fp16;
  CHECK(tensor_extent_bytes(t) == (1 + 1 * 4 + 2 * 1) * 2);
  t.shape = {0, 3};
  CHECK(tensor_extent_bytes(t) == 0);
  CHECK(contiguous_stride({2, 3, 4}) == std::vector<int64_t>{12, 4, 1});
}

TEST_CASE("comm attrs round trip through node attrs") {
  TraceNode n = comp(1);
  CommAttrs a{CommType::ReduceScatter, 3, std::string("tp"), 4096, std::nullopt, {1, 2}};
  set_comm_attrs(n, a);
  auto back = comm_attrs(n);
  REQUIRE(back);
  CHECK(*back == a);
}

TEST_CASE("generated traces round trip and reach a canonical fixpoint") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RandomDagSpec rs;
    rs.n = 40;
    rs.edge_prob = 0.1;
    rs.seed = seed;
    rs.comm_fraction = 0.2;
    rs.ctrl_fraction = 0.3;
    ExecutionTrace t = generate_random_dag(rs);
    std::string s = serialize_trace(t);
    CHECK(parse_trace(s) == canonicalized(t));
    CHECK(serialize_trace(parse_trace(s)) == s);
  }
}
