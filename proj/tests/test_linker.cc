#include "doctest.h"

#include <chrono>
#include <set>
#include <tuple>

#include "chakra/error.h"
#include "chakra/generator.h"
#include "chakra/linker.h"
#include "linker_goldens.h"

using namespace chakra;

using goldens::edge_set;
using goldens::expected;
using goldens::link_fixture;
constexpr DepType C = DepType::control;

TEST_CASE("fixture golden edge sets") {
  REQUIRE(fixture_names().size() >= 12);
  for (const std::string& name : fixture_names()) {
    CAPTURE(name);
    REQUIRE(expected().count(name) == 1);
    HostDeviceFixture f = make_fixture(name);
    auto t0 = std::chrono::steady_clock::now();
    LinkedGraph g = link_fixture(f);
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    CHECK(edge_set(g) == expected().at(name));
    CHECK(ms < 50.0);
  }
}

TEST_CASE("orphans are reported, not fatal") {
  HostDeviceFixture f = make_fixture("orphans");
  CorrelationMap m = correlate(f.host, f.device);
  CHECK(m.orphans_host == std::vector<uint64_t>{1});
  REQUIRE(m.orphans_device.size() == 1);
  CHECK(m.orphans_device[0] == OrphanDevice{99, 2});
  LinkedGraph g = link(f.host, f.device, m);
  CHECK(g.nodes.size() == 2);
  CHECK(!g.warnings.empty());
}

TEST_CASE("node table kinds") {
  LinkedGraph g = link_fixture(make_fixture("memcpy_chain"));
  REQUIRE(g.nodes.size() == 3);
  CHECK(g.nodes[0].origin == Origin::host);
  CHECK(g.nodes[1].kind == LinkedKind::memcpy_h2d);
  CHECK(g.nodes[2].kind == LinkedKind::kernel);
  CHECK(g.nodes[2].origin == Origin::device);

  LinkedGraph c = link_fixture(make_fixture("call_launch_kernel"));
  CHECK(c.nodes[1].kind == LinkedKind::kernel_launch);
  CHECK(c.nodes[2].launch == 2u);
}

TEST_CASE("control edges alone") {
  HostDeviceFixture f = make_fixture("multi_kernel_launch");
  LinkedGraph g = make_node_table(f.host, f.device, correlate(f.host, f.device));
  CHECK(g.edges.empty());
  auto ctrl = build_control_edges(g);
  dedup_edges(ctrl);
  CHECK(ctrl == std::vector<LinkedEdge>{{1, 2, C, 0}, {1, 3, C, 0}});
}

TEST_CASE("wait on a never-recorded event") {
  HostDeviceFixture f;
  HostOp w;
  w.id = 1;
  w.kind = HostOpKind::sync;
  w.sync_kind = SyncKind::event_wait;
  w.stream = 0;
  w.event_id = 42;
  f.host.ops = {w};
  try {
    link_fixture(f);
    FAIL("expected UNMATCHED_EVENT_WAIT");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UNMATCHED_EVENT_WAIT);
    CHECK(e.detail() == "42");
  }
}

TEST_CASE("overlapping writers warn") {
  HostDeviceFixture f;
  DeviceEvent a, b;
  a.correlation = 1;
  a.stream = 0;
  a.ts = 0;
  a.dur = 10;
  b = a;
  b.correlation = 2;
  b.stream = 1;
  b.ts = 5;
  BufferRef r;
  r.storage_id = 3;
  r.size_bytes = 4;
  a.outputs = {r};
  b.outputs = {r};
  f.device.events = {a, b};
  LinkedGraph g = link_fixture(f);
  bool race = false;
  for (const std::string& w : g.warnings) race |= w.find("WRITE_WRITE_RACE") != std::string::npos;
  CHECK(race);
}

TEST_CASE("linked graph serialization round trip") {
  for (const std::string& name : fixture_names()) {
    LinkedGraph g = link_fixture(make_fixture(name));
    std::string s = serialize_linked(g);
    LinkedGraph back = parse_linked(s);
    CHECK(back.nodes == g.nodes);
    CHECK(back.edges == g.edges);
    CHECK(serialize_linked(back) == s);
  }
}

TEST_CASE("linking is independent of device event listing order") {
  HostDeviceFixture f = make_fixture("device_sync");
  LinkedGraph a = link_fixture(f);
  std::reverse(f.device.events.begin(), f.device.events.end());
  LinkedGraph b = link_fixture(f);
  CHECK(serialize_linked(a) == serialize_linked(b));
}
