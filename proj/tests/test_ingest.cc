#include "doctest.h"

#include "chakra/error.h"
#include "chakra/generator.h"
#include "chakra/ingest.h"

using namespace chakra;

namespace {

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorCode::USAGE, "");
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

}  // namespace

TEST_CASE("host trace: call stack") {
  HostTrace h = parse_host_trace(R"({"rank":0,"ops":[
      {"id":1,"name":"A","kind":"call","ts":0,"dur":10},
      {"id":2,"name":"B","kind":"call","parent":1,"ts":1,"dur":5}]})");
  REQUIRE(h.ops.size() == 2);
  CHECK(h.ops[1].parent == 1u);
  CHECK(h.num_ranks == 1);
}

TEST_CASE("host trace: empty ops") {
  HostTrace h = parse_host_trace(R"({"rank":2,"ops":[]})");
  CHECK(h.ops.empty());
  CHECK(h.num_ranks == 3);
}

TEST_CASE("host trace: launch and sync field requirements") {
  Error e = error_of([] { parse_host_trace(R"({"rank":0,"ops":[{"id":1,"name":"L","kind":"kernel_launch","ts":0,"dur":1}]})"); });
  CHECK(e.code() == ErrorCode::MISSING_FIELD);
  CHECK(ends_with(e.detail(), "rf_id"));

  e = error_of([] { parse_host_trace(R"({"rank":0,"ops":[{"id":1,"name":"S","kind":"sync","ts":0,"dur":1}]})"); });
  CHECK(e.code() == ErrorCode::MISSING_FIELD);
  CHECK(ends_with(e.detail(), "sync_kind"));

  e = error_of([] {
    parse_host_trace(R"({"rank":0,"ops":[{"id":1,"name":"S","kind":"sync","sync_kind":"stream","ts":0,"dur":1}]})");
  });
  CHECK(ends_with(e.detail(), "stream"));

  e = error_of([] {
    parse_host_trace(
        R"({"rank":0,"ops":[{"id":1,"name":"W","kind":"sync","sync_kind":"event_wait","stream":1,"ts":0,"dur":1}]})");
  });
  CHECK(ends_with(e.detail(), "event_id"));
}

TEST_CASE("host trace: bad parents and duplicates") {
  CHECK(error_of([] {
          parse_host_trace(R"({"rank":0,"ops":[{"id":1,"name":"A","kind":"call","parent":1,"ts":0,"dur":1}]})");
        }).code() == ErrorCode::DANGLING_PARENT);
  CHECK(error_of([] {
          parse_host_trace(R"({"rank":0,"ops":[{"id":1,"name":"A","kind":"call","parent":5,"ts":0,"dur":1}]})");
        }).code() == ErrorCode::DANGLING_PARENT);
  CHECK(error_of([] {
          parse_host_trace(R"({"rank":0,"ops":[{"id":1,"name":"A","kind":"call","parent":2,"ts":0,"dur":1},
                                              {"id":2,"name":"B","kind":"call","parent":1,"ts":0,"dur":1}]})");
        }).code() == ErrorCode::DANGLING_PARENT);
  CHECK(error_of([] {
          parse_host_trace(R"({"rank":0,"ops":[{"id":1,"name":"A","kind":"call","ts":0,"dur":1},
                                              {"id":1,"name":"B","kind":"call","ts":0,"dur":1}]})");
        }).code() == ErrorCode::DUPLICATE_ID);
}

TEST_CASE("device trace: kernel event and order preservation") {
  DeviceTrace d = parse_device_trace(R"({"rank":0,"events":[
      {"correlation":7,"name":"k","stream":0,"ts":100,"dur":50,"kind":"kernel"},
      {"correlation":8,"name":"j","stream":0,"ts":10,"dur":5,"kind":"kernel"}]})");
  REQUIRE(d.events.size() == 2);
  CHECK(d.events[0].correlation == 7);
  CHECK(d.events[0].dur == 50);
  CHECK(d.events[1].ts == 10);
}

TEST_CASE("device trace: comm fields") {
  Error e = error_of(
      [] { parse_device_trace(R"({"rank":0,"events":[{"correlation":1,"name":"c","stream":0,"ts":0,"dur":1,"kind":"comm"}]})"); });
  CHECK(e.code() == ErrorCode::MISSING_FIELD);
  CHECK(ends_with(e.detail(), "comm"));

  e = error_of([] {
    parse_device_trace(R"({"rank":0,"events":[{"correlation":1,"name":"s","stream":0,"ts":0,"dur":1,"kind":"comm",
        "comm":{"comm_type":"PointToPoint","comm_size_bytes":8,"comm_peer":1}}]})");
  });
  CHECK(ends_with(e.detail(), "direction"));

  e = error_of([] {
    parse_device_trace(R"({"rank":0,"events":[{"correlation":1,"name":"c","stream":0,"ts":0,"dur":1,"kind":"comm",
        "comm":{"comm_type":"AllReduce","comm_size_bytes":8}}]})");
  });
  CHECK(ends_with(e.detail(), "comm_group"));
}

TEST_CASE("correlation: pair, host orphan, device orphan") {
  HostTrace h;
  HostOp l;
  l.id = 1;
  l.name = "launch";
  l.kind = HostOpKind::kernel_launch;
  l.rf_id = 7;
  h.ops = {l};
  DeviceTrace d;
  DeviceEvent k;
  k.correlation = 7;
  k.name = "k";
  d.events = {k};

  CorrelationMap m = correlate(h, d);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs.at(7).host_op == 1);
  CHECK(m.pairs.at(7).device_events == std::vector<uint64_t>{2});
  CHECK(m.orphans_host.empty());
  CHECK(m.orphans_device.empty());

  d.events[0].correlation = 9;
  m = correlate(h, d);
  CHECK(m.pairs.empty());
  CHECK(m.orphans_host == std::vector<uint64_t>{1});
  REQUIRE(m.orphans_device.size() == 1);
  CHECK(m.orphans_device[0].correlation == 9);
  CHECK(!m.warnings.empty());
}

TEST_CASE("correlation: duplicate rf_id") {
  HostTrace h;
  for (uint64_t id : {1, 2}) {
    HostOp l;
    l.id = id;
    l.kind = HostOpKind::kernel_launch;
    l.rf_id = 3;
    h.ops.push_back(l);
  }
  CHECK(error_of([&] { correlate(h, DeviceTrace{}); }).code() == ErrorCode::DUPLICATE_RF_ID);
}

TEST_CASE("device ids follow ts order, independent of listing order") {
  HostTrace h;
  HostOp a;
  a.id = 10;
  h.ops = {a};
  DeviceTrace d;
  for (uint64_t ts : {30, 10, 20}) {
    DeviceEvent e;
    e.correlation = ts;
    e.ts = ts;
    d.events.push_back(e);
  }
  CHECK(assign_device_ids(h, d) == std::vector<uint64_t>{13, 11, 12});
  std::swap(d.events[0], d.events[2]);
  CHECK(assign_device_ids(h, d) == std::vector<uint64_t>{12, 11, 13});
}

TEST_CASE("host and device files round trip") {
  for (const std::string& name : fixture_names()) {
    HostDeviceFixture f = make_fixture(name);
    std::string hs = serialize_host_trace(f.host), ds = serialize_device_trace(f.device);
    CHECK(serialize_host_trace(parse_host_trace(hs)) == hs);
    CHECK(serialize_device_trace(parse_device_trace(ds)) == ds);
  }
}
