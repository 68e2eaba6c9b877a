#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "chakra/cli.h"
#include "chakra/generator.h"
#include "chakra/linker.h"
#include "chakra/trace_io.h"

using namespace chakra;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("chakra_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

Json err_json(const Result& r) { return Json::parse(r.err.substr(0, r.err.find('\n'))); }

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"validate", "--no-such-flag", "x"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
  Result r = cli({"bogus"});
  CHECK(err_json(r)["code"] == "USAGE");
}

TEST_CASE("validate, feed and dot on a generated chain") {
  TempDir d;
  REQUIRE(cli({"generate", "micro", "chain", "--n", "3", "--out", d.path.string()}).code == 0);
  std::string f = d / "trace.rank0.et.json";
  Result v = cli({"validate", f});
  CHECK(v.code == 0);
  CHECK(v.out == "ok: 3 nodes\n");
  CHECK(cli({"feed", f, "--policy", "start-time"}).out == "1\n2\n3\n");
  Result dot = cli({"dot", f});
  CHECK(dot.out.rfind("digraph {", 0) == 0);
  CHECK(cli({"feed", f, "--policy", "lifo"}).code == kExitUsage);
}

TEST_CASE("invalid inputs exit 2, missing files exit 3") {
  TempDir d;
  write_file(d / "bad.et.json", R"({"schema_version":"1.0","rank":0,"num_ranks":1,"nodes":[
      {"id":1,"name":"a","type":"COMP","data_deps":[9]}]})");
  Result r = cli({"validate", d / "bad.et.json"});
  CHECK(r.code == kExitInvalid);
  CHECK(err_json(r)["code"] == "DANGLING_DEP");

  write_file(d / "cyc.et.json", R"({"schema_version":"1.0","rank":0,"num_ranks":1,"nodes":[
      {"id":1,"name":"a","type":"COMP","data_deps":[2]},{"id":2,"name":"b","type":"COMP","data_deps":[1]}]})");
  CHECK(cli({"validate", d / "cyc.et.json"}).code == kExitInvalid);

  Result m = cli({"validate", d / "missing.et.json"});
  CHECK(m.code == kExitIo);
  CHECK(err_json(m)["code"] == "IO_ERROR");
  CHECK(cli({"simulate", "--net", d / "missing.json", "--ranks", d / "*.et.json", "--out", d / "o"}).code ==
        kExitIo);
}

TEST_CASE("convert of a cyclic linked graph") {
  TempDir d;
  HostDeviceFixture f = make_fixture("call_stack");
  LinkedGraph g = link(f.host, f.device, correlate(f.host, f.device));
  g.edges.push_back({3, 1, DepType::control, 0});
  write_file(d / "cyclic.linked.json", serialize_linked(g));
  Result r = cli({"convert", d / "cyclic.linked.json", "--out", d / "x.et.json"});
  CHECK(r.code == kExitInvalid);
  Json e = err_json(r);
  CHECK(e["code"] == "CYCLE_DETECTED");
  CHECK(e["ids"] == Json::array({1, 2, 3}));
  CHECK_FALSE(fs::exists(d / "x.et.json"));
}

TEST_CASE("fixture pipeline") {
  TempDir d;
  std::string dir = d.path.string();
  REQUIRE(cli({"generate", "fixture", "transformer", "--tp", "2", "--pp", "2", "--layers", "2", "--out", dir}).code ==
          0);
  for (int r = 0; r < 4; ++r) {
    std::string base = d / ("transformer.rank" + std::to_string(r));
    REQUIRE(cli({"link", "--host", base + ".host.json", "--device", base + ".device.json", "--out",
                 base + ".linked.json"})
                .code == 0);
    REQUIRE(cli({"convert", base + ".linked.json", "--out", d / ("trace.rank" + std::to_string(r) + ".et.json")})
                .code == 0);
  }
  write_file(d / "net.json", R"({"topology":"ring","link_bandwidth_bytes_per_us":1000,"latency_alpha_us":2})");
  Result s = cli({"simulate", "--net", d / "net.json", "--ranks", d / "trace.rank*.et.json", "--out", d / "sim"});
  REQUIRE(s.code == 0);
  CHECK(fs::exists(d / "sim/simreport.json"));
  CHECK(fs::exists(d / "sim/collectives.csv"));

  Result sw = cli({"sweep", "--net", d / "net.json", "--ranks", d / "trace.rank*.et.json", "--axis", "topology",
                   "--values", "switch,ring,fully_connected"});
  CHECK(sw.code == 0);
  CHECK(sw.out.rfind("value,total_time,total_comm_time\nswitch,", 0) == 0);

  CHECK(cli({"analyze", d / "trace.rank0.et.json", "--all", "--out", d / "ana"}).code == 0);
  for (const char* f : {"counts.csv", "deps.csv", "breakdown.csv", "cdf.csv", "memory.csv", "summary.json"})
    CHECK(fs::exists(d / (std::string("ana/") + f)));
  Result c = cli({"analyze", d / "trace.rank0.et.json", "--report", "counts"});
  CHECK(c.out.rfind("category,key,count\n", 0) == 0);
}

TEST_CASE("threads flag does not change outputs") {
  TempDir d;
  std::string dir = d.path.string();
  REQUIRE(cli({"generate", "transformer", "--tp", "2", "--dp", "2", "--layers", "2", "--skew-us", "20", "--out",
               dir})
              .code == 0);
  write_file(d / "net.json", R"({"topology":"switch","link_bandwidth_bytes_per_us":500,"latency_alpha_us":1})");
  REQUIRE(cli({"--threads", "1", "simulate", "--net", d / "net.json", "--ranks", d / "trace.rank*.et.json", "--out",
               d / "a"})
              .code == 0);
  REQUIRE(cli({"--threads", "4", "simulate", "--net", d / "net.json", "--ranks", d / "trace.rank*.et.json", "--out",
               d / "b"})
              .code == 0);
  CHECK(read_file(d / "a/simreport.json") == read_file(d / "b/simreport.json"));
}
