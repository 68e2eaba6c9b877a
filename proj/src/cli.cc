#include "chakra/cli.h"

#include <glob.h>
#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "chakra/analyzer.h"
#include "chakra/converter.h"
#include "chakra/dot.h"
#include "chakra/error.h"
#include "chakra/feeder.h"
#include "chakra/generator.h"
#include "chakra/ingest.h"
#include "chakra/json_util.h"
#include "chakra/linker.h"
#include "chakra/simulator.h"
#include "chakra/trace_io.h"
#include "chakra/validate.h"

namespace chakra {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IO_ERROR: return kExitIo;
    case ErrorCode::USAGE:
    case ErrorCode::INVALID_SPEC:
    case ErrorCode::INVALID_CONFIG: return kExitUsage;
    default: return kExitInvalid;
  }
}

void report_error(std::ostream& err, std::string_view code, const std::string& message,
                  const std::vector<uint64_t>& ids = {}) {
  Json j{{"code", std::string(code)}, {"message", message}};
  if (!ids.empty()) j["ids"] = ids;
  err << j.dump() << "\n";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IO_ERROR, dir, "cannot create directory: " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
  std::vector<std::string> files;
  for (const std::string& p : patterns) {
    glob_t g{};
    int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0)
      for (size_t i = 0; i < g.gl_pathc; ++i) files.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    if (rc == GLOB_NOMATCH) throw Error(ErrorCode::IO_ERROR, p, "no file matches '" + p + "'");
    if (rc != 0) throw Error(ErrorCode::IO_ERROR, p, "cannot expand '" + p + "'");
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

std::vector<ExecutionTrace> read_rank_traces(const std::vector<std::string>& patterns) {
  std::vector<std::string> files = expand_globs(patterns);
  std::vector<ExecutionTrace> traces(files.size());
  std::exception_ptr err;
  size_t err_at = files.size();
#pragma omp parallel for schedule(dynamic, 1)
  for (int64_t i = 0; i < static_cast<int64_t>(files.size()); ++i) {
    try {
      traces[i] = read_trace_file(files[i]);
      ValidationReport rep = validate_trace(traces[i]);
      if (!rep.ok())
        throw Error(ErrorCode::INVALID_TRACE, std::string(to_string(rep.errors.front().code)),
                    files[i] + ": " + rep.errors.front().message);
    } catch (...) {
#pragma omp critical(chakra_cli_err)
      if (static_cast<size_t>(i) < err_at) {
        err_at = static_cast<size_t>(i);
        err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  std::sort(traces.begin(), traces.end(),
            [](const ExecutionTrace& a, const ExecutionTrace& b) { return a.rank < b.rank; });
  return traces;
}

std::string rank_file(const std::string& dir, uint64_t rank, const std::string& suffix) {
  return join_path(dir, "trace.rank" + std::to_string(rank) + suffix);
}

void write_traces(const std::string& dir, const std::vector<ExecutionTrace>& traces, const std::string& suffix) {
  ensure_dir(dir);
  for (const ExecutionTrace& t : traces) write_file(rank_file(dir, t.rank, suffix), serialize_trace(t));
}

struct GenFlags {
  GenSpec spec;
  void add(CLI::App* app) {
    app->add_option("--layers", spec.layers, "transformer layers");
    app->add_option("--tp", spec.tp, "tensor-parallel degree");
    app->add_option("--dp", spec.dp, "data-parallel degree");
    app->add_option("--pp", spec.pp, "pipeline stages");
    app->add_option("--microbatches", spec.microbatches, "microbatches per step");
    app->add_option("--grad-buckets", spec.grad_buckets, "data-parallel gradient buckets");
    app->add_option("--gemm-us", spec.gemm_us, "GEMM duration (us)");
    app->add_option("--attn-us", spec.attn_us, "attention duration (us)");
    app->add_option("--elem-us", spec.elem_us, "elementwise duration (us)");
    app->add_option("--hidden-bytes", spec.hidden_bytes, "activation/gradient payload (bytes)");
    app->add_option("--skew-us", spec.skew_us, "per-rank random extra compute (us)");
    app->add_flag("--sp", spec.sequence_parallel, "sequence parallel (AllGather + ReduceScatter)");
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chakra execution-trace toolkit", "chakra"};
  app.require_subcommand(1);

  int threads = 0;
  bool quiet = false;
  uint64_t seed = 0;
  app.add_option("--threads", threads, "worker threads (default: all cores)")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress warnings");
  app.add_option("--seed", seed, "random seed for generators");

  auto warn = [&](const std::vector<std::string>& warnings) {
    if (quiet) return;
    for (const std::string& w : warnings) err << "warning: " << w << "\n";
  };

  // generate
  CLI::App* gen = app.add_subcommand("generate", "synthesize traces");
  gen->require_subcommand(1);
  std::string gen_out = ".";

  CLI::App* gen_tf = gen->add_subcommand("transformer", "per-rank transformer training step");
  GenFlags tf_flags;
  tf_flags.add(gen_tf);
  gen_tf->add_option("--out", gen_out, "output directory");

  CLI::App* gen_micro = gen->add_subcommand("micro", "small test graphs");
  std::string micro_kind;
  MicroSpec micro;
  gen_micro->add_option("kind", micro_kind, "chain | diamond | fanout | comm_pair")
      ->required()
      ->check(CLI::IsMember({"chain", "diamond", "fanout", "comm_pair"}));
  gen_micro->add_option("--n", micro.n, "chain length");
  gen_micro->add_option("--k", micro.k, "fan-out width");
  gen_micro->add_option("--size-bytes", micro.size_bytes, "comm_pair payload");
  gen_micro->add_option("--duration-us", micro.duration_us, "node duration");
  gen_micro->add_option("--out", gen_out, "output directory");

  CLI::App* gen_rand = gen->add_subcommand("random", "random DAG");
  RandomDagSpec rand_spec;
  gen_rand->add_option("--n", rand_spec.n, "node count");
  gen_rand->add_option("--p", rand_spec.edge_prob, "edge probability");
  gen_rand->add_option("--comm-fraction", rand_spec.comm_fraction, "fraction of collective nodes");
  gen_rand->add_option("--out", gen_out, "output directory");

  CLI::App* gen_fix = gen->add_subcommand("fixture", "host/device input pairs for link");
  std::string fixture_name;
  GenFlags fix_flags;
  gen_fix->add_option("name", fixture_name, "fixture name, or 'transformer'")->required();
  fix_flags.add(gen_fix);
  gen_fix->add_option("--out", gen_out, "output directory");

  // link
  CLI::App* lnk = app.add_subcommand("link", "merge host and device traces");
  std::string host_path, device_path, link_out;
  lnk->add_option("--host", host_path, "host trace")->required();
  lnk->add_option("--device", device_path, "device trace")->required();
  lnk->add_option("--out", link_out, "output .linked.json")->required();

  // convert
  CLI::App* cnv = app.add_subcommand("convert", "linked graph to canonical trace");
  std::string convert_in, convert_out;
  ConvertOptions copts;
  bool drop_host = false;
  cnv->add_option("input", convert_in, ".linked.json")->required();
  cnv->add_option("--out", convert_out, "output .et.json")->required();
  cnv->add_flag("--full-reduction", copts.full_transitive_reduction, "full transitive reduction");
  cnv->add_option("--reduction-limit", copts.reduction_node_limit, "node limit for full reduction");
  cnv->add_flag("--drop-host-ops", drop_host, "contract host-only nodes");

  // validate
  CLI::App* val = app.add_subcommand("validate", "structural and acyclicity checks");
  std::string validate_in;
  val->add_option("input", validate_in, ".et.json")->required();

  // feed
  CLI::App* fd = app.add_subcommand("feed", "dependency-ordered emission");
  std::string feed_in, policy_name = "fifo";
  size_t window = 4096;
  fd->add_option("input", feed_in, ".et.json")->required();
  fd->add_option("--policy", policy_name, "fifo | start-time | comm-priority")
      ->check(CLI::IsMember({"fifo", "start-time", "start_time", "comm-priority", "comm_priority"}));
  fd->add_option("--window", window, "nodes per read window")->check(CLI::PositiveNumber);

  // simulate
  CLI::App* sim = app.add_subcommand("simulate", "discrete-event what-if simulation");
  std::string net_path, sim_out = ".", timed_out;
  std::vector<std::string> rank_patterns;
  double compute_scale = 1.0;
  bool no_nodes = false;
  sim->add_option("--net", net_path, ".net.json")->required();
  sim->add_option("--ranks", rank_patterns, "per-rank trace files or globs")->required();
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--compute-scale", compute_scale, "multiplier on compute durations");
  sim->add_option("--timed-out", timed_out, "write traces annotated with simulated times here");
  sim->add_flag("--no-node-times", no_nodes, "omit per-node times from simreport.json");

  // sweep
  CLI::App* swp = app.add_subcommand("sweep", "simulate across bandwidths or topologies");
  std::string axis = "bandwidth", sweep_out;
  std::vector<std::string> values;
  swp->add_option("--net", net_path, "base .net.json")->required();
  swp->add_option("--ranks", rank_patterns, "per-rank trace files or globs")->required();
  swp->add_option("--axis", axis, "bandwidth | topology")->check(CLI::IsMember({"bandwidth", "topology"}));
  swp->add_option("--values", values, "multipliers or topology names")->delimiter(',')->required();
  swp->add_option("--out", sweep_out, "CSV file (default: stdout)");

  // analyze
  CLI::App* ana = app.add_subcommand("analyze", "trace analysis reports");
  std::string analyze_in, report_name, analyze_out, rules_path;
  bool all_reports = false;
  ana->add_option("input", analyze_in, ".et.json")->required();
  auto* rep_opt = ana->add_option("--report", report_name, "counts | breakdown | cdf | deps | memory")
                      ->check(CLI::IsMember({"counts", "breakdown", "cdf", "deps", "memory"}));
  auto* all_opt = ana->add_flag("--all", all_reports, "write every report into --out");
  rep_opt->excludes(all_opt);
  ana->add_option("--out", analyze_out, "output directory for --all");
  ana->add_option("--rules", rules_path, "name-class rules JSON");

  // dot
  CLI::App* dt = app.add_subcommand("dot", "Graphviz DOT rendering");
  std::string dot_in, dot_out, color_by = "dep_type";
  DotOptions dopts;
  dt->add_option("input", dot_in, ".et.json")->required();
  dt->add_option("--max-nodes", dopts.max_nodes, "truncate beyond this many nodes");
  dt->add_option("--color-by", color_by, "dep_type | node_type")
      ->check(CLI::IsMember({"dep_type", "node_type"}));
  dt->add_option("--out", dot_out, "output file (default: stdout)");

  std::vector<std::string> argv_store{"chakra"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "USAGE", e.what());
    return kExitUsage;
  }

  const int prev_threads = omp_get_max_threads();
  if (threads > 0) omp_set_num_threads(threads);
  struct RestoreThreads {
    int n;
    ~RestoreThreads() { omp_set_num_threads(n); }
  } restore{prev_threads};

  try {
    if (gen->parsed()) {
      if (gen_tf->parsed()) {
        tf_flags.spec.seed = seed;
        write_traces(gen_out, generate_transformer(tf_flags.spec), ".et.json");
      } else if (gen_micro->parsed()) {
        micro.kind = micro_kind == "chain"     ? MicroKind::chain
                     : micro_kind == "diamond" ? MicroKind::diamond
                     : micro_kind == "fanout"  ? MicroKind::fanout
                                               : MicroKind::comm_pair;
        write_traces(gen_out, generate_micro(micro), ".et.json");
      } else if (gen_rand->parsed()) {
        rand_spec.seed = seed;
        write_traces(gen_out, {generate_random_dag(rand_spec)}, ".et.json");
      } else if (gen_fix->parsed()) {
        ensure_dir(gen_out);
        std::vector<HostDeviceFixture> fixtures;
        if (fixture_name == "transformer") {
          fix_flags.spec.seed = seed;
          fixtures = transformer_fixture(fix_flags.spec);
        } else {
          fixtures = {make_fixture(fixture_name)};
        }
        for (const HostDeviceFixture& f : fixtures) {
          write_file(join_path(gen_out, f.name + ".host.json"), serialize_host_trace(f.host));
          write_file(join_path(gen_out, f.name + ".device.json"), serialize_device_trace(f.device));
        }
      }
    } else if (lnk->parsed()) {
      HostTrace host = parse_host_trace(read_file(host_path));
      DeviceTrace device = parse_device_trace(read_file(device_path));
      CorrelationMap cmap = correlate(host, device);
      LinkedGraph g = link(host, device, cmap);
      warn(g.warnings);
      write_file(link_out, serialize_linked(g));
    } else if (cnv->parsed()) {
      LinkedGraph g = parse_linked(read_file(convert_in));
      copts.keep_host_ops = !drop_host;
      ExecutionTrace t = convert(g, g.process_groups, copts);
      write_file(convert_out, serialize_trace(t));
    } else if (val->parsed()) {
      ExecutionTrace t = read_trace_file(validate_in);
      ValidationReport rep = validate_trace(t);
      for (const Issue& w : rep.warnings)
        if (!quiet) err << "warning: " << to_string(w.code) << " " << w.object << " " << w.id << ": " << w.message << "\n";
      if (!rep.ok()) {
        const Issue& e = rep.errors.front();
        report_error(err, to_string(e.code),
                     std::to_string(rep.errors.size()) + " error(s); first: " + e.object + " " +
                         std::to_string(e.id) + ": " + e.message);
        return kExitInvalid;
      }
      if (auto cycle = detect_cycle(trace_to_linked(t))) {
        std::ostringstream ids;
        for (size_t i = 0; i < cycle->size(); ++i) ids << (i ? "," : "") << (*cycle)[i];
        report_error(err, "CYCLE_DETECTED", "cycle through nodes " + ids.str(), *cycle);
        return kExitInvalid;
      }
      out << "ok: " << t.nodes.size() << " nodes\n";
    } else if (fd->parsed()) {
      ExecutionTrace t = read_trace_file(feed_in);
      FeedPolicy policy = *parse_feed_policy(policy_name);
      std::string text;
      for (uint64_t id : drain_order(t, policy, window)) text += std::to_string(id) + "\n";
      out << text;
    } else if (sim->parsed()) {
      SimConfig cfg;
      cfg.network = read_network_file(net_path);
      cfg.compute_scale = compute_scale;
      std::vector<ExecutionTrace> traces = read_rank_traces(rank_patterns);
      SimReport rep = simulate(traces, cfg);
      warn(rep.warnings);
      ensure_dir(sim_out);
      write_file(join_path(sim_out, "simreport.json"), report_to_json(rep, !no_nodes).dump(2) + "\n");
      write_file(join_path(sim_out, "collectives.csv"), collectives_csv(rep));
      if (!timed_out.empty()) write_traces(timed_out, apply_sim_times(traces, rep), ".sim.et.json");
    } else if (swp->parsed()) {
      SimConfig cfg;
      cfg.network = read_network_file(net_path);
      std::vector<ExecutionTrace> traces = read_rank_traces(rank_patterns);
      std::string csv = sweep_csv(sweep(traces, cfg, axis == "topology" ? SweepAxis::topology : SweepAxis::bandwidth, values));
      if (sweep_out.empty())
        out << csv;
      else
        write_file(sweep_out, csv);
    } else if (ana->parsed()) {
      ExecutionTrace t = read_trace_file(analyze_in);
      NameClassifier rules = rules_path.empty() ? NameClassifier()
                                                : parse_name_rules(jsonutil::parse_document(read_file(rules_path)));
      if (all_reports) {
        if (analyze_out.empty()) throw Error(ErrorCode::USAGE, "--out", "--all needs --out");
        ensure_dir(analyze_out);
        CountTable counts = op_counts(t, rules);
        auto hist = dependency_histogram(t);
        write_file(join_path(analyze_out, "counts.csv"), counts_csv(counts));
        write_file(join_path(analyze_out, "deps.csv"), deps_csv(hist));
        Json summary;
        summary["nodes"] = t.nodes.size();
        summary["rank"] = t.rank;
        bool timed = !t.nodes.empty() && std::all_of(t.nodes.begin(), t.nodes.end(), [](const TraceNode& n) {
          return n.start_time_micros && n.duration_micros;
        });
        summary["timed"] = timed;
        if (timed) {
          Breakdown b = runtime_breakdown(t);
          MemoryTimeline m = memory_timeline(t);
          write_file(join_path(analyze_out, "breakdown.csv"), breakdown_csv(b));
          write_file(join_path(analyze_out, "cdf.csv"), cdf_csv(duration_cdf(t)));
          write_file(join_path(analyze_out, "memory.csv"), memory_csv(m));
          summary["breakdown"] = {{"span", b.span},
                                  {"compute_busy", b.compute_busy},
                                  {"exposed_comm", b.exposed_comm},
                                  {"idle", b.idle}};
          summary["peak_memory_bytes"] = m.peak_bytes;
        }
        Json by_type = Json::object();
        for (const auto& [k, v] : counts.by_node_type) by_type[std::string(to_string(k))] = v;
        summary["node_types"] = by_type;
        write_file(join_path(analyze_out, "summary.json"), summary.dump(2) + "\n");
      } else {
        if (report_name.empty()) throw Error(ErrorCode::USAGE, "--report", "pass --report or --all");
        if (report_name == "counts") out << counts_csv(op_counts(t, rules));
        else if (report_name == "breakdown") out << breakdown_csv(runtime_breakdown(t));
        else if (report_name == "cdf") out << cdf_csv(duration_cdf(t));
        else if (report_name == "deps") out << deps_csv(dependency_histogram(t));
        else out << memory_csv(memory_timeline(t));
      }
    } else if (dt->parsed()) {
      ExecutionTrace t = read_trace_file(dot_in);
      dopts.color_by = color_by == "node_type" ? DotColorBy::node_type : DotColorBy::dep_type;
      std::string text = emit_dot(t, dopts);
      if (dot_out.empty())
        out << text;
      else
        write_file(dot_out, text);
    }
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what(), e.ids());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    report_error(err, "INTERNAL", e.what());
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace chakra
