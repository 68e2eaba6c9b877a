#include "chakra/analyzer.h"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "chakra/error.h"
#include "chakra/json_util.h"

namespace chakra {

using namespace jsonutil;

namespace {

std::vector<NameRule> default_rules() {
  return {
      {"GeMM", "gemm|matmul"},
      {"Attn", "attention|attn|flash"},
      {"ElemWise", "add|mul|relu|gelu|elementwise"},
  };
}

constexpr NodeType kNodeTypes[] = {NodeType::COMP,      NodeType::MEM_LOAD,  NodeType::MEM_STORE,
                                   NodeType::COMM_COLL, NodeType::COMM_SEND, NodeType::COMM_RECV};
constexpr CommType kCommTypes[] = {CommType::AllReduce,    CommType::AllGather, CommType::ReduceScatter,
                                   CommType::Broadcast,    CommType::PointToPoint, CommType::All2All,
                                   CommType::Barrier};

void require_timing(const TraceNode& n) {
  if (!n.start_time_micros || !n.duration_micros)
    throw Error(ErrorCode::MISSING_TIMING, std::to_string(n.id), "node has no recorded start/duration",
                {n.id});
}

}  // namespace

NameClassifier::NameClassifier() : NameClassifier(default_rules()) {}

NameClassifier::NameClassifier(std::vector<NameRule> rules) : rules_(std::move(rules)) {
  for (const NameRule& r : rules_) {
    try {
      compiled_.emplace_back(r.pattern, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::INVALID_CONFIG, r.name_class, "bad name pattern '" + r.pattern + "'");
    }
    if (r.name_class == others_)
      throw Error(ErrorCode::INVALID_CONFIG, r.name_class, "'Others' is reserved for unmatched names");
  }
}

const std::string& NameClassifier::classify(const std::string& name) const {
  for (size_t i = 0; i < rules_.size(); ++i)
    if (std::regex_search(name, compiled_[i])) return rules_[i].name_class;
  return others_;
}

std::vector<std::string> NameClassifier::classes() const {
  std::vector<std::string> out;
  for (const NameRule& r : rules_)
    if (std::find(out.begin(), out.end(), r.name_class) == out.end()) out.push_back(r.name_class);
  out.push_back(others_);
  return out;
}

NameClassifier parse_name_rules(const Json& doc) {
  expect_array(doc, "");
  std::vector<NameRule> rules;
  for (size_t i = 0; i < doc.size(); ++i) {
    std::string path = index_path("", i);
    expect_object(doc[i], path);
    rules.push_back({req_string(doc[i], "class", path), req_string(doc[i], "pattern", path)});
  }
  return NameClassifier(std::move(rules));
}

CountTable op_counts(const ExecutionTrace& trace, const NameClassifier& rules) {
  CountTable c;
  for (NodeType t : kNodeTypes) c.by_node_type[t] = 0;
  for (CommType t : kCommTypes) c.by_comm_type[t] = 0;
  for (const std::string& k : rules.classes()) c.by_name_class[k] = 0;
  std::unordered_map<std::string_view, const std::string*> memo;
  for (const TraceNode& n : trace.nodes) {
    ++c.by_node_type[n.type];
    if (is_comm(n.type)) {
      if (auto ca = comm_attrs(n)) ++c.by_comm_type[ca->comm_type];
    } else if (n.type == NodeType::COMP) {
      auto [it, fresh] = memo.try_emplace(n.name, nullptr);
      if (fresh) it->second = &rules.classify(n.name);
      ++c.by_name_class[*it->second];
    }
  }
  return c;
}

Breakdown runtime_breakdown(const ExecutionTrace& trace) {
  std::vector<Interval> compute, comm;
  uint64_t lo = std::numeric_limits<uint64_t>::max(), hi = 0;
  for (const TraceNode& n : trace.nodes) {
    require_timing(n);
    Interval iv{*n.start_time_micros, *n.start_time_micros + *n.duration_micros};
    lo = std::min(lo, iv.begin);
    hi = std::max(hi, iv.end);
    (is_comm(n.type) ? comm : compute).push_back(iv);
  }
  if (trace.nodes.empty()) return {};
  return busy_breakdown(std::move(compute), std::move(comm), lo, hi);
}

std::vector<CdfPoint> duration_cdf(const ExecutionTrace& trace) {
  if (trace.nodes.empty()) throw Error(ErrorCode::MISSING_TIMING, "", "trace has no timed nodes");
  std::vector<uint64_t> d;
  d.reserve(trace.nodes.size());
  for (const TraceNode& n : trace.nodes) {
    if (!n.duration_micros)
      throw Error(ErrorCode::MISSING_TIMING, std::to_string(n.id), "node has no duration", {n.id});
    d.push_back(*n.duration_micros);
  }
  std::sort(d.begin(), d.end());
  std::vector<CdfPoint> out;
  for (size_t i = 0; i < d.size(); ++i)
    if (i + 1 == d.size() || d[i + 1] != d[i]) out.push_back({d[i], i + 1, d.size()});
  return out;
}

std::map<uint64_t, uint64_t> dependency_histogram(const ExecutionTrace& trace) {
  std::map<uint64_t, uint64_t> h;
  for (const TraceNode& n : trace.nodes) {
    std::vector<uint64_t> deps = n.data_deps;
    sort_unique(deps);
    ++h[deps.size()];
  }
  return h;
}

MemoryTimeline memory_timeline(const ExecutionTrace& trace) {
  std::unordered_map<uint64_t, uint64_t> tensor_storage;
  for (const TensorDesc& t : trace.tensors) tensor_storage.emplace(t.id, t.storage_id);
  struct Life {
    std::optional<uint64_t> produced;  // earliest producer start
    uint64_t first_touch = std::numeric_limits<uint64_t>::max();
    uint64_t last_end = 0;
  };
  std::unordered_map<uint64_t, Life> life;
  for (const TraceNode& n : trace.nodes) {
    if (n.inputs.empty() && n.outputs.empty()) continue;
    require_timing(n);
    const uint64_t s = *n.start_time_micros, e = s + *n.duration_micros;
    auto touch = [&](uint64_t tensor, bool output) {
      auto it = tensor_storage.find(tensor);
      if (it == tensor_storage.end()) return;
      Life& l = life[it->second];
      l.first_touch = std::min(l.first_touch, s);
      l.last_end = std::max(l.last_end, e);
      if (output) l.produced = l.produced ? std::min(*l.produced, s) : s;
    };
    for (uint64_t t : n.inputs) touch(t, false);
    for (uint64_t t : n.outputs) touch(t, true);
  }

  std::unordered_map<uint64_t, uint64_t> size;
  for (const StorageDesc& s : trace.storages) size.emplace(s.id, s.size_bytes);
  std::map<uint64_t, int64_t> delta;
  for (const auto& [sid, l] : life) {
    uint64_t begin = l.produced.value_or(l.first_touch);
    if (l.last_end <= begin) continue;
    auto bytes = static_cast<int64_t>(size.count(sid) ? size.at(sid) : 0);
    delta[begin] += bytes;
    delta[l.last_end] -= bytes;
  }

  MemoryTimeline m;
  int64_t live = 0;
  for (const auto& [t, d] : delta) {
    if (d == 0) continue;
    live += d;
    m.samples.push_back({t, static_cast<uint64_t>(live)});
    m.peak_bytes = std::max(m.peak_bytes, static_cast<uint64_t>(live));
  }
  return m;
}

std::string counts_csv(const CountTable& c) {
  std::string out = "category,key,count\n";
  for (const auto& [k, v] : c.by_node_type)
    out += "node_type," + std::string(to_string(k)) + "," + std::to_string(v) + "\n";
  for (const auto& [k, v] : c.by_comm_type)
    out += "comm_type," + std::string(to_string(k)) + "," + std::to_string(v) + "\n";
  for (const auto& [k, v] : c.by_name_class) out += "name_class," + k + "," + std::to_string(v) + "\n";
  return out;
}

std::string breakdown_csv(const Breakdown& b) {
  return "span,compute_busy,exposed_comm,idle\n" + std::to_string(b.span) + "," +
         std::to_string(b.compute_busy) + "," + std::to_string(b.exposed_comm) + "," +
         std::to_string(b.idle) + "\n";
}

std::string cdf_csv(const std::vector<CdfPoint>& cdf) {
  std::string out = "duration_us,cum_count,total\n";
  for (const CdfPoint& p : cdf)
    out += std::to_string(p.duration) + "," + std::to_string(p.cum_count) + "," + std::to_string(p.total) + "\n";
  return out;
}

std::string deps_csv(const std::map<uint64_t, uint64_t>& hist) {
  std::string out = "in_degree,nodes\n";
  for (const auto& [k, v] : hist) out += std::to_string(k) + "," + std::to_string(v) + "\n";
  return out;
}

std::string memory_csv(const MemoryTimeline& m) {
  std::string out = "t_us,live_bytes\n";
  for (const MemorySample& s : m.samples)
    out += std::to_string(s.t) + "," + std::to_string(s.live_bytes) + "\n";
  return out;
}

}  // namespace chakra
