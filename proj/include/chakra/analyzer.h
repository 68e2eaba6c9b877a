#pragma once

// Per-trace analysis reports: operation counts, runtime breakdown, duration
// CDF, data-dependency histogram and a storage-lifetime memory timeline.

#include <cstdint>
#include <map>
#include <regex>
#include <string>
#include <vector>

#include "chakra/intervals.h"
#include "chakra/schema.h"

namespace chakra {

struct NameRule {
  std::string name_class;
  std::string pattern;  // ECMAScript regex, matched case-insensitively anywhere in the name
};

// Rules are tried in order; unmatched COMP nodes count as "Others".
class NameClassifier {
 public:
  NameClassifier();  // default GeMM / Attn / ElemWise rules
  explicit NameClassifier(std::vector<NameRule> rules);

  const std::string& classify(const std::string& name) const;
  std::vector<std::string> classes() const;  // rule classes in order, then Others
  const std::vector<NameRule>& rules() const { return rules_; }

 private:
  std::vector<NameRule> rules_;
  std::vector<std::regex> compiled_;
  std::string others_ = "Others";
};

// [{"class": "GeMM", "pattern": "gemm|matmul"}, ...]
NameClassifier parse_name_rules(const Json& doc);

struct CountTable {
  std::map<NodeType, uint64_t> by_node_type;
  std::map<CommType, uint64_t> by_comm_type;
  std::map<std::string, uint64_t> by_name_class;  // COMP nodes only
  bool operator==(const CountTable&) const = default;
};

CountTable op_counts(const ExecutionTrace& trace, const NameClassifier& rules = NameClassifier());

using Breakdown = BusyBreakdown;

// Window runs from the earliest start to the latest end. COMP and MEM_* nodes
// count as compute, COMM_* as communication. Throws MISSING_TIMING.
Breakdown runtime_breakdown(const ExecutionTrace& trace);

struct CdfPoint {
  uint64_t duration = 0;
  uint64_t cum_count = 0;
  uint64_t total = 0;
  double fraction() const { return static_cast<double>(cum_count) / static_cast<double>(total); }
  bool operator==(const CdfPoint&) const = default;
};

// Throws MISSING_TIMING when any node lacks a duration or the trace is empty.
std::vector<CdfPoint> duration_cdf(const ExecutionTrace& trace);

// in-degree over data_deps -> node count
std::map<uint64_t, uint64_t> dependency_histogram(const ExecutionTrace& trace);

struct MemorySample {
  uint64_t t = 0;
  uint64_t live_bytes = 0;
  bool operator==(const MemorySample&) const = default;
};

struct MemoryTimeline {
  std::vector<MemorySample> samples;
  uint64_t peak_bytes = 0;
};

// A storage is live over [first producer start, last toucher end); one never
// produced goes live at its first toucher. Throws MISSING_TIMING.
MemoryTimeline memory_timeline(const ExecutionTrace& trace);

std::string counts_csv(const CountTable& counts);
std::string breakdown_csv(const Breakdown& b);
std::string cdf_csv(const std::vector<CdfPoint>& cdf);
std::string deps_csv(const std::map<uint64_t, uint64_t>& hist);
std::string memory_csv(const MemoryTimeline& m);

}  // namespace chakra
