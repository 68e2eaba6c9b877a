#pragma once

// Trace-driven discrete-event simulation of a multi-rank workload. Each rank
// has compute and comm resources that overlap freely; collectives start when
// every member rank has issued its node.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chakra/collective_model.h"
#include "chakra/schema.h"

namespace chakra {

struct SimConfig {
  NetworkModel network;
  double compute_scale = 1.0;
  uint32_t compute_streams = 1;
  uint32_t comm_streams = 1;
};

struct CollectiveInstance {
  uint64_t group = 0;
  std::vector<uint64_t> ranks;  // group members
  uint64_t sequence = 0;
  CommType comm_type = CommType::AllReduce;
  std::optional<std::string> tag;
  std::map<uint64_t, uint64_t> members;  // rank -> node id
  uint64_t size_bytes = 0;
};

// One matched COMM_SEND/COMM_RECV pair.
struct P2PInstance {
  uint64_t src = 0;
  uint64_t dst = 0;
  uint64_t sequence = 0;  // k-th pair on (src, dst, tag)
  std::optional<std::string> tag;
  uint64_t send_node = 0;
  uint64_t recv_node = 0;
  uint64_t size_bytes = 0;
};

struct MatchResult {
  std::vector<CollectiveInstance> collectives;  // sorted by (group, sequence)
  std::vector<P2PInstance> p2p;                 // sorted by (src, dst, tag, sequence)
  std::vector<std::string> warnings;
};

// Sequence indices follow each rank's smallest-id-first topological order.
// Throws GROUP_SEQUENCE_MISMATCH, TAG_MISMATCH, UNKNOWN_GROUP,
// UNPAIRED_SEND_RECV, INVALID_TRACE (duplicate or missing rank).
MatchResult match_collectives(const std::vector<ExecutionTrace>& traces);

struct NodeTiming {
  uint64_t id = 0;
  uint64_t issue = 0;  // resource acquired; equals start except for comm waits
  uint64_t start = 0;
  uint64_t end = 0;
};

struct RankReport {
  uint64_t rank = 0;
  uint64_t makespan = 0;
  uint64_t compute_busy = 0;
  uint64_t exposed_comm = 0;
  uint64_t idle = 0;
  std::vector<NodeTiming> nodes;  // sorted by id
};

struct CommRecord {
  bool p2p = false;
  std::optional<uint64_t> group;
  uint64_t sequence = 0;
  CommType comm_type = CommType::AllReduce;
  std::vector<uint64_t> ranks;
  uint64_t size_bytes = 0;
  uint64_t start = 0;
  uint64_t end = 0;
  uint64_t bus_time = 0;
  double latency_term = 0;  // exact lat_steps * alpha * hop_factor
};

struct SimReport {
  uint64_t total_time = 0;
  uint64_t total_comm_time = 0;  // sum of bus_time
  std::vector<RankReport> per_rank;  // sorted by rank
  std::vector<CommRecord> per_collective;  // collectives by (group, seq), then p2p
  std::vector<std::string> warnings;

  const NodeTiming* timing(uint64_t rank, uint64_t id) const;
};

// Throws matching errors, DEADLOCK, INVALID_CONFIG.
SimReport simulate(const std::vector<ExecutionTrace>& traces, const SimConfig& config);

// Copies of the traces with start/duration set to the simulated values.
std::vector<ExecutionTrace> apply_sim_times(const std::vector<ExecutionTrace>& traces,
                                            const SimReport& report);

enum class SweepAxis { bandwidth, topology };

struct SweepPoint {
  std::string value;
  SimReport report;
};

// Points run in parallel; the result is ordered like `values`. Bandwidth
// values are multipliers on the base link bandwidth.
std::vector<SweepPoint> sweep(const std::vector<ExecutionTrace>& traces, const SimConfig& base,
                              SweepAxis axis, const std::vector<std::string>& values);

std::string sweep_csv(const std::vector<SweepPoint>& points);
std::string collectives_csv(const SimReport& report);
Json report_to_json(const SimReport& report, bool include_nodes = true);

}  // namespace chakra
