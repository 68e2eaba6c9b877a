#pragma once

// Synthetic workloads: transformer-style per-rank training steps, small test
// graphs, random DAGs, and host/device input pairs for the linker.

#include <cstdint>
#include <string>
#include <vector>

#include "chakra/analyzer.h"
#include "chakra/ingest.h"
#include "chakra/schema.h"

namespace chakra {

struct GenSpec {
  uint64_t layers = 4;
  uint64_t tp = 1;
  uint64_t dp = 1;
  uint64_t pp = 1;
  uint64_t microbatches = 1;
  uint64_t grad_buckets = 0;
  uint64_t gemm_us = 100;
  uint64_t attn_us = 80;
  uint64_t elem_us = 10;
  uint64_t hidden_bytes = 1 << 20;
  uint64_t seed = 0;
  // Replace every TP AllReduce with an AllGather followed by a ReduceScatter.
  bool sequence_parallel = false;
  // Each compute duration gets an extra uniform [0, skew_us] drawn per rank.
  uint64_t skew_us = 0;
};

void check_spec(const GenSpec& spec);  // throws INVALID_SPEC

// rank = stage * (dp * tp) + dp_index * tp + tp_index
struct RankCoord {
  uint64_t stage = 0;
  uint64_t dp_index = 0;
  uint64_t tp_index = 0;
};
RankCoord rank_coord(const GenSpec& spec, uint64_t rank);

// One trace per rank, ordered by rank.
std::vector<ExecutionTrace> generate_transformer(const GenSpec& spec);
ExecutionTrace generate_transformer_rank(const GenSpec& spec, uint64_t rank);

// Closed-form counts for one rank under the default name classifier.
CountTable expected_counts(const GenSpec& spec, uint64_t rank);

enum class MicroKind { chain, diamond, fanout, comm_pair };

struct MicroSpec {
  MicroKind kind = MicroKind::chain;
  uint64_t n = 3;               // chain length
  uint64_t k = 4;               // fan-out width
  uint64_t size_bytes = 400;    // comm_pair payload
  uint64_t duration_us = 10;
};

std::vector<ExecutionTrace> generate_micro(const MicroSpec& spec);

struct RandomDagSpec {
  uint64_t n = 100;
  double edge_prob = 0.05;
  uint64_t seed = 0;
  // Fraction of nodes emitted as single-rank AllReduce collectives.
  double comm_fraction = 0.0;
  // Fraction of edges placed in ctrl_deps rather than data_deps.
  double ctrl_fraction = 0.0;
  // Set start times to the as-soon-as-possible schedule.
  bool timed = true;
};

// Node ids 1..n; each pair i < j is an edge with probability edge_prob.
ExecutionTrace generate_random_dag(const RandomDagSpec& spec);

struct HostDeviceFixture {
  std::string name;
  HostTrace host;
  DeviceTrace device;
};

// Names accepted by make_fixture, in a fixed order.
std::vector<std::string> fixture_names();
HostDeviceFixture make_fixture(const std::string& name);  // throws INVALID_SPEC

// Host/device pairs whose linked and converted form reproduces the
// transformer traces: every node becomes a host launch plus a device event.
std::vector<HostDeviceFixture> transformer_fixture(const GenSpec& spec);

}  // namespace chakra
