#pragma once

// Index-space DAG kernels used by the converter. Nodes are dense indices
// [0, n); adjacency is CSR with each row sorted ascending.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace chakra::graph {

using Index = uint32_t;

struct Csr {
  std::vector<size_t> offsets;  // size n + 1
  std::vector<Index> targets;

  size_t num_nodes() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  size_t num_edges() const { return targets.size(); }
  std::span<const Index> row(Index u) const {
    return {targets.data() + offsets[u], targets.data() + offsets[u + 1]};
  }
};

// Duplicate (u, v) pairs collapse; rows come out sorted.
Csr build_csr(size_t n, std::span<const std::pair<Index, Index>> edges);
Csr transpose(const Csr& g);

// One witness cycle [v0, v1, ..., vk] with edges vi -> vi+1 and vk -> v0,
// found by iterative DFS started from the lowest index. nullopt if acyclic.
std::optional<std::vector<Index>> find_cycle(const Csr& g);

// Kahn's algorithm, always taking the smallest ready index. Requires an
// acyclic graph; returns fewer than n entries otherwise.
std::vector<Index> min_index_topo_order(const Csr& g);

// keep[e] for every CSR edge slot e: false when the edge is implied by a
// longer path. Both versions share one contract and must agree exactly.
std::vector<char> transitive_reduction_serial(const Csr& g);
std::vector<char> transitive_reduction_parallel(const Csr& g);

}  // namespace chakra::graph
