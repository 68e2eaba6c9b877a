#include "chakra/graph_kernels.h"

#include <algorithm>
#include <functional>
#include <queue>

#include <omp.h>

namespace chakra::graph {

Csr build_csr(size_t n, std::span<const std::pair<Index, Index>> edges) {
  Csr g;
  g.offsets.assign(n + 1, 0);
  for (const auto& [u, v] : edges) ++g.offsets[u + 1];
  for (size_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
  g.targets.resize(edges.size());
  std::vector<size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
  for (const auto& [u, v] : edges) g.targets[fill[u]++] = v;

  // Sort and dedup each row, then compact.
  size_t write = 0;
  for (size_t u = 0; u < n; ++u) {
    auto first = g.targets.begin() + static_cast<std::ptrdiff_t>(g.offsets[u]);
    auto last = g.targets.begin() + static_cast<std::ptrdiff_t>(g.offsets[u + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    size_t begin = write;
    for (auto it = first; it != last; ++it) g.targets[write++] = *it;
    g.offsets[u] = begin;
  }
  g.offsets[n] = write;
  g.targets.resize(write);
  return g;
}

Csr transpose(const Csr& g) {
  std::vector<std::pair<Index, Index>> rev;
  rev.reserve(g.num_edges());
  for (Index u = 0; u < g.num_nodes(); ++u)
    for (Index v : g.row(u)) rev.emplace_back(v, u);
  return build_csr(g.num_nodes(), rev);
}

std::optional<std::vector<Index>> find_cycle(const Csr& g) {
  const size_t n = g.num_nodes();
  enum : uint8_t { kWhite, kGray, kBlack };
  std::vector<uint8_t> color(n, kWhite);
  struct Frame {
    Index node;
    size_t next;
  };
  std::vector<Frame> stack;
  for (Index root = 0; root < n; ++root) {
    if (color[root] != kWhite) continue;
    stack.push_back({root, g.offsets[root]});
    color[root] = kGray;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next == g.offsets[f.node + 1]) {
        color[f.node] = kBlack;
        stack.pop_back();
        continue;
      }
      Index v = g.targets[f.next++];
      if (color[v] == kWhite) {
        color[v] = kGray;
        stack.push_back({v, g.offsets[v]});
      } else if (color[v] == kGray) {
        std::vector<Index> cycle;
        auto it = std::find_if(stack.begin(), stack.end(),
                               [v](const Frame& fr) { return fr.node == v; });
        for (; it != stack.end(); ++it) cycle.push_back(it->node);
        return cycle;
      }
    }
  }
  return std::nullopt;
}

std::vector<Index> min_index_topo_order(const Csr& g) {
  const size_t n = g.num_nodes();
  std::vector<uint32_t> indeg(n, 0);
  for (Index v : g.targets) ++indeg[v];
  std::priority_queue<Index, std::vector<Index>, std::greater<>> ready;
  for (Index u = 0; u < n; ++u)
    if (indeg[u] == 0) ready.push(u);
  std::vector<Index> order;
  order.reserve(n);
  while (!ready.empty()) {
    Index u = ready.top();
    ready.pop();
    order.push_back(u);
    for (Index v : g.row(u))
      if (--indeg[v] == 0) ready.push(v);
  }
  return order;
}

namespace {

std::vector<Index> topo_rank(const Csr& g) {
  std::vector<Index> order = min_index_topo_order(g);
  std::vector<Index> rank(g.num_nodes(), 0);
  for (size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<Index>(i);
  return rank;
}

// Scratch space owned by one worker.
struct Scratch {
  std::vector<uint32_t> mark;
  std::vector<Index> stack;
  std::vector<std::pair<Index, size_t>> succ;  // (topo rank, edge slot)

  explicit Scratch(size_t n) : mark(n, 0) {}
};

// Decides the out-edges of `u`. Successors are visited in topological order;
// a successor already reached from an earlier one is redundant, otherwise its
// whole descendant set gets marked.
void reduce_row(const Csr& g, const std::vector<Index>& rank, Index u, Scratch& s,
                std::vector<char>& keep) {
  const uint32_t stamp = u + 1;
  s.succ.clear();
  for (size_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e)
    s.succ.emplace_back(rank[g.targets[e]], e);
  std::sort(s.succ.begin(), s.succ.end());
  for (const auto& [r, e] : s.succ) {
    Index v = g.targets[e];
    if (s.mark[v] == stamp) {
      keep[e] = 0;
      continue;
    }
    keep[e] = 1;
    s.mark[v] = stamp;
    s.stack.push_back(v);
    while (!s.stack.empty()) {
      Index w = s.stack.back();
      s.stack.pop_back();
      for (Index x : g.row(w)) {
        if (s.mark[x] == stamp) continue;
        s.mark[x] = stamp;
        s.stack.push_back(x);
      }
    }
  }
}

}  // namespace

std::vector<char> transitive_reduction_serial(const Csr& g) {
  const size_t n = g.num_nodes();
  std::vector<Index> rank = topo_rank(g);
  std::vector<char> keep(g.num_edges(), 1);
  Scratch scratch(n);
  for (Index u = 0; u < n; ++u) reduce_row(g, rank, u, scratch, keep);
  return keep;
}

std::vector<char> transitive_reduction_parallel(const Csr& g) {
  const size_t n = g.num_nodes();
  std::vector<Index> rank = topo_rank(g);
  std::vector<char> keep(g.num_edges(), 1);
  // Rows write disjoint slices of `keep`, so the result is thread-count
  // invariant.
#pragma omp parallel
  {
    Scratch scratch(n);
#pragma omp for schedule(dynamic, 64)
    for (int64_t u = 0; u < static_cast<int64_t>(n); ++u)
      reduce_row(g, rank, static_cast<Index>(u), scratch, keep);
  }
  return keep;
}

}  // namespace chakra::graph
