#include "doctest.h"

#include <random>

#include "chakra/graph_kernels.h"
#include "oracles.h"

using namespace chakra::graph;

namespace {

Csr random_dag(std::mt19937_64& rng, size_t n, double p) {
  std::vector<std::pair<Index, Index>> e;
  std::uniform_real_distribution<double> u(0, 1);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (u(rng) < p) e.emplace_back(i, j);
  return build_csr(n, e);
}

std::vector<oracle::Edge> edges_of(const Csr& g) {
  std::vector<oracle::Edge> out;
  for (Index u = 0; u < g.num_nodes(); ++u)
    for (Index v : g.row(u)) out.emplace_back(u, v);
  return out;
}

std::vector<uint64_t> iota_ids(size_t n) {
  std::vector<uint64_t> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST_CASE("csr collapses duplicates and sorts rows") {
  std::vector<std::pair<Index, Index>> e{{0, 2}, {0, 1}, {0, 2}, {2, 1}};
  Csr g = build_csr(3, e);
  CHECK(g.num_edges() == 3);
  CHECK(std::vector<Index>(g.row(0).begin(), g.row(0).end()) == std::vector<Index>{1, 2});
  Csr t = transpose(g);
  CHECK(std::vector<Index>(t.row(1).begin(), t.row(1).end()) == std::vector<Index>{0, 2});
  CHECK(t.row(0).empty());
}

TEST_CASE("cycle detection") {
  std::vector<std::pair<Index, Index>> chain{{0, 1}, {1, 2}};
  CHECK_FALSE(find_cycle(build_csr(3, chain)));
  std::vector<std::pair<Index, Index>> two{{0, 1}, {1, 0}};
  auto c = find_cycle(build_csr(2, two));
  REQUIRE(c);
  CHECK(*c == std::vector<Index>{0, 1});
  std::vector<std::pair<Index, Index>> diamond{{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  CHECK_FALSE(find_cycle(build_csr(4, diamond)));
  std::vector<std::pair<Index, Index>> self{{1, 1}};
  auto s = find_cycle(build_csr(2, self));
  REQUIRE(s);
  CHECK(*s == std::vector<Index>{1});
}

TEST_CASE("min-index topological order") {
  std::vector<std::pair<Index, Index>> e{{3, 0}, {2, 1}};
  Csr g = build_csr(4, e);
  CHECK(min_index_topo_order(g) == std::vector<Index>{2, 1, 3, 0});
  std::vector<std::pair<Index, Index>> cyc{{0, 1}, {1, 0}};
  CHECK(min_index_topo_order(build_csr(3, cyc)).size() == 1);
}

TEST_CASE("transitive reduction of a shortcut diamond") {
  std::vector<std::pair<Index, Index>> e{{0, 1}, {1, 2}, {0, 2}};
  Csr g = build_csr(3, e);
  auto keep = transitive_reduction_serial(g);
  // slots: 0->1, 0->2, 1->2
  CHECK(keep == std::vector<char>{1, 0, 1});
  CHECK(transitive_reduction_parallel(g) == keep);
}

TEST_CASE("serial and parallel reductions agree with brute force") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    size_t n = 5 + trial * 3;
    Csr g = random_dag(rng, n, 0.15);
    auto serial = transitive_reduction_serial(g);
    auto parallel = transitive_reduction_parallel(g);
    REQUIRE(serial == parallel);
    auto redundant = oracle::redundant_edges(iota_ids(n), edges_of(g));
    size_t slot = 0;
    for (Index u = 0; u < n; ++u)
      for (Index v : g.row(u)) CHECK((serial[slot++] == 0) == (redundant.count({u, v}) == 1));

    auto order = min_index_topo_order(g);
    std::vector<uint64_t> ord(order.begin(), order.end());
    CHECK(oracle::is_topological(ord, iota_ids(n), edges_of(g)));
  }
}
