#include "chakra/intervals.h"

#include <algorithm>

namespace chakra {

std::vector<Interval> merge_intervals(std::vector<Interval> xs) {
  std::erase_if(xs, [](const Interval& i) { return i.end <= i.begin; });
  std::sort(xs.begin(), xs.end(),
            [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  std::vector<Interval> out;
  for (const Interval& i : xs) {
    if (!out.empty() && i.begin <= out.back().end)
      out.back().end = std::max(out.back().end, i.end);
    else
      out.push_back(i);
  }
  return out;
}

uint64_t measure(const std::vector<Interval>& merged) {
  uint64_t total = 0;
  for (const Interval& i : merged) total += i.end - i.begin;
  return total;
}

uint64_t measure_difference(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  uint64_t total = 0;
  size_t j = 0;
  for (const Interval& i : a) {
    uint64_t cursor = i.begin;
    while (j < b.size() && b[j].end <= cursor) ++j;
    for (size_t k = j; k < b.size() && b[k].begin < i.end; ++k) {
      if (b[k].begin > cursor) total += b[k].begin - cursor;
      cursor = std::max(cursor, b[k].end);
      if (cursor >= i.end) break;
    }
    if (cursor < i.end) total += i.end - cursor;
  }
  return total;
}

BusyBreakdown busy_breakdown(std::vector<Interval> compute, std::vector<Interval> comm,
                             uint64_t window_begin, uint64_t window_end) {
  BusyBreakdown b;
  b.span = window_end - window_begin;
  std::vector<Interval> all = compute;
  all.insert(all.end(), comm.begin(), comm.end());
  auto cu = merge_intervals(std::move(compute));
  auto mu = merge_intervals(std::move(comm));
  b.compute_busy = measure(cu);
  b.exposed_comm = measure_difference(mu, cu);
  b.idle = b.span - measure(merge_intervals(std::move(all)));
  return b;
}

}  // namespace chakra
