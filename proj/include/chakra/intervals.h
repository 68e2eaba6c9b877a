#pragma once

// Half-open integer intervals [begin, end).

#include <cstdint>
#include <vector>

namespace chakra {

struct Interval {
  uint64_t begin = 0;
  uint64_t end = 0;
  bool operator==(const Interval&) const = default;
};

// Sorted, disjoint, non-empty intervals covering the same points.
std::vector<Interval> merge_intervals(std::vector<Interval> xs);

uint64_t measure(const std::vector<Interval>& merged);

// Measure of a \ b, both already merged.
uint64_t measure_difference(const std::vector<Interval>& a, const std::vector<Interval>& b);

struct BusyBreakdown {
  uint64_t span = 0;
  uint64_t compute_busy = 0;
  uint64_t exposed_comm = 0;
  uint64_t idle = 0;
};

// span = window_end - window_begin; idle is what neither set covers.
// Intervals must already lie inside the window.
BusyBreakdown busy_breakdown(std::vector<Interval> compute, std::vector<Interval> comm,
                             uint64_t window_begin, uint64_t window_end);

}  // namespace chakra
