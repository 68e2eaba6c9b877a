#pragma once

// Alpha-beta cost model for collectives over a switch, ring or
// fully-connected topology. Times are integer microseconds.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "chakra/schema.h"

namespace chakra {

enum class Topology { switch_, ring, fully_connected };

std::string_view to_string(Topology t);
std::optional<Topology> parse_topology(std::string_view s);

// lat_steps(n) = lat_nm1*(n-1) + lat_log2*ceil(log2 n) + lat_const
// bw_factor(n) = bw_nm1_over_n*(n-1)/n + bw_const
// The switch topology prices latency with its own step count (the sw_*
// columns): recursive halving/doubling needs log-many rounds.
struct CollectiveCoeffs {
  double lat_nm1 = 0, lat_log2 = 0, lat_const = 0;
  double sw_lat_nm1 = 0, sw_lat_log2 = 0, sw_lat_const = 0;
  double bw_nm1_over_n = 0, bw_const = 0;
  bool operator==(const CollectiveCoeffs&) const = default;
};

inline constexpr size_t kNumCommTypes = 7;
using CoeffTable = std::array<CollectiveCoeffs, kNumCommTypes>;  // indexed by CommType

CoeffTable default_coefficients();

struct NetworkModel {
  Topology topology = Topology::switch_;
  double link_bandwidth = 100.0;  // bytes/us
  double latency_alpha = 0.0;     // us per hop-step
  CoeffTable coefficients = default_coefficients();
};

void check_network(const NetworkModel& net);  // throws INVALID_CONFIG

// Parses the .net.json document. Override tables merge per field into the
// defaults: {"AllReduce": {"lat_nm1": 2, ...}, ...}.
NetworkModel parse_network(const Json& doc);
NetworkModel read_network_file(const std::string& path);
Json network_to_json(const NetworkModel& net);

struct CollectiveTerms {
  double lat_steps = 0;
  double hop_factor = 0;
  double bw_factor = 0;
  double b_eff = 0;
};

CollectiveTerms collective_terms(CommType type, uint64_t n, const NetworkModel& net);

// Exact model value, no rounding.
double collective_time_exact(CommType type, uint64_t n, uint64_t size_bytes, const NetworkModel& net);

// Latency term alone: lat_steps * alpha * hop_factor.
double collective_latency_exact(CommType type, uint64_t n, const NetworkModel& net);

// Latency and bandwidth terms each rounded half up, then summed. n == 1 gives 0.
// Throws INVALID_GROUP when n == 0.
uint64_t collective_time(CommType type, uint64_t n, uint64_t size_bytes, const NetworkModel& net);

uint64_t round_half_up(double x);

}  // namespace chakra
