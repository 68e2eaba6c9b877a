#include "chakra/collective_model.h"

#include <cmath>

#include "chakra/error.h"
#include "chakra/json_util.h"
#include "chakra/trace_io.h"

namespace chakra {

using namespace jsonutil;

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::switch_: return "switch";
    case Topology::ring: return "ring";
    case Topology::fully_connected: return "fully_connected";
  }
  return "?";
}

std::optional<Topology> parse_topology(std::string_view s) {
  if (s == "switch") return Topology::switch_;
  if (s == "ring") return Topology::ring;
  if (s == "fully_connected" || s == "fully-connected") return Topology::fully_connected;
  return std::nullopt;
}

namespace {

size_t idx(CommType t) { return static_cast<size_t>(t); }

bool is_ring_collective(CommType t) {
  return t == CommType::AllReduce || t == CommType::AllGather || t == CommType::ReduceScatter;
}

uint64_t ceil_log2(uint64_t n) {
  uint64_t steps = 0;
  while ((uint64_t{1} << steps) < n) ++steps;
  return steps;
}

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

}  // namespace

CoeffTable default_coefficients() {
  CoeffTable t{};
  //                 lat: n-1 log2 c   switch lat: n-1 log2 c   bw: (n-1)/n c
  t[idx(CommType::AllReduce)] = {2, 0, 0, 0, 2, 0, 2, 0};
  t[idx(CommType::AllGather)] = {1, 0, 0, 0, 1, 0, 1, 0};
  t[idx(CommType::ReduceScatter)] = {1, 0, 0, 0, 1, 0, 1, 0};
  t[idx(CommType::All2All)] = {1, 0, 0, 1, 0, 0, 1, 0};
  t[idx(CommType::Broadcast)] = {0, 1, 0, 0, 1, 0, 0, 1};
  t[idx(CommType::Barrier)] = {0, 2, 0, 0, 2, 0, 0, 0};
  t[idx(CommType::PointToPoint)] = {0, 0, 1, 0, 0, 1, 0, 1};
  return t;
}

void check_network(const NetworkModel& net) {
  if (!(net.link_bandwidth > 0) || !std::isfinite(net.link_bandwidth))
    throw Error(ErrorCode::INVALID_CONFIG, "link_bandwidth", "link bandwidth must be > 0");
  if (!(net.latency_alpha >= 0) || !std::isfinite(net.latency_alpha))
    throw Error(ErrorCode::INVALID_CONFIG, "latency_alpha", "latency alpha must be >= 0");
}

CollectiveTerms collective_terms(CommType type, uint64_t n, const NetworkModel& net) {
  if (n == 0) throw Error(ErrorCode::INVALID_GROUP, "0", "collective over an empty group");
  const CollectiveCoeffs& c = net.coefficients[idx(type)];
  const double nm1 = static_cast<double>(n - 1);
  const double lg = static_cast<double>(ceil_log2(n));
  const double B = net.link_bandwidth;

  CollectiveTerms t;
  t.bw_factor = c.bw_nm1_over_n * nm1 / static_cast<double>(n) + c.bw_const;
  switch (net.topology) {
    case Topology::switch_:
      t.lat_steps = c.sw_lat_nm1 * nm1 + c.sw_lat_log2 * lg + c.sw_lat_const;
      t.hop_factor = 2;
      t.b_eff = B;
      break;
    case Topology::ring:
      t.lat_steps = c.lat_nm1 * nm1 + c.lat_log2 * lg + c.lat_const;
      if (is_ring_collective(type)) {
        t.hop_factor = 1;
        t.b_eff = B;
      } else {
        t.hop_factor = static_cast<double>(ceil_div(n, 2));
        t.b_eff = type == CommType::Barrier ? B : B / static_cast<double>(ceil_div(n, 4));
      }
      break;
    case Topology::fully_connected:
      t.lat_steps = c.lat_nm1 * nm1 + c.lat_log2 * lg + c.lat_const;
      t.hop_factor = 1;
      t.b_eff = is_ring_collective(type) && n > 1 ? B / nm1 : B;
      break;
  }
  return t;
}

double collective_latency_exact(CommType type, uint64_t n, const NetworkModel& net) {
  CollectiveTerms t = collective_terms(type, n, net);
  if (n == 1) return 0;
  return t.lat_steps * net.latency_alpha * t.hop_factor;
}

double collective_time_exact(CommType type, uint64_t n, uint64_t size_bytes, const NetworkModel& net) {
  CollectiveTerms t = collective_terms(type, n, net);
  if (n == 1) return 0;
  return t.lat_steps * net.latency_alpha * t.hop_factor +
         t.bw_factor * static_cast<double>(size_bytes) / t.b_eff;
}

uint64_t round_half_up(double x) {
  if (!(x > 0)) return 0;
  return static_cast<uint64_t>(std::floor(x + 0.5));
}

uint64_t collective_time(CommType type, uint64_t n, uint64_t size_bytes, const NetworkModel& net) {
  CollectiveTerms t = collective_terms(type, n, net);
  if (n == 1) return 0;
  const double lat = t.lat_steps * net.latency_alpha * t.hop_factor;
  const double bw = t.bw_factor * static_cast<double>(size_bytes) / t.b_eff;
  return round_half_up(lat) + round_half_up(bw);
}

namespace {

constexpr std::array<std::pair<const char*, double CollectiveCoeffs::*>, 8> kCoeffFields{{
    {"lat_nm1", &CollectiveCoeffs::lat_nm1},
    {"lat_log2", &CollectiveCoeffs::lat_log2},
    {"lat_const", &CollectiveCoeffs::lat_const},
    {"switch_lat_nm1", &CollectiveCoeffs::sw_lat_nm1},
    {"switch_lat_log2", &CollectiveCoeffs::sw_lat_log2},
    {"switch_lat_const", &CollectiveCoeffs::sw_lat_const},
    {"bw_nm1_over_n", &CollectiveCoeffs::bw_nm1_over_n},
    {"bw_const", &CollectiveCoeffs::bw_const},
}};

}  // namespace

NetworkModel parse_network(const Json& doc) {
  expect_object(doc, "");
  NetworkModel net;
  std::string topo = req_string(doc, "topology", "");
  auto t = parse_topology(topo);
  if (!t) throw Error(ErrorCode::INVALID_CONFIG, "topology", "unknown topology '" + topo + "'");
  net.topology = *t;
  net.link_bandwidth = as_number(require(doc, "link_bandwidth_bytes_per_us", ""), "link_bandwidth_bytes_per_us");
  if (const Json* a = find(doc, "latency_alpha_us")) net.latency_alpha = as_number(*a, "latency_alpha_us");
  if (const Json* coeffs = find(doc, "coefficients")) {
    expect_object(*coeffs, "coefficients");
    for (const auto& [name, row] : coeffs->items()) {
      auto ct = parse_comm_type(name);
      std::string path = child_path("coefficients", name);
      if (!ct) throw Error(ErrorCode::INVALID_CONFIG, path, "unknown collective '" + name + "'");
      expect_object(row, path);
      CollectiveCoeffs& c = net.coefficients[idx(*ct)];
      for (const auto& [key, value] : row.items()) {
        bool known = false;
        for (const auto& [field, member] : kCoeffFields) {
          if (key != field) continue;
          c.*member = as_number(value, child_path(path, key));
          known = true;
        }
        if (!known) throw Error(ErrorCode::INVALID_CONFIG, child_path(path, key), "unknown coefficient");
      }
    }
  }
  check_network(net);
  return net;
}

NetworkModel read_network_file(const std::string& path) {
  return parse_network(parse_document(read_file(path)));
}

Json network_to_json(const NetworkModel& net) {
  Json j;
  j["topology"] = std::string(to_string(net.topology));
  j["link_bandwidth_bytes_per_us"] = net.link_bandwidth;
  j["latency_alpha_us"] = net.latency_alpha;
  Json coeffs = Json::object();
  for (size_t i = 0; i < kNumCommTypes; ++i) {
    Json row = Json::object();
    for (const auto& [field, member] : kCoeffFields) row[field] = net.coefficients[i].*member;
    coeffs[std::string(to_string(static_cast<CommType>(i)))] = row;
  }
  j["coefficients"] = coeffs;
  return j;
}

}  // namespace chakra
