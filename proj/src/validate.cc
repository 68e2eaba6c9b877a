#include "chakra/validate.h"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace chakra {

std::string_view to_string(IssueCode code) {
  switch (code) {
    case IssueCode::DANGLING_DEP: return "DANGLING_DEP";
    case IssueCode::SELF_DEP: return "SELF_DEP";
    case IssueCode::DUPLICATE_ID: return "DUPLICATE_ID";
    case IssueCode::DANGLING_TENSOR: return "DANGLING_TENSOR";
    case IssueCode::DANGLING_STORAGE: return "DANGLING_STORAGE";
    case IssueCode::MISSING_COMM_ATTR: return "MISSING_COMM_ATTR";
    case IssueCode::UNKNOWN_GROUP: return "UNKNOWN_GROUP";
    case IssueCode::STORAGE_OVERFLOW: return "STORAGE_OVERFLOW";
    case IssueCode::INVALID_RANK: return "INVALID_RANK";
    case IssueCode::INVALID_GROUP: return "INVALID_GROUP";
    case IssueCode::INVALID_TENSOR: return "INVALID_TENSOR";
    case IssueCode::INVALID_STORAGE: return "INVALID_STORAGE";
    case IssueCode::INVALID_COMM_ATTR: return "INVALID_COMM_ATTR";
    case IssueCode::DUPLICATE_DEP: return "DUPLICATE_DEP";
  }
  return "?";
}

size_t ValidationReport::count(IssueCode code) const {
  return std::count_if(errors.begin(), errors.end(),
                       [code](const Issue& i) { return i.code == code; });
}

namespace {

class Checker {
 public:
  explicit Checker(const ExecutionTrace& t) : t_(t) {}

  ValidationReport run() {
    check_header();
    index_tables();
    check_groups();
    check_tensors();
    check_nodes();
    return std::move(report_);
  }

 private:
  void error(IssueCode code, const char* object, uint64_t id, std::string msg) {
    report_.errors.push_back({code, object, id, std::move(msg)});
  }
  void warn(IssueCode code, const char* object, uint64_t id, std::string msg) {
    report_.warnings.push_back({code, object, id, std::move(msg)});
  }

  void check_header() {
    if (t_.num_ranks == 0)
      error(IssueCode::INVALID_RANK, "trace", t_.rank, "num_ranks must be positive");
    else if (t_.rank >= t_.num_ranks)
      error(IssueCode::INVALID_RANK, "trace", t_.rank,
            "rank " + std::to_string(t_.rank) + " >= num_ranks " +
                std::to_string(t_.num_ranks));
  }

  template <typename T, typename Map>
  void index(const std::vector<T>& items, const char* object, Map& out) {
    out.reserve(items.size());
    for (const auto& item : items)
      if (!out.emplace(item.id, &item).second)
        error(IssueCode::DUPLICATE_ID, object, item.id,
              std::string("duplicate ") + object + " id " + std::to_string(item.id));
  }

  void index_tables() {
    index(t_.nodes, "node", nodes_);
    index(t_.tensors, "tensor", tensors_);
    index(t_.storages, "storage", storages_);
    index(t_.process_groups, "group", groups_);
  }

  void check_groups() {
    for (const auto& g : t_.process_groups) {
      if (g.ranks.empty()) {
        error(IssueCode::INVALID_GROUP, "group", g.id, "empty rank list");
        continue;
      }
      std::vector<uint64_t> sorted = g.ranks;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        error(IssueCode::INVALID_GROUP, "group", g.id, "duplicate rank in group");
      if (sorted.back() >= t_.num_ranks)
        error(IssueCode::INVALID_GROUP, "group", g.id,
              "rank " + std::to_string(sorted.back()) + " outside [0, num_ranks)");
    }
  }

  void check_tensors() {
    for (const auto& s : t_.storages)
      if (s.size_bytes == 0)
        error(IssueCode::INVALID_STORAGE, "storage", s.id, "size_bytes must be positive");

    for (const auto& tensor : t_.tensors) {
      if (tensor.shape.size() != tensor.stride.size()) {
        error(IssueCode::INVALID_TENSOR, "tensor", tensor.id,
              "shape and stride lengths differ");
        continue;
      }
      uint64_t extent = tensor_extent_bytes(tensor);
      bool non_empty = !tensor.shape.empty() &&
                       std::all_of(tensor.shape.begin(), tensor.shape.end(),
                                   [](int64_t d) { return d > 0; });
      if (non_empty && tensor.size_bytes == 0)
        error(IssueCode::INVALID_TENSOR, "tensor", tensor.id,
              "size_bytes must be positive for a non-empty shape");
      auto it = storages_.find(tensor.storage_id);
      if (it == storages_.end()) {
        error(IssueCode::DANGLING_STORAGE, "tensor", tensor.id,
              "storage " + std::to_string(tensor.storage_id) + " does not exist");
        continue;
      }
      uint64_t end = tensor.storage_offset * dtype_width(tensor.dtype) + extent;
      if (end > it->second->size_bytes)
        error(IssueCode::STORAGE_OVERFLOW, "tensor", tensor.id,
              "tensor spans " + std::to_string(end) + " bytes of a " +
                  std::to_string(it->second->size_bytes) + "-byte storage");
    }
  }

  void check_deps(const TraceNode& n, const std::vector<uint64_t>& deps,
                  const char* field) {
    std::unordered_set<uint64_t> seen;
    for (uint64_t d : deps) {
      if (!seen.insert(d).second) {
        warn(IssueCode::DUPLICATE_DEP, "node", n.id,
             std::string(field) + " lists " + std::to_string(d) + " twice");
        continue;
      }
      if (d == n.id)
        error(IssueCode::SELF_DEP, "node", n.id, std::string(field) + " contains the node itself");
      else if (!nodes_.contains(d))
        error(IssueCode::DANGLING_DEP, "node", n.id,
              std::string(field) + " references missing node " + std::to_string(d));
    }
  }

  void check_comm(const TraceNode& n) {
    auto missing = [&](const char* key) {
      error(IssueCode::MISSING_COMM_ATTR, "node", n.id, std::string("missing attr ") + key);
    };
    auto invalid = [&](std::string msg) {
      error(IssueCode::INVALID_COMM_ATTR, "node", n.id, std::move(msg));
    };

    auto type_it = n.attrs.find("comm_type");
    std::optional<CommType> type;
    if (type_it == n.attrs.end()) {
      missing("comm_type");
    } else if (!type_it->second.is_string() ||
               !(type = parse_comm_type(type_it->second.get<std::string>()))) {
      invalid("comm_type is not a known collective name");
    }

    auto size_it = n.attrs.find("comm_size_bytes");
    if (size_it == n.attrs.end()) {
      missing("comm_size_bytes");
    } else if (!size_it->second.is_number_unsigned()) {
      invalid("comm_size_bytes must be a non-negative integer");
    } else if (type && *type != CommType::Barrier && size_it->second.get<uint64_t>() == 0) {
      invalid("comm_size_bytes must be positive");
    }

    if (n.type == NodeType::COMM_COLL) {
      if (type && *type == CommType::PointToPoint)
        invalid("COMM_COLL cannot carry comm_type PointToPoint");
      auto group_it = n.attrs.find("comm_group");
      if (group_it == n.attrs.end()) {
        missing("comm_group");
      } else if (!group_it->second.is_number_unsigned()) {
        invalid("comm_group must be a non-negative integer");
      } else {
        uint64_t gid = group_it->second.get<uint64_t>();
        auto g = groups_.find(gid);
        if (g == groups_.end()) {
          error(IssueCode::UNKNOWN_GROUP, "node", n.id,
                "comm_group " + std::to_string(gid) + " is not registered");
        } else if (std::find(g->second->ranks.begin(), g->second->ranks.end(), t_.rank) ==
                   g->second->ranks.end()) {
          error(IssueCode::INVALID_GROUP, "group", gid,
                "group used by node " + std::to_string(n.id) +
                    " does not contain this trace's rank");
        }
      }
    } else {
      if (type && *type != CommType::PointToPoint)
        invalid("COMM_SEND/COMM_RECV must carry comm_type PointToPoint");
      auto peer_it = n.attrs.find("comm_peer");
      if (peer_it == n.attrs.end()) {
        missing("comm_peer");
      } else if (!peer_it->second.is_number_unsigned() ||
                 peer_it->second.get<uint64_t>() >= t_.num_ranks ||
                 peer_it->second.get<uint64_t>() == t_.rank) {
        invalid("comm_peer must be another rank in [0, num_ranks)");
      }
    }
  }

  void check_nodes() {
    for (const auto& n : t_.nodes) {
      check_deps(n, n.ctrl_deps, "ctrl_deps");
      check_deps(n, n.data_deps, "data_deps");
      for (const auto* list : {&n.inputs, &n.outputs})
        for (uint64_t tid : *list)
          if (!tensors_.contains(tid))
            error(IssueCode::DANGLING_TENSOR, "node", n.id,
                  "tensor " + std::to_string(tid) + " does not exist");
      if (is_comm(n.type)) check_comm(n);
    }
  }

  const ExecutionTrace& t_;
  ValidationReport report_;
  std::unordered_map<uint64_t, const TraceNode*> nodes_;
  std::unordered_map<uint64_t, const TensorDesc*> tensors_;
  std::unordered_map<uint64_t, const StorageDesc*> storages_;
  std::unordered_map<uint64_t, const ProcessGroup*> groups_;
};

}  // namespace

ValidationReport validate_trace(const ExecutionTrace& trace) {
  return Checker(trace).run();
}

}  // namespace chakra
