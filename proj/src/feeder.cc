#include "chakra/feeder.h"

#include <algorithm>
#include <tuple>

#include "chakra/error.h"

namespace chakra {

std::string_view to_string(FeedPolicy p) {
  switch (p) {
    case FeedPolicy::fifo: return "fifo";
    case FeedPolicy::start_time: return "start_time";
    case FeedPolicy::comm_priority: return "comm_priority";
  }
  return "?";
}

std::optional<FeedPolicy> parse_feed_policy(std::string_view s) {
  std::string norm(s);
  std::replace(norm.begin(), norm.end(), '-', '_');
  if (norm == "fifo") return FeedPolicy::fifo;
  if (norm == "start_time") return FeedPolicy::start_time;
  if (norm == "comm_priority") return FeedPolicy::comm_priority;
  return std::nullopt;
}

std::optional<TraceNode> SpanSource::next() {
  if (pos_ >= nodes_.size()) return std::nullopt;
  return nodes_[pos_++];
}

bool Feeder::ReadyKey::operator>(const ReadyKey& o) const {
  return std::tie(k0, k1, seq, id) > std::tie(o.k0, o.k1, o.seq, o.id);
}

Feeder::Feeder(std::unique_ptr<NodeSource> source, FeederConfig cfg)
    : source_(std::move(source)), cfg_(cfg) {
  if (cfg_.window == 0) throw Error(ErrorCode::INVALID_CONFIG, "window", "window must be >= 1");
  top_up();
  if (resident_.empty() && exhausted_) throw Error(ErrorCode::EMPTY_TRACE, "", "trace has no nodes");
  extend_until_ready();
  check_deadlock();
}

bool Feeder::read_one() {
  if (exhausted_) return false;
  std::optional<TraceNode> node = source_->next();
  if (!node) {
    exhausted_ = true;
    return false;
  }
  const uint64_t id = node->id;
  if (resident_.count(id) || completed_.count(id))
    throw Error(ErrorCode::DUPLICATE_ID, std::to_string(id), "node id read twice");
  ++stats_.nodes_read;

  Slot& slot = resident_[id];
  slot.seq = seq_++;
  std::vector<uint64_t> preds;
  preds.reserve(node->ctrl_deps.size() + node->data_deps.size());
  preds.insert(preds.end(), node->ctrl_deps.begin(), node->ctrl_deps.end());
  preds.insert(preds.end(), node->data_deps.begin(), node->data_deps.end());
  sort_unique(preds);
  slot.node = std::move(*node);

  for (uint64_t p : preds) {
    if (completed_.count(p)) continue;
    ++slot.pending;
    auto it = resident_.find(p);
    if (it != resident_.end() && p != id) {
      it->second.children.push_back(id);
    } else {
      waiting_[p].push_back(id);
      ++unresolved_count_;
    }
  }

  // Children read earlier that were waiting on this node.
  if (auto w = waiting_.find(id); w != waiting_.end()) {
    unresolved_count_ -= w->second.size();
    auto& children = resident_[id].children;
    children.insert(children.end(), w->second.begin(), w->second.end());
    waiting_.erase(w);
  }

  if (resident_[id].pending == 0) enqueue(id);
  note_peaks();
  return true;
}

void Feeder::top_up() {
  while (resident_.size() < cfg_.window && read_one()) {
  }
}

void Feeder::extend_until_ready() {
  size_t chunk = cfg_.window;
  while (ready_.empty() && in_flight_.empty() && !exhausted_) {
    chunk *= 2;
    ++stats_.extensions;
    for (size_t i = 0; i < chunk && read_one(); ++i) {
    }
  }
}

void Feeder::enqueue(uint64_t id) {
  const Slot& s = resident_.at(id);
  ReadyKey key{0, 0, s.seq, id};
  switch (cfg_.policy) {
    case FeedPolicy::fifo:
      break;
    case FeedPolicy::start_time:
      key.k0 = s.node.start_time_micros ? 0 : 1;
      key.k1 = s.node.start_time_micros.value_or(0);
      key.seq = 0;  // ties broken by id
      break;
    case FeedPolicy::comm_priority:
      key.k0 = is_comm(s.node.type) ? 0 : 1;
      break;
  }
  ready_.push(key);
}

void Feeder::note_peaks() {
  stats_.peak_resident = std::max(stats_.peak_resident, resident_.size());
  stats_.peak_unresolved = std::max(stats_.peak_unresolved, unresolved_count_);
}

void Feeder::check_deadlock() const {
  if (ready_.empty() && in_flight_.empty() && exhausted_ && !resident_.empty()) {
    std::vector<uint64_t> stuck;
    for (const auto& [id, slot] : resident_) stuck.push_back(id);
    std::sort(stuck.begin(), stuck.end());
    throw Error(ErrorCode::DEADLOCK, "", std::to_string(stuck.size()) + " nodes can never become ready",
                std::move(stuck));
  }
}

std::optional<TraceNode> Feeder::next_ready() {
  if (ready_.empty()) {
    top_up();
    extend_until_ready();
    check_deadlock();
  }
  if (ready_.empty()) return std::nullopt;
  ReadyKey key = ready_.top();
  ready_.pop();
  in_flight_.insert(key.id);
  return resident_.at(key.id).node;
}

void Feeder::complete(uint64_t id) {
  if (completed_.count(id)) throw Error(ErrorCode::DOUBLE_COMPLETE, std::to_string(id), "node already completed");
  if (!in_flight_.count(id)) throw Error(ErrorCode::UNKNOWN_ID, std::to_string(id), "node was not emitted");
  in_flight_.erase(id);
  completed_.insert(id);
  auto it = resident_.find(id);
  std::vector<uint64_t> children = std::move(it->second.children);
  resident_.erase(it);
  for (uint64_t c : children) {
    Slot& s = resident_.at(c);
    if (--s.pending == 0) enqueue(c);
  }
  top_up();
}

bool Feeder::finished() const { return exhausted_ && resident_.empty(); }

Feeder open_feeder(std::span<const TraceNode> nodes, FeederConfig cfg) {
  return Feeder(std::make_unique<SpanSource>(nodes), cfg);
}

std::vector<uint64_t> drain_order(const ExecutionTrace& trace, FeedPolicy policy, size_t window,
                                  FeederStats* stats) {
  Feeder feeder = open_feeder(trace.nodes, FeederConfig{window, policy});
  std::vector<uint64_t> order;
  order.reserve(trace.nodes.size());
  while (auto node = feeder.next_ready()) {
    order.push_back(node->id);
    feeder.complete(node->id);
  }
  if (!feeder.finished())
    throw Error(ErrorCode::DEADLOCK, "", "feeder stalled before all nodes were emitted");
  if (stats) *stats = feeder.stats();
  return order;
}

}  // namespace chakra
