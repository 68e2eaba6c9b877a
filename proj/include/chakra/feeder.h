#pragma once

// Dependency-aware streaming of trace nodes. Nodes are pulled from a source
// in windows; a node becomes ready once every predecessor has completed, and
// the ready queue's policy only arbitrates among ready nodes.

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chakra/schema.h"

namespace chakra {

enum class FeedPolicy { fifo, start_time, comm_priority };

std::string_view to_string(FeedPolicy p);
std::optional<FeedPolicy> parse_feed_policy(std::string_view s);  // accepts '-' or '_'

struct FeederConfig {
  size_t window = 4096;
  FeedPolicy policy = FeedPolicy::fifo;
};

// Yields nodes in file order.
class NodeSource {
 public:
  virtual ~NodeSource() = default;
  virtual std::optional<TraceNode> next() = 0;
};

class SpanSource : public NodeSource {
 public:
  explicit SpanSource(std::span<const TraceNode> nodes) : nodes_(nodes) {}
  std::optional<TraceNode> next() override;

 private:
  std::span<const TraceNode> nodes_;
  size_t pos_ = 0;
};

struct FeederStats {
  size_t peak_resident = 0;
  size_t peak_unresolved = 0;
  size_t extensions = 0;  // elastic window growths
  size_t nodes_read = 0;
};

class Feeder {
 public:
  // Loads the first window, extending it until a node is ready. Throws
  // EMPTY_TRACE or DEADLOCK.
  Feeder(std::unique_ptr<NodeSource> source, FeederConfig cfg);

  Feeder(Feeder&&) noexcept = default;
  Feeder& operator=(Feeder&&) noexcept = default;

  // Highest-priority ready node, or nullopt when nothing is ready right now
  // (all nodes emitted, or the remaining ones wait on in-flight nodes).
  // Throws DEADLOCK when input is exhausted and nothing can ever be ready.
  std::optional<TraceNode> next_ready();

  // Marks an emitted node finished. Throws UNKNOWN_ID or DOUBLE_COMPLETE.
  void complete(uint64_t id);

  // True once every node has been read, emitted and completed.
  bool finished() const;
  size_t in_flight() const { return in_flight_.size(); }
  size_t resident() const { return resident_.size(); }
  size_t unresolved() const { return unresolved_count_; }
  size_t ready() const { return ready_.size(); }
  const FeederStats& stats() const { return stats_; }

 private:
  struct ReadyKey {
    uint64_t k0;  // policy class
    uint64_t k1;  // policy value
    uint64_t seq;
    uint64_t id;
    bool operator>(const ReadyKey& o) const;
  };

  bool read_one();
  void top_up();
  void extend_until_ready();
  void enqueue(uint64_t id);
  void check_deadlock() const;
  void note_peaks();

  std::unique_ptr<NodeSource> source_;
  FeederConfig cfg_;
  bool exhausted_ = false;
  uint64_t seq_ = 0;

  struct Slot {
    TraceNode node;
    uint64_t seq = 0;
    size_t pending = 0;
    std::vector<uint64_t> children;
  };
  std::unordered_map<uint64_t, Slot> resident_;
  // missing parent id -> children waiting for it to be read
  std::unordered_map<uint64_t, std::vector<uint64_t>> waiting_;
  size_t unresolved_count_ = 0;
  std::priority_queue<ReadyKey, std::vector<ReadyKey>, std::greater<>> ready_;
  std::unordered_set<uint64_t> in_flight_;
  std::unordered_set<uint64_t> completed_;
  FeederStats stats_;
};

Feeder open_feeder(std::span<const TraceNode> nodes, FeederConfig cfg);

// next_ready/complete loop over the whole trace in file order.
std::vector<uint64_t> drain_order(const ExecutionTrace& trace, FeedPolicy policy,
                                  size_t window = 4096, FeederStats* stats = nullptr);

}  // namespace chakra
