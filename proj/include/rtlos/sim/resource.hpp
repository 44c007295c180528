#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rtlos::sim {

struct QueueEntry {
  std::uint64_t entity = 0;
  int priority = 0;  // lower value is served first
  double since = 0.0;
};

struct ServerSlot {
  bool busy = false;
  std::uint64_t entity = 0;
  int priority = 0;
  double start = 0.0;
  double end = 0.0;
};

// Multi-server resource with a non-preemptive class-priority queue. Entries of
// equal priority are FIFO; a higher-priority arrival goes behind waiting
// entries of its own band and ahead of every lower-priority entry. Service in
// progress is never interrupted.
class PriorityResource {
 public:
  explicit PriorityResource(int servers = 1) {
    if (servers < 1) throw std::invalid_argument("resource needs at least one server");
    slots_.resize(static_cast<std::size_t>(servers));
  }

  int server_count() const { return static_cast<int>(slots_.size()); }
  const std::vector<ServerSlot>& servers() const { return slots_; }
  const std::vector<QueueEntry>& queue() const { return queue_; }

  // Returns the 0-based queue position the entry was placed at.
  std::size_t enqueue(QueueEntry entry) {
    auto pos = std::find_if(queue_.begin(), queue_.end(),
                            [&](const QueueEntry& e) { return e.priority > entry.priority; });
    const auto index = static_cast<std::size_t>(pos - queue_.begin());
    queue_.insert(pos, entry);
    return index;
  }

  bool has_waiting() const { return !queue_.empty(); }

  QueueEntry pop_next() {
    if (queue_.empty()) throw std::logic_error("pop_next() on empty queue");
    QueueEntry front = queue_.front();
    queue_.erase(queue_.begin());
    return front;
  }

  std::optional<int> idle_server() const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (!slots_[i].busy) return static_cast<int>(i);
    return std::nullopt;
  }

  void seize(int server, std::uint64_t entity, int priority, double start, double end) {
    auto& slot = slots_.at(static_cast<std::size_t>(server));
    if (slot.busy) throw std::logic_error("seize() on a busy server");
    slot = ServerSlot{true, entity, priority, start, end};
  }

  ServerSlot release(int server) {
    auto& slot = slots_.at(static_cast<std::size_t>(server));
    if (!slot.busy) throw std::logic_error("release() on an idle server");
    ServerSlot done = slot;
    slot = ServerSlot{};
    return done;
  }

  std::size_t waiting(int priority) const {
    return static_cast<std::size_t>(
        std::count_if(queue_.begin(), queue_.end(), [&](const QueueEntry& e) { return e.priority == priority; }));
  }

  int busy_count() const {
    return static_cast<int>(std::count_if(slots_.begin(), slots_.end(), [](const ServerSlot& s) { return s.busy; }));
  }

 private:
  std::vector<ServerSlot> slots_;
  std::vector<QueueEntry> queue_;
};

}  // namespace rtlos::sim
